#pragma once

#include "normseq/nn/params.hpp"
#include "normseq/nn/rng.hpp"

namespace normseq::nn {

// Affine layer y = W x + b with optional tanh.
struct DenseParams {
  Mat W;   // [out, in]
  Vec b;   // [out]
  Mat dW;
  Vec db;
  int out = 0;
  int in = 0;

  static DenseParams init(int out, int in, Rng& rng);
  // Zero-valued shell of the right shapes, for deserialization targets.
  static DenseParams zeros(int out, int in);
  void zero_grads();
  std::vector<ParamRef> params(const std::string& prefix);
};

Vec dense_forward(const DenseParams& p, const Vec& x);

// Accumulates into p.dW / p.db and returns dx.
Vec dense_backward(DenseParams& p, const Vec& x, const Vec& dy);

// y = tanh(W x + b); pass the activation y back in for the backward step.
Vec dense_tanh_forward(const DenseParams& p, const Vec& x);
Vec dense_tanh_backward(DenseParams& p, const Vec& x, const Vec& y, const Vec& dy);

}  // namespace normseq::nn
