#pragma once

#include "normseq/nn/params.hpp"
#include "normseq/nn/rng.hpp"

namespace normseq::nn {

// One LSTM layer. W stacks the four gate blocks [i; f; o; j] over rows and
// multiplies concat(h_prev, x): the first H columns act on h, the rest on x.
// The bias is added to the gate pre-activations, with the forget block
// initialized to 1.
struct LstmParams {
  Mat W;   // [4H, H+X]
  Vec b;   // [4H]
  Mat dW;  // gradient accumulators, same shapes
  Vec db;
  int hidden = 0;
  int input = 0;

  static LstmParams init(int hidden, int input, Rng& rng);
  // Zero-valued shell of the right shapes, for deserialization targets.
  static LstmParams zeros(int hidden, int input);
  void zero_grads();
  std::vector<ParamRef> params(const std::string& prefix);
};

struct LstmState {
  Vec h;
  Vec c;

  static LstmState zeros(int hidden);
};

// Everything the backward pass needs from one forward step.
struct LstmStepCache {
  Vec x, h_prev, c_prev;
  Vec i, f, o, j;  // gate activations
  Vec c, tanh_c;
};

// gates [i;f;o;j] = [sig;sig;sig;tanh](W concat(h_prev,x) + b)
// c = f.*c_prev + i.*j ; h = o.*tanh(c)
LstmState lstm_forward(const LstmParams& p, const Vec& x, const LstmState& prev,
                       LstmStepCache* cache = nullptr);

struct LstmBackwardResult {
  Vec dx;
  Vec dh_prev;
  Vec dc_prev;
};

// Exact adjoint of lstm_forward. dh/dc are the incoming gradients on h_t and
// c_t; parameter gradients accumulate into p.dW / p.db across time steps.
LstmBackwardResult lstm_backward(LstmParams& p, const LstmStepCache& cache,
                                 const Vec& dh, const Vec& dc);

}  // namespace normseq::nn
