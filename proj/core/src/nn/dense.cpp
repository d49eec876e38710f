#include "normseq/nn/dense.hpp"

#include <cmath>

#include "normseq/errors.hpp"

namespace normseq::nn {

DenseParams DenseParams::init(int out, int in, Rng& rng) {
  if (out <= 0 || in <= 0)
    throw ConfigError("dense: layer sizes must be positive");
  DenseParams p;
  p.out = out;
  p.in = in;
  const double k = 1.0 / std::sqrt(static_cast<double>(in));
  p.W = Mat(out, in);
  for (Eigen::Index r = 0; r < out; ++r)
    for (Eigen::Index c = 0; c < in; ++c) p.W(r, c) = rng.uniform(-k, k);
  p.b = Vec::Zero(out);
  p.dW = Mat::Zero(out, in);
  p.db = Vec::Zero(out);
  return p;
}

DenseParams DenseParams::zeros(int out, int in) {
  if (out <= 0 || in <= 0)
    throw ConfigError("dense: layer sizes must be positive");
  DenseParams p;
  p.out = out;
  p.in = in;
  p.W = Mat::Zero(out, in);
  p.b = Vec::Zero(out);
  p.dW = Mat::Zero(out, in);
  p.db = Vec::Zero(out);
  return p;
}

void DenseParams::zero_grads() {
  dW.setZero();
  db.setZero();
}

std::vector<ParamRef> DenseParams::params(const std::string& prefix) {
  return {param_ref(prefix + ".W", W, dW), param_ref(prefix + ".b", b, db)};
}

Vec dense_forward(const DenseParams& p, const Vec& x) {
  if (x.size() != p.in)
    throw ConfigError("dense: input size mismatch: got " + std::to_string(x.size()) +
                      ", expected " + std::to_string(p.in));
  return p.W * x + p.b;
}

Vec dense_backward(DenseParams& p, const Vec& x, const Vec& dy) {
  if (dy.size() != p.out) throw ConfigError("dense: gradient size mismatch");
  p.dW.noalias() += dy * x.transpose();
  p.db += dy;
  return p.W.transpose() * dy;
}

Vec dense_tanh_forward(const DenseParams& p, const Vec& x) {
  return dense_forward(p, x).array().tanh();
}

Vec dense_tanh_backward(DenseParams& p, const Vec& x, const Vec& y, const Vec& dy) {
  const Vec dz = dy.cwiseProduct((1.0 - y.array().square()).matrix());
  return dense_backward(p, x, dz);
}

}  // namespace normseq::nn
