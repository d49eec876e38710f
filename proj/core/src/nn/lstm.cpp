#include "normseq/nn/lstm.hpp"

#include <cmath>

#include "normseq/errors.hpp"

namespace normseq::nn {

namespace {

inline Vec sigmoid(const Vec& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

LstmParams LstmParams::init(int hidden, int input, Rng& rng) {
  if (hidden <= 0 || input <= 0)
    throw ConfigError("lstm: hidden and input sizes must be positive");
  LstmParams p;
  p.hidden = hidden;
  p.input = input;
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden + input));
  p.W = Mat(4 * hidden, hidden + input);
  for (Eigen::Index r = 0; r < p.W.rows(); ++r)
    for (Eigen::Index c = 0; c < p.W.cols(); ++c) p.W(r, c) = rng.uniform(-k, k);
  p.b = Vec::Zero(4 * hidden);
  // Forget-gate rows sit in the second block; biasing them to 1 keeps the
  // cell from forgetting everything before training has moved the weights.
  p.b.segment(hidden, hidden).setConstant(1.0);
  p.dW = Mat::Zero(4 * hidden, hidden + input);
  p.db = Vec::Zero(4 * hidden);
  return p;
}

LstmParams LstmParams::zeros(int hidden, int input) {
  if (hidden <= 0 || input <= 0)
    throw ConfigError("lstm: hidden and input sizes must be positive");
  LstmParams p;
  p.hidden = hidden;
  p.input = input;
  p.W = Mat::Zero(4 * hidden, hidden + input);
  p.b = Vec::Zero(4 * hidden);
  p.dW = Mat::Zero(4 * hidden, hidden + input);
  p.db = Vec::Zero(4 * hidden);
  return p;
}

void LstmParams::zero_grads() {
  dW.setZero();
  db.setZero();
}

std::vector<ParamRef> LstmParams::params(const std::string& prefix) {
  return {param_ref(prefix + ".W", W, dW), param_ref(prefix + ".b", b, db)};
}

LstmState LstmState::zeros(int hidden) {
  return {Vec::Zero(hidden), Vec::Zero(hidden)};
}

LstmState lstm_forward(const LstmParams& p, const Vec& x, const LstmState& prev,
                       LstmStepCache* cache) {
  const int H = p.hidden;
  if (x.size() != p.input)
    throw ConfigError("lstm: input size mismatch: got " + std::to_string(x.size()) +
                      ", expected " + std::to_string(p.input));
  if (prev.h.size() != H || prev.c.size() != H)
    throw ConfigError("lstm: state size mismatch");

  Vec hx(H + p.input);
  hx.head(H) = prev.h;
  hx.tail(p.input) = x;

  const Vec z = p.W * hx + p.b;
  const Vec i = sigmoid(z.segment(0, H));
  const Vec f = sigmoid(z.segment(H, H));
  const Vec o = sigmoid(z.segment(2 * H, H));
  const Vec j = z.segment(3 * H, H).array().tanh();

  LstmState next;
  next.c = f.cwiseProduct(prev.c) + i.cwiseProduct(j);
  const Vec tanh_c = next.c.array().tanh();
  next.h = o.cwiseProduct(tanh_c);

  if (cache) {
    cache->x = x;
    cache->h_prev = prev.h;
    cache->c_prev = prev.c;
    cache->i = i;
    cache->f = f;
    cache->o = o;
    cache->j = j;
    cache->c = next.c;
    cache->tanh_c = tanh_c;
  }
  return next;
}

LstmBackwardResult lstm_backward(LstmParams& p, const LstmStepCache& cache,
                                 const Vec& dh, const Vec& dc) {
  const int H = p.hidden;
  if (dh.size() != H || dc.size() != H)
    throw ConfigError("lstm: gradient size mismatch");

  const Vec d_o = dh.cwiseProduct(cache.tanh_c);
  // h = o.*tanh(c): the h-gradient reaches c through tanh, on top of any
  // gradient already flowing along the cell path.
  const Vec dc_total =
      dc + dh.cwiseProduct(cache.o)
               .cwiseProduct((1.0 - cache.tanh_c.array().square()).matrix());

  const Vec df = dc_total.cwiseProduct(cache.c_prev);
  const Vec dc_prev = dc_total.cwiseProduct(cache.f);
  const Vec di = dc_total.cwiseProduct(cache.j);
  const Vec dj = dc_total.cwiseProduct(cache.i);

  Vec dz(4 * H);
  dz.segment(0, H) =
      di.cwiseProduct(cache.i).cwiseProduct((1.0 - cache.i.array()).matrix());
  dz.segment(H, H) =
      df.cwiseProduct(cache.f).cwiseProduct((1.0 - cache.f.array()).matrix());
  dz.segment(2 * H, H) =
      d_o.cwiseProduct(cache.o).cwiseProduct((1.0 - cache.o.array()).matrix());
  dz.segment(3 * H, H) = dj.cwiseProduct((1.0 - cache.j.array().square()).matrix());

  Vec hx(H + p.input);
  hx.head(H) = cache.h_prev;
  hx.tail(p.input) = cache.x;

  p.dW.noalias() += dz * hx.transpose();
  p.db += dz;

  const Vec dhx = p.W.transpose() * dz;
  LstmBackwardResult r;
  r.dh_prev = dhx.head(H);
  r.dx = dhx.tail(p.input);
  r.dc_prev = dc_prev;
  return r;
}

}  // namespace normseq::nn
