#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "normseq/errors.hpp"
#include "normseq/nn/dense.hpp"
#include "normseq/nn/dropout.hpp"
#include "normseq/nn/gradcheck.hpp"
#include "normseq/nn/loss.hpp"
#include "normseq/nn/lstm.hpp"
#include "normseq/nn/optim.hpp"
#include "normseq/nn/params.hpp"
#include "normseq/nn/rng.hpp"

using namespace normseq;
using nn::Mat;
using nn::Vec;

namespace {

// Independent scalar-loop LSTM step used as the oracle: plain doubles and
// index arithmetic, no shared code with the library kernel.
struct ScalarLstm {
  int H, X;
  std::vector<double> W;  // row-major [4H][H+X], rows i,f,o,j, cols h then x
  std::vector<double> b;

  static double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

  void step(const std::vector<double>& x, std::vector<double>& h,
            std::vector<double>& c) const {
    std::vector<double> z(4 * H, 0.0);
    for (int r = 0; r < 4 * H; ++r) {
      double acc = b[r];
      for (int k = 0; k < H; ++k) acc += W[r * (H + X) + k] * h[k];
      for (int k = 0; k < X; ++k) acc += W[r * (H + X) + H + k] * x[k];
      z[r] = acc;
    }
    std::vector<double> h_new(H), c_new(H);
    for (int k = 0; k < H; ++k) {
      const double i = sig(z[k]);
      const double f = sig(z[H + k]);
      const double o = sig(z[2 * H + k]);
      const double j = std::tanh(z[3 * H + k]);
      c_new[k] = f * c[k] + i * j;
      h_new[k] = o * std::tanh(c_new[k]);
    }
    h = h_new;
    c = c_new;
  }
};

ScalarLstm as_scalar(const nn::LstmParams& p) {
  ScalarLstm s;
  s.H = p.hidden;
  s.X = p.input;
  s.W.resize(static_cast<size_t>(p.W.rows()) * p.W.cols());
  for (Eigen::Index r = 0; r < p.W.rows(); ++r)
    for (Eigen::Index c = 0; c < p.W.cols(); ++c)
      s.W[static_cast<size_t>(r) * p.W.cols() + c] = p.W(r, c);
  s.b.assign(p.b.data(), p.b.data() + p.b.size());
  return s;
}

}  // namespace

TEST_CASE("lstm forward matches the scalar oracle over 100 random configs") {
  nn::Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int H = 1 + static_cast<int>(rng.below(8));
    const int X = 1 + static_cast<int>(rng.below(8));
    const int steps = 1 + static_cast<int>(rng.below(6));
    nn::LstmParams p = nn::LstmParams::init(H, X, rng);
    // Scatter the weights away from the symmetric init.
    for (Eigen::Index r = 0; r < p.W.rows(); ++r)
      for (Eigen::Index c = 0; c < p.W.cols(); ++c) p.W(r, c) = rng.uniform(-1.0, 1.0);
    for (Eigen::Index k = 0; k < p.b.size(); ++k) p.b(k) = rng.uniform(-1.0, 1.0);

    const ScalarLstm oracle = as_scalar(p);
    std::vector<double> oh(H, 0.0), oc(H, 0.0);
    nn::LstmState state = nn::LstmState::zeros(H);

    for (int t = 0; t < steps; ++t) {
      std::vector<double> x(X);
      for (auto& v : x) v = rng.uniform(-2.0, 2.0);
      Vec xv(X);
      for (int k = 0; k < X; ++k) xv(k) = x[k];

      state = nn::lstm_forward(p, xv, state);
      oracle.step(x, oh, oc);
      for (int k = 0; k < H; ++k) {
        CHECK(state.h(k) == doctest::Approx(oh[k]).epsilon(1e-12));
        CHECK(state.c(k) == doctest::Approx(oc[k]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("lstm init puts the forget bias at one and everything else near zero") {
  nn::Rng rng(1);
  const auto p = nn::LstmParams::init(3, 2, rng);
  for (int k = 0; k < 3; ++k) {
    CHECK(p.b(k) == 0.0);
    CHECK(p.b(3 + k) == 1.0);
    CHECK(p.b(6 + k) == 0.0);
    CHECK(p.b(9 + k) == 0.0);
  }
  const double bound = 1.0 / std::sqrt(5.0);
  CHECK(p.W.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("lstm backward matches finite differences across seeds") {
  for (unsigned long long seed = 1; seed <= 100; ++seed) {
    nn::Rng rng(seed);
    const int H = 1 + static_cast<int>(rng.below(5));
    const int X = 1 + static_cast<int>(rng.below(5));
    nn::LstmParams p = nn::LstmParams::init(H, X, rng);

    Vec x(X);
    for (int k = 0; k < X; ++k) x(k) = rng.uniform(-1.5, 1.5);
    nn::LstmState prev;
    prev.h = Vec(H);
    prev.c = Vec(H);
    for (int k = 0; k < H; ++k) {
      prev.h(k) = rng.uniform(-1.0, 1.0);
      prev.c(k) = rng.uniform(-1.0, 1.0);
    }
    // Scalar target: weighted sum of h and c so both outputs carry gradient.
    Vec wh(H), wc(H);
    for (int k = 0; k < H; ++k) {
      wh(k) = rng.uniform(-1.0, 1.0);
      wc(k) = rng.uniform(-1.0, 1.0);
    }

    auto loss = [&] {
      const auto s = nn::lstm_forward(p, x, prev);
      return wh.dot(s.h) + wc.dot(s.c);
    };

    nn::LstmStepCache cache;
    nn::lstm_forward(p, x, prev, &cache);
    p.zero_grads();
    nn::lstm_backward(p, cache, wh, wc);

    const auto report = nn::check_gradients(loss, p.params("lstm"), {.seed = seed});
    CHECK_MESSAGE(report.ok(), "seed ", seed, " max rel ", report.max_rel_error);
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("lstm backward also reaches x and the previous state") {
  nn::Rng rng(5);
  const int H = 4, X = 3;
  nn::LstmParams p = nn::LstmParams::init(H, X, rng);
  Vec x(X);
  for (int k = 0; k < X; ++k) x(k) = rng.uniform(-1.0, 1.0);
  nn::LstmState prev;
  prev.h = Vec(H);
  prev.c = Vec(H);
  for (int k = 0; k < H; ++k) {
    prev.h(k) = rng.uniform(-1.0, 1.0);
    prev.c(k) = rng.uniform(-1.0, 1.0);
  }
  Vec wh(H);
  for (int k = 0; k < H; ++k) wh(k) = rng.uniform(-1.0, 1.0);

  nn::LstmStepCache cache;
  nn::lstm_forward(p, x, prev, &cache);
  p.zero_grads();
  const auto back = nn::lstm_backward(p, cache, wh, Vec::Zero(H));

  const double eps = 1e-6;
  auto loss = [&] { return wh.dot(nn::lstm_forward(p, x, prev).h); };
  for (int k = 0; k < X; ++k) {
    const double saved = x(k);
    x(k) = saved + eps;
    const double up = loss();
    x(k) = saved - eps;
    const double down = loss();
    x(k) = saved;
    CHECK(back.dx(k) == doctest::Approx((up - down) / (2 * eps)).epsilon(1e-5));
  }
  for (int k = 0; k < H; ++k) {
    double saved = prev.h(k);
    prev.h(k) = saved + eps;
    const double up = loss();
    prev.h(k) = saved - eps;
    const double down = loss();
    prev.h(k) = saved;
    CHECK(back.dh_prev(k) == doctest::Approx((up - down) / (2 * eps)).epsilon(1e-5));

    saved = prev.c(k);
    prev.c(k) = saved + eps;
    const double cup = loss();
    prev.c(k) = saved - eps;
    const double cdown = loss();
    prev.c(k) = saved;
    CHECK(back.dc_prev(k) == doctest::Approx((cup - cdown) / (2 * eps)).epsilon(1e-5));
  }
}

TEST_CASE("dense layers match finite differences") {
  for (unsigned long long seed = 1; seed <= 20; ++seed) {
    nn::Rng rng(seed);
    nn::DenseParams p = nn::DenseParams::init(3, 5, rng);
    Vec x(5), wy(3);
    for (int k = 0; k < 5; ++k) x(k) = rng.uniform(-1.0, 1.0);
    for (int k = 0; k < 3; ++k) wy(k) = rng.uniform(-1.0, 1.0);

    p.zero_grads();
    nn::dense_backward(p, x, wy);
    auto loss = [&] { return wy.dot(nn::dense_forward(p, x)); };
    CHECK(nn::check_gradients(loss, p.params("dense"), {.seed = seed}).ok());

    p.zero_grads();
    const Vec y = nn::dense_tanh_forward(p, x);
    nn::dense_tanh_backward(p, x, y, wy);
    auto tanh_loss = [&] { return wy.dot(nn::dense_tanh_forward(p, x)); };
    CHECK(nn::check_gradients(tanh_loss, p.params("dense"), {.seed = seed}).ok());
  }
}

TEST_CASE("softmax is stable and sums to one") {
  Vec logits(3);
  logits << 1000.0, 999.0, -1000.0;
  const Vec p = nn::softmax(logits);
  CHECK(std::isfinite(p(0)));
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p(0) > p(1));
  CHECK(p(2) < 1e-12);

  nn::Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Vec z(2 + static_cast<int>(rng.below(5)));
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rng.uniform(-30.0, 30.0);
    const Vec q = nn::softmax(z);
    CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q.minCoeff() >= 0.0);
  }
}

TEST_CASE("softmax cross entropy gradient matches finite differences") {
  nn::Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));
    Vec logits(n);
    for (int k = 0; k < n; ++k) logits(k) = rng.uniform(-2.0, 2.0);
    const int target = static_cast<int>(rng.below(n));
    const double w = trial % 2 == 0 ? 1.0 : 1.7;

    const auto r = nn::softmax_cross_entropy(logits, target, w);
    const double eps = 1e-6;
    for (int k = 0; k < n; ++k) {
      Vec up = logits, down = logits;
      up(k) += eps;
      down(k) -= eps;
      const double fd = (nn::softmax_cross_entropy(up, target, w).loss -
                         nn::softmax_cross_entropy(down, target, w).loss) /
                        (2 * eps);
      CHECK(r.dlogits(k) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("weighted cross entropy scales only the positive class") {
  Vec logits(2);
  logits << 0.3, -0.8;
  const auto plain = nn::softmax_cross_entropy(logits, 1, 1.0);
  const auto heavy = nn::softmax_cross_entropy(logits, 1, 2.5);
  CHECK(heavy.loss == doctest::Approx(2.5 * plain.loss).epsilon(1e-12));
  const auto neg_plain = nn::softmax_cross_entropy(logits, 0, 1.0);
  const auto neg_heavy = nn::softmax_cross_entropy(logits, 0, 2.5);
  CHECK(neg_plain.loss == doctest::Approx(neg_heavy.loss).epsilon(1e-12));
}

TEST_CASE("dropout: inference identity, inverted scaling, zero-rate draws nothing") {
  nn::Rng rng(9);
  const auto mask = nn::dropout_mask(1000, 0.5, rng);
  int kept = 0;
  for (int k = 0; k < 1000; ++k) {
    CHECK((mask.scale(k) == 0.0 || mask.scale(k) == 2.0));
    kept += mask.scale(k) > 0.0 ? 1 : 0;
  }
  CHECK(kept > 400);
  CHECK(kept < 600);

  nn::Rng a(42), b(42);
  const auto none = nn::dropout_mask(64, 0.0, a);
  CHECK(none.scale.sum() == doctest::Approx(64.0));
  // a must not have consumed any randomness
  CHECK(a.next_u64() == b.next_u64());

  CHECK_THROWS_AS(nn::dropout_mask(8, 1.0, a), ConfigError);
  CHECK_THROWS_AS(nn::dropout_mask(8, -0.1, a), ConfigError);
}

TEST_CASE("sgd takes plain gradient steps and adam matches a hand-rolled step") {
  Vec w(2), g(2);
  w << 1.0, -2.0;
  g << 0.5, 0.25;
  Vec w0 = w;
  std::vector<nn::ParamRef> refs = {nn::param_ref("w", w, g)};

  nn::Optimizer sgd({.kind = nn::OptimizerKind::Sgd, .lr = 0.1});
  sgd.step(refs);
  CHECK(w(0) == doctest::Approx(w0(0) - 0.1 * 0.5));
  CHECK(w(1) == doctest::Approx(w0(1) - 0.1 * 0.25));

  // Adam, first step: mhat = g, vhat = g^2, so the update is lr * sign-ish.
  Vec w2(1), g2(1);
  w2 << 3.0;
  g2 << 0.04;
  std::vector<nn::ParamRef> refs2 = {nn::param_ref("w", w2, g2)};
  nn::Optimizer adam({.kind = nn::OptimizerKind::Adam, .lr = 0.001});
  adam.step(refs2);
  const double expected = 3.0 - 0.001 * 0.04 / (std::sqrt(0.04 * 0.04) + 1e-8);
  CHECK(w2(0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("global norm clipping rescales the applied update") {
  Vec w(2), g(2);
  w << 0.0, 0.0;
  g << 3.0, 4.0;  // norm 5
  std::vector<nn::ParamRef> refs = {nn::param_ref("w", w, g)};
  CHECK(nn::global_grad_norm(refs) == doctest::Approx(5.0));

  nn::Optimizer sgd({.kind = nn::OptimizerKind::Sgd, .lr = 1.0, .clip_norm = 1.0});
  sgd.step(refs);
  CHECK(w(0) == doctest::Approx(-3.0 / 5.0));
  CHECK(w(1) == doctest::Approx(-4.0 / 5.0));
}

TEST_CASE("non-finite gradients are rejected with the block name") {
  Vec w(2), g(2);
  w << 0.0, 0.0;
  g << 1.0, std::nan("");
  std::vector<nn::ParamRef> refs = {nn::param_ref("broken.block", w, g)};
  nn::Optimizer opt({.kind = nn::OptimizerKind::Sgd, .lr = 0.1});
  try {
    opt.step(refs);
    FAIL("expected RuntimeFailure");
  } catch (const RuntimeFailure& e) {
    CHECK(std::string(e.what()).find("broken.block") != std::string::npos);
  }
}

TEST_CASE("param blocks round-trip bitwise through the binary container") {
  nn::Rng rng(77);
  Mat a(3, 4), da(3, 4);
  Vec b(5), db(5);
  for (Eigen::Index r = 0; r < 3; ++r)
    for (Eigen::Index c = 0; c < 4; ++c) a(r, c) = rng.uniform(-100.0, 100.0);
  for (Eigen::Index k = 0; k < 5; ++k) b(k) = rng.uniform(-100.0, 100.0);

  std::ostringstream out;
  std::vector<nn::ParamRef> src = {nn::param_ref("a", a, da), nn::param_ref("b", b, db)};
  nn::write_param_blocks(out, src);

  Mat a2 = Mat::Zero(3, 4), da2 = Mat::Zero(3, 4);
  Vec b2 = Vec::Zero(5), db2 = Vec::Zero(5);
  std::vector<nn::ParamRef> dst = {nn::param_ref("a", a2, da2),
                                   nn::param_ref("b", b2, db2)};
  std::istringstream in(out.str());
  nn::read_param_blocks(in, dst);
  CHECK(a == a2);
  CHECK(b == b2);

  // mismatched shape must throw
  Mat a3 = Mat::Zero(4, 3), da3 = Mat::Zero(4, 3);
  std::vector<nn::ParamRef> bad = {nn::param_ref("a", a3, da3),
                                   nn::param_ref("b", b2, db2)};
  std::istringstream in2(out.str());
  CHECK_THROWS_AS(nn::read_param_blocks(in2, bad), ValidationError);
}

TEST_CASE("rng streams are reproducible and uniform draws stay in range") {
  nn::Rng a(123), b(123);
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  nn::Rng c(5);
  for (int k = 0; k < 1000; ++k) CHECK(c.below(7) < 7);
}

TEST_CASE("gradcheck flags a corrupted gradient") {
  Vec w(3), g(3);
  w << 0.5, -0.25, 1.0;
  auto loss = [&] { return 0.5 * w.squaredNorm(); };
  g = w;  // correct gradient of the loss
  g(1) += 0.1;  // corrupt one coordinate
  std::vector<nn::ParamRef> refs = {nn::param_ref("w", w, g)};
  const auto report = nn::check_gradients(loss, refs);
  CHECK_FALSE(report.ok());
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].index == 1);
  CHECK(report.failures[0].block == "w");
}

TEST_CASE("gradcheck coordinate sampling checks at most the requested count") {
  Vec w(100), g(100);
  for (int k = 0; k < 100; ++k) w(k) = 0.01 * k;
  auto loss = [&] { return 0.5 * w.squaredNorm(); };
  g = w;
  std::vector<nn::ParamRef> refs = {nn::param_ref("w", w, g)};
  const auto report =
      nn::check_gradients(loss, refs, {.max_coords_per_block = 10, .seed = 3});
  CHECK(report.coords_checked == 10);
  CHECK(report.ok());
}
