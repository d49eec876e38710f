#include "normseq/nn/loss.hpp"

#include <cmath>

#include "normseq/errors.hpp"

namespace normseq::nn {

Vec softmax(const Vec& logits) {
  if (logits.size() == 0) throw ConfigError("softmax: empty logits");
  const double m = logits.maxCoeff();
  Vec e = (logits.array() - m).exp();
  return e / e.sum();
}

SoftmaxCeResult softmax_cross_entropy(const Vec& logits, int target,
                                      double pos_weight) {
  if (target < 0 || target >= logits.size())
    throw ConfigError("softmax_cross_entropy: target out of range");
  if (!(pos_weight > 0.0))
    throw ConfigError("softmax_cross_entropy: pos_weight must be positive");

  SoftmaxCeResult r;
  r.probs = softmax(logits);
  const double w = target == 1 ? pos_weight : 1.0;
  // Clamp keeps the loss finite if a probability underflows to zero.
  r.loss = -w * std::log(std::max(r.probs(target), 1e-300));
  r.dlogits = w * r.probs;
  r.dlogits(target) -= w;
  return r;
}

}  // namespace normseq::nn
