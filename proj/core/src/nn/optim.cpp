#include "normseq/nn/optim.hpp"

#include <cmath>

#include "normseq/errors.hpp"

namespace normseq::nn {

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer: " + name);
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Sgd ? "sgd" : "adam";
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  if (!(config_.lr > 0.0)) throw ConfigError("optimizer: lr must be positive");
  if (config_.clip_norm < 0.0)
    throw ConfigError("optimizer: clip_norm must be >= 0");
}

double global_grad_norm(const std::vector<ParamRef>& blocks) {
  double sq = 0.0;
  for (const auto& b : blocks)
    for (Eigen::Index k = 0; k < b.size(); ++k) sq += b.grad[k] * b.grad[k];
  return std::sqrt(sq);
}

void Optimizer::step(const std::vector<ParamRef>& blocks) {
  for (const auto& b : blocks)
    for (Eigen::Index k = 0; k < b.size(); ++k)
      if (!std::isfinite(b.grad[k]))
        throw RuntimeFailure("non-finite gradient in parameter block " + b.name);

  double scale = 1.0;
  if (config_.clip_norm > 0.0) {
    const double norm = global_grad_norm(blocks);
    if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
  }

  ++t_;
  if (config_.kind == OptimizerKind::Sgd) {
    for (const auto& b : blocks)
      for (Eigen::Index k = 0; k < b.size(); ++k)
        b.value[k] -= config_.lr * scale * b.grad[k];
    return;
  }

  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (const auto& b : blocks) {
    AdamSlot& slot = slots_[b.name];
    if (slot.m.empty()) {
      slot.m.assign(static_cast<size_t>(b.size()), 0.0);
      slot.v.assign(static_cast<size_t>(b.size()), 0.0);
    } else if (slot.m.size() != static_cast<size_t>(b.size())) {
      throw RuntimeFailure("optimizer slot shape changed for block " + b.name);
    }
    for (Eigen::Index k = 0; k < b.size(); ++k) {
      const double g = scale * b.grad[k];
      slot.m[k] = config_.beta1 * slot.m[k] + (1.0 - config_.beta1) * g;
      slot.v[k] = config_.beta2 * slot.v[k] + (1.0 - config_.beta2) * g * g;
      const double mhat = slot.m[k] / bc1;
      const double vhat = slot.v[k] / bc2;
      b.value[k] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

}  // namespace normseq::nn
