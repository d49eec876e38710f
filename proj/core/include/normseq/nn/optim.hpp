#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "normseq/nn/params.hpp"

namespace normseq::nn {

enum class OptimizerKind { Sgd, Adam };

OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Global gradient-norm clip over all blocks; 0 disables it.
  double clip_norm = 0.0;
};

// Applies one update over a set of parameter blocks. Adam keeps first/second
// moment slots keyed by block name, so the same block list must be passed on
// every step. Throws RuntimeFailure if any gradient turns non-finite.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  void step(const std::vector<ParamRef>& blocks);

  const OptimizerConfig& config() const { return config_; }
  long steps_taken() const { return t_; }

 private:
  struct AdamSlot {
    std::vector<double> m;
    std::vector<double> v;
  };

  OptimizerConfig config_;
  long t_ = 0;
  std::unordered_map<std::string, AdamSlot> slots_;
};

// L2-norm of all gradients taken together; the clip threshold applies to this.
double global_grad_norm(const std::vector<ParamRef>& blocks);

}  // namespace normseq::nn
