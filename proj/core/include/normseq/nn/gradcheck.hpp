#pragma once

#include <functional>
#include <string>
#include <vector>

#include "normseq/nn/params.hpp"

namespace normseq::nn {

struct GradCheckConfig {
  double epsilon = 1e-5;
  double threshold = 1e-4;
  // Check at most this many coordinates per block (0 = every coordinate).
  // Sampling without replacement, driven by `seed`.
  int max_coords_per_block = 0;
  unsigned long long seed = 7;
};

struct GradCheckFailure {
  std::string block;
  Eigen::Index index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  long coords_checked = 0;
  double max_rel_error = 0.0;
  std::vector<GradCheckFailure> failures;

  bool ok() const { return failures.empty(); }
};

// Central-difference check of the analytic gradients stored in `blocks`.
// `loss` must recompute the scalar loss from the blocks' current values and
// be deterministic across calls (fix any dropout masks before calling).
// The caller runs its own forward/backward first so the grad arrays are
// already filled. rel = |a-n| / max(|a|, |n|, 1e-8), compared to `threshold`.
GradCheckReport check_gradients(const std::function<double()>& loss,
                                const std::vector<ParamRef>& blocks,
                                const GradCheckConfig& config = {});

}  // namespace normseq::nn
