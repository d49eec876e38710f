#include "normseq/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "normseq/errors.hpp"
#include "normseq/nn/rng.hpp"

namespace normseq::nn {

GradCheckReport check_gradients(const std::function<double()>& loss,
                                const std::vector<ParamRef>& blocks,
                                const GradCheckConfig& config) {
  if (!(config.epsilon > 0.0))
    throw ConfigError("gradcheck: epsilon must be positive");
  if (!(config.threshold > 0.0))
    throw ConfigError("gradcheck: threshold must be positive");

  Rng rng(config.seed);
  GradCheckReport report;
  for (const auto& b : blocks) {
    std::vector<Eigen::Index> coords(static_cast<size_t>(b.size()));
    std::iota(coords.begin(), coords.end(), Eigen::Index{0});
    if (config.max_coords_per_block > 0 &&
        b.size() > config.max_coords_per_block) {
      rng.shuffle(coords.begin(), coords.end());
      coords.resize(static_cast<size_t>(config.max_coords_per_block));
      std::sort(coords.begin(), coords.end());
    }

    for (Eigen::Index k : coords) {
      const double saved = b.value[k];
      b.value[k] = saved + config.epsilon;
      const double up = loss();
      b.value[k] = saved - config.epsilon;
      const double down = loss();
      b.value[k] = saved;

      const double numeric = (up - down) / (2.0 * config.epsilon);
      const double analytic = b.grad[k];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      ++report.coords_checked;
      report.max_rel_error = std::max(report.max_rel_error, rel);
      if (rel > config.threshold)
        report.failures.push_back({b.name, k, analytic, numeric, rel});
    }
  }
  return report;
}

}  // namespace normseq::nn
