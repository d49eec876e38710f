#include "normseq/nn/dropout.hpp"

#include "normseq/errors.hpp"

namespace normseq::nn {

DropoutMask dropout_mask(int size, double rate, Rng& rng) {
  if (size <= 0) throw ConfigError("dropout: size must be positive");
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout: rate must be in [0, 1)");
  DropoutMask m;
  if (rate == 0.0) {
    m.scale = Vec::Ones(size);
    return m;
  }
  const double keep = 1.0 / (1.0 - rate);
  m.scale = Vec(size);
  for (int k = 0; k < size; ++k)
    m.scale(k) = rng.uniform() < rate ? 0.0 : keep;
  return m;
}

}  // namespace normseq::nn
