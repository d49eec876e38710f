#pragma once

#include "normseq/nn/params.hpp"
#include "normseq/nn/rng.hpp"

namespace normseq::nn {

// Inverted dropout: survivors are scaled by 1/(1-rate) at train time, so
// inference applies the identity. The mask already carries the scale, making
// the backward pass the same elementwise product.
struct DropoutMask {
  Vec scale;  // 0 for dropped units, 1/(1-rate) for kept ones

  Vec apply(const Vec& x) const { return x.cwiseProduct(scale); }
};

// Draws one mask. rate == 0 returns an all-ones mask without consuming
// randomness, so disabling dropout never shifts the RNG stream.
DropoutMask dropout_mask(int size, double rate, Rng& rng);

}  // namespace normseq::nn
