#pragma once

#include "normseq/nn/params.hpp"

namespace normseq::nn {

// Numerically stable softmax (max-subtracted).
Vec softmax(const Vec& logits);

struct SoftmaxCeResult {
  double loss = 0.0;
  Vec probs;
  Vec dlogits;  // gradient of the (possibly weighted) loss wrt logits
};

// Cross entropy -w * log p[target] over softmax probabilities. `pos_weight`
// scales the loss for target class 1 and leaves class 0 at weight 1; pass 1
// for the unweighted case. dlogits = w * (p - onehot(target)).
SoftmaxCeResult softmax_cross_entropy(const Vec& logits, int target,
                                      double pos_weight = 1.0);

}  // namespace normseq::nn
