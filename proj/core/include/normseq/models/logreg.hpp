#pragma once

#include <vector>

#include "normseq/corpus.hpp"
#include "normseq/features.hpp"
#include "normseq/models/train_config.hpp"
#include "normseq/nn/params.hpp"

namespace normseq {

// One clause reduced to its sparse feature vector and gold label; the unit
// the per-clause models train on.
struct LabeledVector {
  SparseVector f;
  int label = 0;
};

std::vector<LabeledVector> vectorize_dialogs(const std::vector<Dialog>& dialogs,
                                             const FeatureSpace& space,
                                             const Lexicon& lexicon,
                                             const VectorizeOptions& opts = {});

// L2-regularized logistic regression over the sparse clause features: the
// per-clause baseline with no access to dialog history.
struct LogRegModel {
  nn::Vec w;   // [dim]
  nn::Vec dw;
  double b = 0.0;
  double db = 0.0;
  double l2_lambda = 0.0;
  double threshold = 0.5;

  int dim() const { return static_cast<int>(w.size()); }
  void zero_grads();
  std::vector<nn::ParamRef> params();

  static LogRegModel zeros(int dim, double l2_lambda = 0.0);
};

// p(y=1) = sigmoid(w.f + b). Throws on dimension mismatch.
double logreg_predict(const LogRegModel& m, const SparseVector& f);

// Threshold rule shared by every model: ties go to the positive class.
inline int label_from_probability(double p, double threshold = 0.5) {
  return p >= threshold ? 1 : 0;
}

// Mean weighted cross entropy over the batch plus l2_lambda * ||w||^2
// (bias unregularized). The _grad variant also accumulates into m.dw / m.db.
double logreg_loss(const LogRegModel& m, const std::vector<LabeledVector>& batch,
                   double pos_weight = 1.0);
double logreg_loss_grad(LogRegModel& m, const std::vector<LabeledVector>& batch,
                        double pos_weight = 1.0);

struct LogRegTrainResult {
  LogRegModel model;
  TrainHistory history;
};

// Minibatch descent on the regularized objective; keeps the epoch whose CV F1
// is best (strictly better wins, so ties keep the earlier epoch). With an
// empty CV set the final epoch is returned.
LogRegTrainResult logreg_train(const std::vector<Dialog>& train_dialogs,
                               const std::vector<Dialog>& cv_dialogs,
                               const FeatureSpace& space, const Lexicon& lexicon,
                               const TrainConfig& config);

}  // namespace normseq
