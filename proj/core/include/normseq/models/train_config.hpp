#pragma once

#include <string>

#include "normseq/nn/optim.hpp"

namespace normseq {

// Knobs shared by all trainers. Model selection lives outside: the same
// config drives logreg minibatch descent and the recurrent TBPTT loop.
struct TrainConfig {
  int unroll = 20;     // TBPTT chunk length in clauses
  int epochs = 10;
  nn::OptimizerKind optimizer = nn::OptimizerKind::Adam;
  double lr = 1e-3;
  double l2_lambda = 1e-4;  // logreg weight decay; recurrent models ignore it
  unsigned long long seed = 1;
  double clip_norm = 5.0;  // global gradient-norm clip, 0 disables
  double dropout = 0.5;    // recurrent models only
  double pos_weight = 1.0; // loss weight for the violation class
  int batch_size = 32;     // logreg minibatch size
  bool binary_features = false;  // presence instead of counts in f_i

  // Strict JSON round-trip: unknown keys are rejected, absent keys keep
  // defaults. Used for run-config files and checkpoint embedding.
  std::string to_json_string() const;
  static TrainConfig from_json_string(const std::string& text);

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

nn::OptimizerConfig optimizer_config(const TrainConfig& c);

// One row of the training history: epoch-mean loss plus the cross-validation
// metrics driving best-checkpoint selection.
struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double cv_precision = 0.0;
  double cv_recall = 0.0;
  double cv_f1 = 0.0;
  bool best = false;  // whether this epoch's weights became the kept model
};

using TrainHistory = std::vector<EpochRecord>;

std::string history_to_json(const TrainHistory& history);
TrainHistory history_from_json(const std::string& text);

}  // namespace normseq
