#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "normseq/corpus.hpp"
#include "normseq/models/train_config.hpp"
#include "normseq/nn/dense.hpp"
#include "normseq/nn/lstm.hpp"

namespace normseq {

struct LocalContextConfig {
  int embed_dim = 300;
  int hidden = 300;
};

// Word-level recurrence inside one clause: embeddings of the clause's words
// run through an LSTM from a zero state, the last hidden output is
// concatenated with the meta vector and mapped to the two classes. The model
// carries no memory across clauses.
struct LocalContextModel {
  LocalContextConfig config;
  std::vector<std::string> vocab;  // row 0 is the unknown-word slot
  std::unordered_map<std::string, int> vocab_index;
  nn::Mat E;  // [vocab, embed_dim]
  nn::Mat dE;
  nn::LstmParams lstm;      // H = hidden, X = embed_dim
  nn::DenseParams output;   // hidden + meta -> 2

  int row_for(const std::string& word) const;  // 0 for unseen words
  void zero_grads();
  std::vector<nn::ParamRef> params();
};

// Sorted unique training words behind the reserved unknown slot.
std::vector<std::string> build_vocab(const std::vector<Dialog>& train_dialogs);

LocalContextModel init_local_context(std::vector<std::string> vocab,
                                     const LocalContextConfig& config,
                                     nn::Rng& rng);

// Replaces embedding rows for vocabulary words found in a word2vec-style text
// file ("word v1 .. vD" lines, optional "count dim" header). Returns how many
// rows were filled. Dimension mismatch is an error.
int load_embeddings_text(LocalContextModel& model, const std::string& path);

// Probability pair [p(y=0), p(y=1)]. The training flag is accepted for
// signature uniformity across models; this architecture has no train-time
// stochasticity, so it does not change the result.
nn::Vec local_forward(const LocalContextModel& model, const Clause& clause,
                      bool training = false);

// Loss on one clause with gradient accumulation into the model.
double local_loss_grad(LocalContextModel& model, const Clause& clause,
                       double pos_weight = 1.0);

struct LocalTrainResult {
  LocalContextModel model;
  TrainHistory history;
};

// Minibatch training over independent clauses, CV-best-F1 checkpointing.
LocalTrainResult local_train(const std::vector<Dialog>& train_dialogs,
                             const std::vector<Dialog>& cv_dialogs,
                             const LocalContextConfig& model_config,
                             const TrainConfig& config);

}  // namespace normseq
