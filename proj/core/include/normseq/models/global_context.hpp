#pragma once

#include <vector>

#include "normseq/corpus.hpp"
#include "normseq/features.hpp"
#include "normseq/models/logreg.hpp"
#include "normseq/models/train_config.hpp"
#include "normseq/nn/dense.hpp"
#include "normseq/nn/dropout.hpp"
#include "normseq/nn/lstm.hpp"

namespace normseq {

struct GlobalContextConfig {
  int input_dim = 0;    // frozen feature-space dimensionality
  int embed_dim = 150;
  int hidden = 600;
  int mlp_hidden = 100;
  int layers = 1;       // 1 or 2 stacked LSTM layers
  double dropout = 0.5;
};

// Dialog-level recurrence over per-clause feature vectors: sparse f_i through
// a linear embedding, one or two LSTM layers whose state spans the dialog,
// then a tanh MLP and the two-class output. Dropout sits at the LSTM stack
// input, after each LSTM layer, and after the MLP hidden activation.
struct GlobalContextModel {
  GlobalContextConfig config;
  nn::DenseParams embed;                  // input_dim -> embed_dim
  std::vector<nn::LstmParams> lstm_layers;  // [0]: X=embed_dim, [1]: X=hidden
  nn::DenseParams mlp;                    // hidden -> mlp_hidden, tanh
  nn::DenseParams output;                 // mlp_hidden -> 2

  void zero_grads();
  std::vector<nn::ParamRef> params();
};

GlobalContextModel init_global_context(const GlobalContextConfig& config,
                                       nn::Rng& rng);

// One recurrent state per LSTM layer.
using LayerStates = std::vector<nn::LstmState>;
LayerStates zero_states(const GlobalContextModel& model);

// Per-step dropout masks for one chunk. Drawing them is separated from the
// forward pass so a training step can be replayed deterministically.
struct StepMasks {
  nn::DropoutMask embed;
  std::vector<nn::DropoutMask> lstm;  // one per layer
  nn::DropoutMask mlp;
};
std::vector<StepMasks> draw_chunk_masks(const GlobalContextModel& model,
                                        int steps, nn::Rng& rng);

struct GlobalChunkResult {
  std::vector<nn::Vec> probs;  // one [2] pair per step
  LayerStates outgoing;        // state after the last step
};

// Forward over a chunk of consecutive clauses with incoming recurrent state.
// `masks` null means inference (identity dropout).
GlobalChunkResult global_forward_chunk(const GlobalContextModel& model,
                                       const std::vector<SparseVector>& chunk,
                                       const LayerStates& incoming,
                                       const std::vector<StepMasks>* masks = nullptr);

struct GlobalChunkGrad {
  double loss = 0.0;    // mean per-clause cross entropy over the chunk
  LayerStates outgoing;
};

// Forward + full backward over one chunk. Gradients accumulate into the model
// and stop at the chunk boundary; the outgoing state carries values only.
GlobalChunkGrad global_chunk_loss_grad(GlobalContextModel& model,
                                       const std::vector<SparseVector>& chunk,
                                       const std::vector<int>& labels,
                                       const LayerStates& incoming,
                                       double pos_weight = 1.0,
                                       const std::vector<StepMasks>* masks = nullptr);

// Whole-sequence inference pass from a zero state (no truncation).
std::vector<nn::Vec> global_forward_dialog(const GlobalContextModel& model,
                                           const std::vector<SparseVector>& vecs);

struct GlobalTrainResult {
  GlobalContextModel model;
  TrainHistory history;
};

// Truncated BPTT: each dialog is consumed as consecutive chunks of
// config.unroll clauses (last chunk may be shorter) with one optimizer update
// per chunk; the outgoing state seeds the next chunk and is zeroed at every
// dialog boundary. CV F1 picks the kept epoch.
GlobalTrainResult global_train(const std::vector<Dialog>& train_dialogs,
                               const std::vector<Dialog>& cv_dialogs,
                               const FeatureSpace& space, const Lexicon& lexicon,
                               const GlobalContextConfig& model_config,
                               const TrainConfig& config);

}  // namespace normseq
