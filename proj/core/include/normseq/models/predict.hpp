#pragma once

#include <vector>

#include "normseq/corpus.hpp"
#include "normseq/eval.hpp"
#include "normseq/models/checkpoint.hpp"

namespace normseq {

struct Prediction {
  double p_violation = 0.0;
  int label = 0;
};

// Streaming left-to-right pass over one dialog using the checkpoint's own
// embedded feature space and lexicon. Recurrent state is threaded across the
// whole dialog with no truncation; the output at step t depends on clauses
// 0..t only.
std::vector<Prediction> predict_dialog(const Checkpoint& ckpt, const Dialog& dialog);

// JSONL rendering: one {"session", "index", "p_violation", "label"} per clause.
std::string predictions_to_jsonl(const Dialog& dialog,
                                 const std::vector<Prediction>& preds);

// Runs predict_dialog over every dialog and aggregates micro metrics plus a
// per-session breakdown.
MetricsReport evaluate_model(const Checkpoint& ckpt,
                             const std::vector<Dialog>& dialogs,
                             const std::string& split_name);

}  // namespace normseq
