#pragma once

#include <optional>
#include <string>
#include <variant>

#include "normseq/features.hpp"
#include "normseq/lexicon.hpp"
#include "normseq/models/global_context.hpp"
#include "normseq/models/local_context.hpp"
#include "normseq/models/logreg.hpp"
#include "normseq/models/train_config.hpp"

namespace normseq {

enum class ModelKind { LogReg, Local, Global1, Global2 };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// Everything needed to reproduce a trained model's predictions: the
// parameters plus the frozen feature space and lexicon they were built
// against (absent for the local model, which works on raw words), the
// training configuration and the per-epoch history.
struct Checkpoint {
  ModelKind kind = ModelKind::LogReg;
  TrainConfig train_config;
  TrainHistory history;
  std::optional<FeatureSpace> space;
  std::optional<Lexicon> lexicon;
  std::variant<LogRegModel, LocalContextModel, GlobalContextModel> model;
};

// Binary container: magic + version, JSON header (kind, configs, embedded
// space/lexicon/vocab, history), named parameter blocks, CRC-32 trailer.
// Loading verifies the checksum before touching any content, so a truncated
// or corrupted file never yields a partial model.
void save_checkpoint(Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Guard for callers that bring their own feature space: it must be the one
// the checkpoint was trained with.
void require_space_match(const Checkpoint& ckpt, const FeatureSpace& space);

}  // namespace normseq
