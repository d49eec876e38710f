#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace normseq {

enum class Relationship { Friend, Stranger };

enum class ViolationCategory { RuleBreaking, FaceThreat, Reference };

std::string to_string(Relationship r);
std::string to_string(ViolationCategory c);
Relationship relationship_from_string(const std::string& s);
ViolationCategory category_from_string(const std::string& s);

// Per-clause dyad metadata and annotated nonverbal behavior of the speaker.
// Every field is mandatory at ingestion; there is no missing-value state.
struct NonverbalMeta {
  Relationship relationship = Relationship::Stranger;
  bool head_nod = false;
  bool smile = false;
  bool gaze_partner = false;

  bool operator==(const NonverbalMeta&) const = default;
};

// One proposition-level utterance unit: the prediction unit.
struct Clause {
  std::vector<std::string> words;                  // lowercase tokens, non-empty
  std::optional<std::vector<std::string>> pos_tags;  // same length as words if present
  NonverbalMeta meta;
  int label = 0;  // 1 = social norm violation
  std::optional<ViolationCategory> category;  // only valid when label == 1

  bool operator==(const Clause&) const = default;
};

// Ordered clause sequence of one recording session; index is the time step.
struct Dialog {
  std::string session_id;
  std::vector<Clause> clauses;

  bool operator==(const Dialog&) const = default;
};

struct CorpusSplit {
  std::vector<Dialog> train;
  std::vector<Dialog> cv;
  std::vector<Dialog> test;
};

enum class SplitName { Train, Cv, Test };
std::string to_string(SplitName s);
SplitName split_name_from_string(const std::string& s);

struct CorpusDiagnostic {
  int line = 0;  // 1-based JSONL line, 0 when not line-specific
  std::string message;
};

struct CorpusValidation {
  std::vector<Dialog> dialogs;  // valid records only
  std::vector<CorpusDiagnostic> errors;
};

// Strict loader: throws ValidationError naming the first offending line.
// Tokens are lowercased (ASCII) at ingestion.
std::vector<Dialog> load_corpus(const std::string& path);

// Lenient pass for `normseq validate`: collects every diagnostic instead of
// stopping at the first.
CorpusValidation validate_corpus(const std::string& path);

// Canonical JSONL writer; load_corpus(save_corpus(d)) is structural identity.
void save_corpus(const std::vector<Dialog>& dialogs, const std::string& path);
std::string corpus_to_jsonl(const std::vector<Dialog>& dialogs);
std::vector<Dialog> load_corpus_from_string(const std::string& jsonl,
                                            const std::string& origin = "<memory>");

// Whole-session assignment into train/cv/test.
CorpusSplit split_corpus(const std::vector<Dialog>& dialogs,
                         const std::map<std::string, SplitName>& assignment);

std::map<std::string, SplitName> load_split_assignment(const std::string& path);

struct SplitCounts {
  std::int64_t sessions = 0;
  std::int64_t clauses = 0;
  std::int64_t positives = 0;
};

struct CorpusStats {
  SplitCounts train;
  SplitCounts cv;
  SplitCounts test;
  // Mean clauses per training dialog, rounded to one decimal; absent for an
  // empty training split.
  std::optional<double> mean_train_clauses;
  double positive_rate = 0.0;  // pooled over all splits
};

CorpusStats corpus_stats(const CorpusSplit& split);

std::string stats_to_json(const CorpusStats& stats);

}  // namespace normseq
