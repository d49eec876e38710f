#pragma once

#include <map>
#include <string>
#include <vector>

#include "normseq/corpus.hpp"
#include "normseq/lexicon.hpp"

namespace normseq {

// Generator settings for the planted-context benchmark corpus. Positives come
// in two kinds of equal expected mass: a "bam" token makes its own clause
// positive, and a "cue" token in each of the two preceding clauses makes a
// clause positive without any marker inside the clause itself. The second
// kind is invisible to per-clause features, which caps history-free models.
struct SynthSpec {
  int train_sessions = 40;
  int cv_sessions = 5;
  int test_sessions = 5;
  int clauses_per_session = 200;
  int vocab_size = 50;      // filler vocabulary
  int context_depth = 2;    // clauses of history the rule looks back
  double positive_rate = 0.15;
  unsigned long long seed = 1;
  int min_words = 3;
  int max_words = 8;

  void validate() const;
};

struct SynthOutput {
  std::vector<Dialog> dialogs;
  std::map<std::string, SplitName> assignment;
  Lexicon lexicon;               // categories marking the planted tokens
  std::string rule_description;  // human-readable ground-truth sidecar
};

SynthOutput generate_synthetic_corpus(const SynthSpec& spec);

// The ground-truth labeling rule: 1 iff "bam" is in clause t, or "cue" is in
// both clause t-1 and clause t-2. Scoring this rule against a generated
// corpus gives F1 = 1 by construction.
int planted_rule_label(const Dialog& dialog, size_t t);

struct SynthPaths {
  std::string corpus;
  std::string splits;
  std::string lexicon;
  std::string rule;
};

// Writes corpus.jsonl, splits.json, lexicon.json and rule.txt under out_dir.
SynthPaths write_synth_corpus(const SynthOutput& output, const std::string& out_dir);

}  // namespace normseq
