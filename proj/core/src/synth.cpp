#include "normseq/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "normseq/errors.hpp"
#include "normseq/nn/rng.hpp"

namespace normseq {

namespace {

constexpr const char* kDirectToken = "bam";
constexpr const char* kSetupToken = "cue";

// Scheduled role of one clause slot.
enum class Role { Filler, Direct, CueFirst, CueSecond, Target };

bool contains(const Clause& c, const char* token) {
  return std::find(c.words.begin(), c.words.end(), token) != c.words.end();
}

}  // namespace

void SynthSpec::validate() const {
  if (train_sessions < 1 || cv_sessions < 0 || test_sessions < 0)
    throw ConfigError("synth: session counts out of range");
  if (clauses_per_session < 3)
    throw ConfigError("synth: need at least 3 clauses per session");
  if (vocab_size < 2) throw ConfigError("synth: vocab_size must be >= 2");
  if (context_depth != 2)
    throw ConfigError("synth: only context depth 2 is supported");
  if (!(positive_rate > 0.0) || positive_rate >= 0.5)
    throw ConfigError("synth: positive_rate must be in (0, 0.5)");
  if (min_words < 1 || max_words < min_words)
    throw ConfigError("synth: bad words-per-clause range");
}

int planted_rule_label(const Dialog& dialog, size_t t) {
  if (t >= dialog.clauses.size())
    throw ValidationError("planted rule: clause index out of range");
  if (contains(dialog.clauses[t], kDirectToken)) return 1;
  if (t >= 2 && contains(dialog.clauses[t - 1], kSetupToken) &&
      contains(dialog.clauses[t - 2], kSetupToken))
    return 1;
  return 0;
}

SynthOutput generate_synthetic_corpus(const SynthSpec& spec) {
  spec.validate();
  nn::Rng rng(spec.seed);

  std::vector<std::string> fillers;
  for (int k = 0; k < spec.vocab_size; ++k) {
    std::ostringstream w;
    w << "w" << (k < 10 ? "0" : "") << k;
    fillers.push_back(w.str());
  }

  // An event decision happens at every unoccupied slot: probability a for a
  // direct positive (1 slot) and a for a context pattern (3 slots: cue, cue,
  // positive target). Renewal over slots gives overall positive rate r for
  // a = r / (2(1-r)), with half the positives contextual.
  const double a = spec.positive_rate / (2.0 * (1.0 - spec.positive_rate));

  const int total_sessions =
      spec.train_sessions + spec.cv_sessions + spec.test_sessions;
  SynthOutput out;

  for (int s = 0; s < total_sessions; ++s) {
    Dialog dialog;
    std::ostringstream sid;
    sid << "synth-" << (s < 10 ? "00" : s < 100 ? "0" : "") << s;
    dialog.session_id = sid.str();

    const int T = spec.clauses_per_session;
    std::vector<Role> roles(static_cast<size_t>(T), Role::Filler);
    std::vector<int> planned(static_cast<size_t>(T), 0);
    for (int t = 0; t < T; ++t) {
      if (roles[t] != Role::Filler) continue;
      const double u = rng.uniform();
      if (u < a) {
        roles[t] = Role::Direct;
        planned[t] = 1;
      } else if (u < 2.0 * a) {
        if (t + 2 < T) {
          roles[t] = Role::CueFirst;
          roles[t + 1] = Role::CueSecond;
          roles[t + 2] = Role::Target;
          planned[t + 2] = 1;
        } else {
          // No room for the pattern before the dialog ends; keep the
          // positive-rate budget with a direct positive instead.
          roles[t] = Role::Direct;
          planned[t] = 1;
        }
      }
    }

    const Relationship rel = s % 2 == 0 ? Relationship::Friend : Relationship::Stranger;
    for (int t = 0; t < T; ++t) {
      Clause clause;
      const int len = spec.min_words +
                      static_cast<int>(rng.below(
                          static_cast<std::uint64_t>(spec.max_words - spec.min_words + 1)));
      for (int k = 0; k < len; ++k)
        clause.words.push_back(fillers[rng.below(fillers.size())]);
      if (roles[t] == Role::Direct)
        clause.words[rng.below(clause.words.size())] = kDirectToken;
      else if (roles[t] == Role::CueFirst || roles[t] == Role::CueSecond)
        clause.words[rng.below(clause.words.size())] = kSetupToken;
      // Target clauses stay marker-free: nothing inside them separates them
      // from an ordinary filler clause.

      clause.meta.relationship = rel;
      clause.meta.head_nod = rng.uniform() < 0.3;
      clause.meta.smile = rng.uniform() < 0.25;
      clause.meta.gaze_partner = rng.uniform() < 0.5;
      dialog.clauses.push_back(std::move(clause));
    }

    for (int t = 0; t < T; ++t) {
      const int label = planted_rule_label(dialog, static_cast<size_t>(t));
      if (label != planned[t])
        throw RuntimeFailure("synth: scheduled labels diverge from the rule");
      dialog.clauses[t].label = label;
    }

    const SplitName split = s < spec.train_sessions ? SplitName::Train
                            : s < spec.train_sessions + spec.cv_sessions
                                ? SplitName::Cv
                                : SplitName::Test;
    out.assignment[dialog.session_id] = split;
    out.dialogs.push_back(std::move(dialog));
  }

  out.lexicon = Lexicon({{"setup", {kSetupToken}},
                         {"smalltalk", {"w0*"}},
                         {"trigger", {kDirectToken}}});

  std::ostringstream rule;
  rule << "Synthetic planted-context corpus\n"
       << "================================\n\n"
       << "Sessions: " << spec.train_sessions << " train / " << spec.cv_sessions
       << " cv / " << spec.test_sessions << " test, " << spec.clauses_per_session
       << " clauses each. Seed " << spec.seed << ".\n\n"
       << "Labeling rule (depth " << spec.context_depth << "):\n"
       << "  label[t] = 1  iff  \"" << kDirectToken << "\" appears in clause t,\n"
       << "                or   \"" << kSetupToken
       << "\" appears in both clause t-1 and clause t-2.\n\n"
       << "Contextual positives carry no marker in their own clause, so any\n"
       << "model limited to per-clause features can recall at most the direct\n"
       << "half of the positives (expected ceiling F1 = 2/3). Scoring the rule\n"
       << "itself against the labels gives F1 = 1.\n\n"
       << "Target positive rate: " << spec.positive_rate
       << " (direct and contextual positives in equal expected shares).\n";
  out.rule_description = rule.str();
  return out;
}

SynthPaths write_synth_corpus(const SynthOutput& output, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);

  SynthPaths paths;
  paths.corpus = out_dir + "/corpus.jsonl";
  paths.splits = out_dir + "/splits.json";
  paths.lexicon = out_dir + "/lexicon.json";
  paths.rule = out_dir + "/rule.txt";

  save_corpus(output.dialogs, paths.corpus);

  nlohmann::ordered_json splits;
  for (const auto& [sid, split] : output.assignment)
    splits[sid] = to_string(split);
  std::ofstream sf(paths.splits, std::ios::trunc);
  if (!sf) throw IoError("cannot write " + paths.splits);
  sf << splits.dump(2) << "\n";

  std::ofstream lf(paths.lexicon, std::ios::trunc);
  if (!lf) throw IoError("cannot write " + paths.lexicon);
  lf << output.lexicon.to_json_string();

  std::ofstream rf(paths.rule, std::ios::trunc);
  if (!rf) throw IoError("cannot write " + paths.rule);
  rf << output.rule_description;
  return paths;
}

}  // namespace normseq
