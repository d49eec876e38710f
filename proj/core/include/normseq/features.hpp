#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "normseq/corpus.hpp"
#include "normseq/lexicon.hpp"

namespace normseq {

enum class FeatureTemplate {
  LexiconCategory,
  WordBigram,
  PosBigram,
  WordPosPair,
  Visual,
  Relationship,
};

std::string_view template_name(FeatureTemplate t);
FeatureTemplate template_from_string(const std::string& s);

// A feature identity: template plus normalized payload. Words are already
// lowercase; multi-part payloads are "|"-joined; POS tags stay uppercase.
struct FeatureKey {
  FeatureTemplate tmpl = FeatureTemplate::WordBigram;
  std::string payload;

  // Canonical text form, also the ordering used for column assignment.
  std::string canonical() const;

  friend bool operator==(const FeatureKey& a, const FeatureKey& b) {
    return a.tmpl == b.tmpl && a.payload == b.payload;
  }
  friend bool operator<(const FeatureKey& a, const FeatureKey& b) {
    int c = template_name(a.tmpl).compare(template_name(b.tmpl));
    if (c != 0) return c < 0;
    return a.payload < b.payload;
  }
};

struct SparseVector {
  int dim = 0;
  std::vector<std::pair<int, double>> entries;  // sorted by column, values > 0

  double dot(const std::vector<double>& dense) const;
};

// Coarse fallback tagger for corpora without POS annotation: closed-class
// table lookup, then suffix heuristics, default NOUN.
std::vector<std::string> pos_tag_fallback(const std::vector<std::string>& words);

// All feature-key occurrences of one clause (a multiset, returned flat).
std::vector<FeatureKey> extract_feature_keys(const Clause& clause, const Lexicon& lexicon);

// Frozen mapping from feature keys to dense column ids, built on training data
// with rare-threshold pruning. Columns are assigned in canonical key order.
class FeatureSpace {
 public:
  struct Entry {
    FeatureKey key;
    int column = 0;
    std::int64_t count = 0;
  };

  FeatureSpace() = default;

  int dim() const { return static_cast<int>(entries_.size()); }
  int rare_threshold() const { return rare_threshold_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::optional<int> lookup(const FeatureKey& key) const;

  std::string to_json_string() const;
  static FeatureSpace from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static FeatureSpace load(const std::string& path);

  // Fingerprint of the canonical JSON form; guards checkpoint/space pairing.
  std::uint64_t hash() const;

  // Occurrence counts per template over the retained keys.
  std::map<std::string, std::int64_t> per_template_counts() const;

  friend FeatureSpace build_feature_space(const std::vector<Dialog>& train_dialogs,
                                          const Lexicon& lexicon, int rare_threshold);

 private:
  int rare_threshold_ = 0;
  std::vector<Entry> entries_;       // column order
  std::map<FeatureKey, int> index_;  // key -> column
};

FeatureSpace build_feature_space(const std::vector<Dialog>& train_dialogs,
                                 const Lexicon& lexicon, int rare_threshold = 20);

struct VectorizeOptions {
  bool binary = false;  // presence 1.0 instead of occurrence counts
};

SparseVector vectorize(const Clause& clause, const FeatureSpace& space,
                       const Lexicon& lexicon, const VectorizeOptions& opts = {});

// Dense meta vector e_i: [relationship==friend, head_nod, smile, gaze_partner].
std::array<double, 4> encode_meta(const Clause& clause);

inline constexpr int kMetaDim = 4;

}  // namespace normseq
