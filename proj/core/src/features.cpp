#include "normseq/features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "normseq/errors.hpp"
#include "normseq/hashing.hpp"

using nlohmann::json;

namespace normseq {

std::string_view template_name(FeatureTemplate t) {
  switch (t) {
    case FeatureTemplate::LexiconCategory: return "lexicon_category";
    case FeatureTemplate::WordBigram: return "word_bigram";
    case FeatureTemplate::PosBigram: return "pos_bigram";
    case FeatureTemplate::WordPosPair: return "word_pos_pair";
    case FeatureTemplate::Visual: return "visual";
    case FeatureTemplate::Relationship: return "relationship";
  }
  return "?";
}

FeatureTemplate template_from_string(const std::string& s) {
  for (FeatureTemplate t : {FeatureTemplate::LexiconCategory, FeatureTemplate::WordBigram,
                            FeatureTemplate::PosBigram, FeatureTemplate::WordPosPair,
                            FeatureTemplate::Visual, FeatureTemplate::Relationship}) {
    if (template_name(t) == s) return t;
  }
  throw ValidationError("unknown feature template \"" + s + "\"");
}

std::string FeatureKey::canonical() const {
  std::string out(template_name(tmpl));
  out += ':';
  out += payload;
  return out;
}

double SparseVector::dot(const std::vector<double>& dense) const {
  double sum = 0.0;
  for (const auto& [col, v] : entries) sum += dense[static_cast<std::size_t>(col)] * v;
  return sum;
}

namespace {

const std::unordered_map<std::string, std::string>& closed_class_table() {
  static const std::unordered_map<std::string, std::string> table = [] {
    std::unordered_map<std::string, std::string> t;
    auto add = [&t](std::initializer_list<const char*> words, const char* tag) {
      for (const char* w : words) t.emplace(w, tag);
    };
    add({"i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us",
         "them", "my", "your", "his", "its", "our", "their", "mine", "yours",
         "hers", "ours", "theirs", "myself", "yourself", "himself", "herself",
         "itself", "ourselves", "yourselves", "themselves", "this", "that",
         "these", "those", "who", "whom", "whose", "what", "which", "someone",
         "something", "anyone", "anything", "everyone", "everything", "nothing",
         "nobody"},
        "PRON");
    add({"a", "an", "the", "some", "any", "no", "every", "each", "either",
         "neither", "both", "all", "most", "many", "much", "few", "several",
         "enough"},
        "DET");
    add({"in", "on", "at", "by", "for", "with", "about", "against", "between",
         "into", "through", "during", "before", "after", "above", "below", "to",
         "from", "up", "down", "of", "off", "over", "under", "near", "without",
         "within", "among", "around", "behind", "beside", "beyond", "inside",
         "outside", "upon", "toward", "towards"},
        "PREP");
    add({"and", "or", "but", "nor", "so", "yet", "because", "although", "though",
         "while", "if", "unless", "until", "whereas", "since", "as", "than",
         "whether", "when"},
        "CONJ");
    add({"am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
         "had", "having", "do", "does", "did", "doing", "can", "could", "will",
         "would", "shall", "should", "may", "might", "must", "go", "goes",
         "went", "gone", "get", "gets", "got", "know", "knows", "knew", "think",
         "thinks", "thought", "say", "says", "said", "see", "saw", "seen",
         "want", "wants", "wanted", "like", "likes", "liked", "need", "needs",
         "make", "makes", "made", "let", "look", "looks", "looked", "come",
         "comes", "came", "take", "takes", "took"},
        "VERB");
    add({"not", "very", "too", "also", "just", "now", "then", "here", "there",
         "always", "never", "often", "sometimes", "really", "quite", "soon",
         "already", "still", "again", "maybe", "perhaps", "together", "well"},
        "ADV");
    add({"good", "bad", "big", "small", "right", "wrong", "sure", "okay",
         "nice", "hard", "easy", "new", "old", "same", "different", "little"},
        "ADJ");
    add({"one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
         "ten", "zero", "hundred", "thousand"},
        "NUM");
    return t;
  }();
  return table;
}

bool all_digits(const std::string& w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

bool all_punct(const std::string& w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) {
    return std::ispunct(c) != 0;
  });
}

bool ends_with(const std::string& w, std::string_view suffix) {
  return w.size() > suffix.size() &&
         w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<std::string> pos_tag_fallback(const std::vector<std::string>& words) {
  std::vector<std::string> tags;
  tags.reserve(words.size());
  const auto& table = closed_class_table();
  for (const auto& w : words) {
    if (auto it = table.find(w); it != table.end()) {
      tags.push_back(it->second);
      continue;
    }
    if (all_digits(w)) {
      tags.push_back("NUM");
    } else if (all_punct(w)) {
      tags.push_back("PUNCT");
    } else if (ends_with(w, "ly")) {
      tags.push_back("ADV");
    } else if (ends_with(w, "ing") || ends_with(w, "ed")) {
      tags.push_back("VERB");
    } else {
      tags.push_back("NOUN");
    }
  }
  return tags;
}

std::vector<FeatureKey> extract_feature_keys(const Clause& clause, const Lexicon& lexicon) {
  std::vector<FeatureKey> keys;
  const std::vector<std::string>& words = clause.words;
  const std::vector<std::string> tags =
      clause.pos_tags ? *clause.pos_tags : pos_tag_fallback(words);

  for (const auto& w : words) {
    for (const auto& cat : lexicon.match(w))
      keys.push_back({FeatureTemplate::LexiconCategory, cat});
  }
  for (std::size_t i = 0; i + 1 < words.size(); ++i)
    keys.push_back({FeatureTemplate::WordBigram, words[i] + "|" + words[i + 1]});
  for (std::size_t i = 0; i + 1 < tags.size(); ++i)
    keys.push_back({FeatureTemplate::PosBigram, tags[i] + "|" + tags[i + 1]});
  for (std::size_t i = 0; i < words.size(); ++i)
    keys.push_back({FeatureTemplate::WordPosPair, words[i] + "|" + tags[i]});
  if (clause.meta.head_nod) keys.push_back({FeatureTemplate::Visual, "head_nod"});
  if (clause.meta.smile) keys.push_back({FeatureTemplate::Visual, "smile"});
  if (clause.meta.gaze_partner) keys.push_back({FeatureTemplate::Visual, "gaze_partner"});
  keys.push_back({FeatureTemplate::Relationship, to_string(clause.meta.relationship)});
  return keys;
}

std::optional<int> FeatureSpace::lookup(const FeatureKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureSpace build_feature_space(const std::vector<Dialog>& train_dialogs,
                                 const Lexicon& lexicon, int rare_threshold) {
  if (train_dialogs.empty())
    throw ValidationError("cannot build a feature space from an empty training set");
  if (rare_threshold < 1) throw ValidationError("rare_threshold must be >= 1");

  std::map<FeatureKey, std::int64_t> counts;
  for (const auto& d : train_dialogs) {
    for (const auto& c : d.clauses) {
      for (auto& k : extract_feature_keys(c, lexicon)) counts[std::move(k)] += 1;
    }
  }

  FeatureSpace space;
  space.rare_threshold_ = rare_threshold;
  for (auto& [key, count] : counts) {
    if (count < rare_threshold) continue;
    int column = static_cast<int>(space.entries_.size());
    space.index_.emplace(key, column);
    space.entries_.push_back({key, column, count});
  }
  if (space.entries_.empty())
    throw ValidationError("feature space is empty: rare_threshold " +
                          std::to_string(rare_threshold) +
                          " prunes every key in this corpus");
  return space;
}

SparseVector vectorize(const Clause& clause, const FeatureSpace& space,
                       const Lexicon& lexicon, const VectorizeOptions& opts) {
  std::map<int, double> acc;
  for (const auto& key : extract_feature_keys(clause, lexicon)) {
    if (auto col = space.lookup(key)) acc[*col] += 1.0;
  }
  SparseVector v;
  v.dim = space.dim();
  v.entries.reserve(acc.size());
  for (const auto& [col, count] : acc)
    v.entries.emplace_back(col, opts.binary ? 1.0 : count);
  return v;
}

std::array<double, 4> encode_meta(const Clause& clause) {
  return {clause.meta.relationship == Relationship::Friend ? 1.0 : 0.0,
          clause.meta.head_nod ? 1.0 : 0.0,
          clause.meta.smile ? 1.0 : 0.0,
          clause.meta.gaze_partner ? 1.0 : 0.0};
}

std::string FeatureSpace::to_json_string() const {
  json entries = json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"template", std::string(template_name(e.key.tmpl))},
                       {"payload", e.key.payload},
                       {"column", e.column},
                       {"count", e.count}});
  }
  json j;
  j["rare_threshold"] = rare_threshold_;
  j["dim"] = dim();
  j["entries"] = std::move(entries);
  return j.dump();
}

FeatureSpace FeatureSpace::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("feature space: ") + e.what());
  }
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    throw ValidationError("feature space JSON must carry an \"entries\" array");
  FeatureSpace space;
  space.rare_threshold_ = j.value("rare_threshold", 0);
  int declared_dim = j.value("dim", -1);
  for (const auto& e : j["entries"]) {
    Entry entry;
    entry.key.tmpl = template_from_string(e.at("template").get<std::string>());
    entry.key.payload = e.at("payload").get<std::string>();
    entry.column = e.at("column").get<int>();
    entry.count = e.at("count").get<std::int64_t>();
    if (entry.column != static_cast<int>(space.entries_.size()))
      throw ValidationError("feature space columns must be contiguous from 0");
    if (!space.index_.emplace(entry.key, entry.column).second)
      throw ValidationError("duplicate feature key " + entry.key.canonical());
    space.entries_.push_back(std::move(entry));
  }
  if (declared_dim >= 0 && declared_dim != space.dim())
    throw ValidationError("feature space dim field disagrees with entry count");
  return space;
}

void FeatureSpace::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature space: " + path);
  out << to_json_string();
  if (!out) throw IoError("write failed: " + path);
}

FeatureSpace FeatureSpace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature space: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

std::uint64_t FeatureSpace::hash() const { return fnv1a64(to_json_string()); }

std::map<std::string, std::int64_t> FeatureSpace::per_template_counts() const {
  std::map<std::string, std::int64_t> out;
  for (const auto& e : entries_) out[std::string(template_name(e.key.tmpl))] += 1;
  return out;
}

}  // namespace normseq
