#include "normseq/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "normseq/errors.hpp"

using nlohmann::json;

namespace normseq {

std::string to_string(Relationship r) {
  return r == Relationship::Friend ? "friend" : "stranger";
}

std::string to_string(ViolationCategory c) {
  switch (c) {
    case ViolationCategory::RuleBreaking: return "rule_breaking";
    case ViolationCategory::FaceThreat: return "face_threat";
    case ViolationCategory::Reference: return "reference";
  }
  return "?";
}

Relationship relationship_from_string(const std::string& s) {
  if (s == "friend") return Relationship::Friend;
  if (s == "stranger") return Relationship::Stranger;
  throw ValidationError("relationship must be \"friend\" or \"stranger\", got \"" + s + "\"");
}

ViolationCategory category_from_string(const std::string& s) {
  if (s == "rule_breaking") return ViolationCategory::RuleBreaking;
  if (s == "face_threat") return ViolationCategory::FaceThreat;
  if (s == "reference") return ViolationCategory::Reference;
  throw ValidationError(
      "category must be one of rule_breaking|face_threat|reference, got \"" + s + "\"");
}

std::string to_string(SplitName s) {
  switch (s) {
    case SplitName::Train: return "train";
    case SplitName::Cv: return "cv";
    case SplitName::Test: return "test";
  }
  return "?";
}

SplitName split_name_from_string(const std::string& s) {
  if (s == "train") return SplitName::Train;
  if (s == "cv") return SplitName::Cv;
  if (s == "test") return SplitName::Test;
  throw ValidationError("split name must be train|cv|test, got \"" + s + "\"");
}

namespace {

std::string lowercase_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct ParsedRecord {
  std::string session;
  int index = 0;
  Clause clause;
};

ParsedRecord parse_record(const json& j) {
  if (!j.is_object()) throw ValidationError("record is not a JSON object");

  static const std::set<std::string> known = {
      "session", "index", "words", "pos", "relationship",
      "head_nod", "smile", "gaze_partner", "label", "category"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValidationError("unknown field \"" + key + "\"");
  }

  ParsedRecord rec;
  if (!j.contains("session") || !j["session"].is_string())
    throw ValidationError("missing or non-string \"session\"");
  rec.session = j["session"].get<std::string>();
  if (rec.session.empty()) throw ValidationError("empty \"session\"");

  if (!j.contains("index") || !j["index"].is_number_integer())
    throw ValidationError("missing or non-integer \"index\"");
  rec.index = j["index"].get<int>();
  if (rec.index < 0) throw ValidationError("negative \"index\"");

  if (!j.contains("words") || !j["words"].is_array() || j["words"].empty())
    throw ValidationError("\"words\" must be a non-empty array of strings");
  for (const auto& w : j["words"]) {
    if (!w.is_string() || w.get<std::string>().empty())
      throw ValidationError("\"words\" entries must be non-empty strings");
    rec.clause.words.push_back(lowercase_ascii(w.get<std::string>()));
  }

  if (j.contains("pos")) {
    if (!j["pos"].is_array())
      throw ValidationError("\"pos\" must be an array of strings");
    std::vector<std::string> tags;
    for (const auto& t : j["pos"]) {
      if (!t.is_string()) throw ValidationError("\"pos\" entries must be strings");
      tags.push_back(t.get<std::string>());
    }
    if (tags.size() != rec.clause.words.size())
      throw ValidationError("\"pos\" has " + std::to_string(tags.size()) +
                            " tags for " + std::to_string(rec.clause.words.size()) +
                            " words");
    rec.clause.pos_tags = std::move(tags);
  }

  if (!j.contains("relationship") || !j["relationship"].is_string())
    throw ValidationError("missing or non-string \"relationship\"");
  rec.clause.meta.relationship = relationship_from_string(j["relationship"].get<std::string>());

  for (const char* field : {"head_nod", "smile", "gaze_partner"}) {
    if (!j.contains(field) || !j[field].is_boolean())
      throw ValidationError(std::string("missing or non-boolean \"") + field + "\"");
  }
  rec.clause.meta.head_nod = j["head_nod"].get<bool>();
  rec.clause.meta.smile = j["smile"].get<bool>();
  rec.clause.meta.gaze_partner = j["gaze_partner"].get<bool>();

  if (!j.contains("label") || !j["label"].is_number_integer())
    throw ValidationError("missing or non-integer \"label\"");
  rec.clause.label = j["label"].get<int>();
  if (rec.clause.label != 0 && rec.clause.label != 1)
    throw ValidationError("\"label\" must be 0 or 1");

  if (j.contains("category")) {
    if (!j["category"].is_string())
      throw ValidationError("\"category\" must be a string");
    if (rec.clause.label != 1)
      throw ValidationError("\"category\" present on a record with label=0 (session \"" +
                            rec.session + "\", index " + std::to_string(rec.index) + ")");
    rec.clause.category = category_from_string(j["category"].get<std::string>());
  }
  return rec;
}

// Shared ingestion walk; `collect` decides between fail-fast and report-all.
CorpusValidation ingest(std::istream& in, const std::string& origin, bool collect) {
  CorpusValidation out;
  std::vector<std::string> session_order;
  std::map<std::string, std::vector<Clause>> session_clauses;
  std::map<std::string, int> last_index;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line, nullptr, true);
      ParsedRecord rec = parse_record(j);
      auto it = last_index.find(rec.session);
      if (it == last_index.end()) {
        if (rec.index != 0)
          throw ValidationError("first record of session \"" + rec.session +
                                "\" has index " + std::to_string(rec.index) +
                                ", expected 0");
        session_order.push_back(rec.session);
      } else if (rec.index <= it->second) {
        throw ValidationError("session \"" + rec.session + "\" index " +
                              std::to_string(rec.index) +
                              " does not increase past " + std::to_string(it->second));
      }
      last_index[rec.session] = rec.index;
      session_clauses[rec.session].push_back(std::move(rec.clause));
    } catch (const json::parse_error& e) {
      CorpusDiagnostic d{line_no, std::string("malformed JSON: ") + e.what()};
      if (!collect)
        throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + d.message);
      out.errors.push_back(std::move(d));
    } catch (const ValidationError& e) {
      CorpusDiagnostic d{line_no, e.what()};
      if (!collect)
        throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + d.message);
      out.errors.push_back(std::move(d));
    }
  }

  for (const auto& sid : session_order) {
    Dialog d;
    d.session_id = sid;
    d.clauses = std::move(session_clauses[sid]);
    out.dialogs.push_back(std::move(d));
  }
  return out;
}

}  // namespace

std::vector<Dialog> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  return ingest(in, path, /*collect=*/false).dialogs;
}

CorpusValidation validate_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  CorpusValidation v = ingest(in, path, /*collect=*/true);
  if (v.dialogs.empty() && v.errors.empty())
    v.errors.push_back({0, "no dialogs"});
  return v;
}

std::vector<Dialog> load_corpus_from_string(const std::string& jsonl,
                                            const std::string& origin) {
  std::istringstream in(jsonl);
  return ingest(in, origin, /*collect=*/false).dialogs;
}

std::string corpus_to_jsonl(const std::vector<Dialog>& dialogs) {
  std::string out;
  for (const auto& d : dialogs) {
    for (std::size_t i = 0; i < d.clauses.size(); ++i) {
      const Clause& c = d.clauses[i];
      json j;
      j["session"] = d.session_id;
      j["index"] = static_cast<int>(i);
      j["words"] = c.words;
      if (c.pos_tags) j["pos"] = *c.pos_tags;
      j["relationship"] = to_string(c.meta.relationship);
      j["head_nod"] = c.meta.head_nod;
      j["smile"] = c.meta.smile;
      j["gaze_partner"] = c.meta.gaze_partner;
      j["label"] = c.label;
      if (c.category) j["category"] = to_string(*c.category);
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

void save_corpus(const std::vector<Dialog>& dialogs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file: " + path);
  out << corpus_to_jsonl(dialogs);
  if (!out) throw IoError("write failed: " + path);
}

CorpusSplit split_corpus(const std::vector<Dialog>& dialogs,
                         const std::map<std::string, SplitName>& assignment) {
  CorpusSplit split;
  std::set<std::string> seen;
  for (const auto& d : dialogs) {
    if (!seen.insert(d.session_id).second)
      throw ValidationError("duplicate session_id \"" + d.session_id + "\"");
    auto it = assignment.find(d.session_id);
    if (it == assignment.end())
      throw ValidationError("session \"" + d.session_id + "\" missing from split assignment");
    switch (it->second) {
      case SplitName::Train: split.train.push_back(d); break;
      case SplitName::Cv: split.cv.push_back(d); break;
      case SplitName::Test: split.test.push_back(d); break;
    }
  }
  return split;
}

std::map<std::string, SplitName> load_split_assignment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open split assignment file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("split assignment " + path + ": " + e.what());
  }
  if (!j.is_object())
    throw ValidationError("split assignment must be a JSON object of session -> split");
  std::map<std::string, SplitName> out;
  for (const auto& [sid, v] : j.items()) {
    if (!v.is_string())
      throw ValidationError("split assignment for \"" + sid + "\" must be a string");
    out[sid] = split_name_from_string(v.get<std::string>());
  }
  return out;
}

namespace {

SplitCounts count_split(const std::vector<Dialog>& dialogs) {
  SplitCounts c;
  c.sessions = static_cast<std::int64_t>(dialogs.size());
  for (const auto& d : dialogs) {
    c.clauses += static_cast<std::int64_t>(d.clauses.size());
    for (const auto& cl : d.clauses) c.positives += cl.label;
  }
  return c;
}

}  // namespace

CorpusStats corpus_stats(const CorpusSplit& split) {
  CorpusStats s;
  s.train = count_split(split.train);
  s.cv = count_split(split.cv);
  s.test = count_split(split.test);
  if (s.train.sessions > 0) {
    double mean = static_cast<double>(s.train.clauses) / static_cast<double>(s.train.sessions);
    s.mean_train_clauses = std::round(mean * 10.0) / 10.0;
  }
  std::int64_t clauses = s.train.clauses + s.cv.clauses + s.test.clauses;
  std::int64_t positives = s.train.positives + s.cv.positives + s.test.positives;
  s.positive_rate = clauses > 0 ? static_cast<double>(positives) / static_cast<double>(clauses) : 0.0;
  return s;
}

std::string stats_to_json(const CorpusStats& stats) {
  auto split_json = [](const SplitCounts& c) {
    return json{{"sessions", c.sessions}, {"clauses", c.clauses}, {"positives", c.positives}};
  };
  json j;
  j["train"] = split_json(stats.train);
  j["cv"] = split_json(stats.cv);
  j["test"] = split_json(stats.test);
  if (stats.mean_train_clauses)
    j["mean_train_clauses"] = *stats.mean_train_clauses;
  else
    j["mean_train_clauses"] = nullptr;
  j["positive_rate"] = stats.positive_rate;
  return j.dump();
}

}  // namespace normseq
