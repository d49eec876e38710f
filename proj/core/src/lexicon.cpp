#include "normseq/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "normseq/errors.hpp"
#include "normseq/hashing.hpp"

using nlohmann::json;

namespace normseq {

Lexicon::Lexicon(std::vector<Category> categories) : categories_(std::move(categories)) {
  std::sort(categories_.begin(), categories_.end(),
            [](const Category& a, const Category& b) { return a.name < b.name; });
  std::set<std::string> names;
  for (const auto& cat : categories_) {
    if (cat.name.empty()) throw ValidationError("lexicon category with empty name");
    if (!names.insert(cat.name).second)
      throw ValidationError("duplicate lexicon category \"" + cat.name + "\"");
    for (const auto& p : cat.patterns) {
      if (p.empty() || p == "*")
        throw ValidationError("empty pattern in lexicon category \"" + cat.name + "\"");
    }
  }
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

Lexicon Lexicon::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("lexicon: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("lexicon must be a JSON object");
  std::vector<Category> cats;
  for (const auto& [name, patterns] : j.items()) {
    if (!patterns.is_array())
      throw ValidationError("lexicon category \"" + name + "\" must map to an array");
    Category cat;
    cat.name = name;
    for (const auto& p : patterns) {
      if (!p.is_string())
        throw ValidationError("lexicon category \"" + name + "\" has a non-string pattern");
      cat.patterns.push_back(p.get<std::string>());
    }
    cats.push_back(std::move(cat));
  }
  return Lexicon(std::move(cats));
}

std::string Lexicon::to_json_string() const {
  json j = json::object();
  for (const auto& cat : categories_) j[cat.name] = cat.patterns;
  return j.dump();
}

std::vector<std::string> Lexicon::match(const std::string& token) const {
  std::vector<std::string> hits;
  for (const auto& cat : categories_) {
    for (const auto& p : cat.patterns) {
      bool ok = false;
      if (p.back() == '*') {
        std::string_view prefix(p.data(), p.size() - 1);
        ok = token.size() >= prefix.size() && token.compare(0, prefix.size(), prefix) == 0;
      } else {
        ok = token == p;
      }
      if (ok) {
        hits.push_back(cat.name);
        break;  // one hit per category per token occurrence
      }
    }
  }
  return hits;
}

std::uint64_t Lexicon::hash() const { return fnv1a64(to_json_string()); }

}  // namespace normseq
