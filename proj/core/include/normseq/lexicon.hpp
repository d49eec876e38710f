#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace normseq {

// Word-category lexicon standing in for LIWC-style dictionaries. Patterns are
// literal words or prefix patterns ending in "*" ("suck*" matches "sucks").
class Lexicon {
 public:
  struct Category {
    std::string name;
    std::vector<std::string> patterns;
  };

  Lexicon() = default;
  explicit Lexicon(std::vector<Category> categories);

  static Lexicon load(const std::string& path);
  static Lexicon from_json_string(const std::string& text);
  std::string to_json_string() const;

  // Names of every category with a pattern matching the token, in category order.
  std::vector<std::string> match(const std::string& token) const;

  const std::vector<Category>& categories() const { return categories_; }
  bool empty() const { return categories_.empty(); }
  std::uint64_t hash() const;

 private:
  std::vector<Category> categories_;  // sorted by name
};

}  // namespace normseq
