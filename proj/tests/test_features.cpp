#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "normseq/errors.hpp"
#include "normseq/features.hpp"
#include "normseq/lexicon.hpp"

using namespace normseq;

namespace {

Clause make_clause(std::vector<std::string> words,
                   std::optional<std::vector<std::string>> tags = std::nullopt) {
  Clause c;
  c.words = std::move(words);
  c.pos_tags = std::move(tags);
  return c;
}

Dialog one_clause_dialog(const std::string& sid, Clause c) {
  Dialog d;
  d.session_id = sid;
  d.clauses.push_back(std::move(c));
  return d;
}

std::multiset<std::string> canonical_multiset(const Clause& c, const Lexicon& lex) {
  std::multiset<std::string> out;
  for (const auto& k : extract_feature_keys(c, lex)) out.insert(k.canonical());
  return out;
}

// Independent recount of one clause against a frozen space: walk the clause's
// keys as canonical strings and tally only those the space indexes.
std::map<int, double> brute_force_counts(const Clause& c, const FeatureSpace& space,
                                         const Lexicon& lex) {
  std::map<std::string, int> by_name;
  for (const auto& k : extract_feature_keys(c, lex)) by_name[k.canonical()] += 1;
  std::map<int, double> dense;
  for (const auto& e : space.entries()) {
    auto it = by_name.find(e.key.canonical());
    if (it != by_name.end()) dense[e.column] = static_cast<double>(it->second);
  }
  return dense;
}

// Random corpus over a tiny vocabulary so that key counts straddle any
// reasonable rare threshold.
std::vector<Dialog> random_corpus(std::uint64_t seed, int n_dialogs, int max_clauses) {
  std::mt19937_64 eng(seed);
  std::vector<std::string> vocab = {"aa", "bb", "cc", "dd", "ee", "ff", "gg", "hate", "sucks"};
  std::uniform_int_distribution<int> pick_word(0, static_cast<int>(vocab.size()) - 1);
  std::uniform_int_distribution<int> pick_len(1, 5);
  std::uniform_int_distribution<int> pick_clauses(1, max_clauses);
  std::uniform_int_distribution<int> coin(0, 1);

  std::vector<Dialog> dialogs;
  for (int d = 0; d < n_dialogs; ++d) {
    Dialog dlg;
    dlg.session_id = "s" + std::to_string(d);
    int n = pick_clauses(eng);
    for (int i = 0; i < n; ++i) {
      Clause c;
      int len = pick_len(eng);
      for (int w = 0; w < len; ++w) c.words.push_back(vocab[pick_word(eng)]);
      c.meta.relationship = coin(eng) ? Relationship::Friend : Relationship::Stranger;
      c.meta.head_nod = coin(eng) != 0;
      c.meta.smile = coin(eng) != 0;
      c.meta.gaze_partner = coin(eng) != 0;
      dlg.clauses.push_back(std::move(c));
    }
    dialogs.push_back(std::move(dlg));
  }
  return dialogs;
}

Lexicon test_lexicon() {
  return Lexicon({{"negemo", {"hate", "suck*"}}, {"social", {"aa", "bb"}}});
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/normseq_feat_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("fallback tagger covers the closed classes, suffixes and defaults") {
  CHECK(pos_tag_fallback({"you"}) == std::vector<std::string>{"PRON"});
  CHECK(pos_tag_fallback({"quickly"}) == std::vector<std::string>{"ADV"});
  CHECK(pos_tag_fallback({"flibbertigibbet"}) == std::vector<std::string>{"NOUN"});
  CHECK(pos_tag_fallback({"the"}) == std::vector<std::string>{"DET"});
  CHECK(pos_tag_fallback({"with"}) == std::vector<std::string>{"PREP"});
  CHECK(pos_tag_fallback({"because"}) == std::vector<std::string>{"CONJ"});
  CHECK(pos_tag_fallback({"was"}) == std::vector<std::string>{"VERB"});
  CHECK(pos_tag_fallback({"good"}) == std::vector<std::string>{"ADJ"});
  CHECK(pos_tag_fallback({"42"}) == std::vector<std::string>{"NUM"});
  CHECK(pos_tag_fallback({"?!"}) == std::vector<std::string>{"PUNCT"});
  CHECK(pos_tag_fallback({"running"}) == std::vector<std::string>{"VERB"});
  CHECK(pos_tag_fallback({"walked"}) == std::vector<std::string>{"VERB"});
  // Suffix rules need a proper stem: the bare suffix is not its own match.
  CHECK(pos_tag_fallback({"ly"}) == std::vector<std::string>{"NOUN"});
  CHECK(pos_tag_fallback({"ed"}) == std::vector<std::string>{"NOUN"});
  // Closed-class table wins over suffixes ("being" is a verb by table, and
  // "really" resolves through the ADV table entry as well as the suffix).
  CHECK(pos_tag_fallback({"being"}) == std::vector<std::string>{"VERB"});
  const auto many = pos_tag_fallback({"you", "were", "running", "3", "miles"});
  CHECK(many == std::vector<std::string>{"PRON", "VERB", "VERB", "NUM", "NOUN"});
}

TEST_CASE("feature extraction unrolls a two-word clause exactly") {
  Clause c = make_clause({"you", "suck"}, std::vector<std::string>{"PRON", "VERB"});
  c.meta.relationship = Relationship::Stranger;
  auto got = canonical_multiset(c, Lexicon());
  std::multiset<std::string> want = {
      "word_bigram:you|suck",
      "pos_bigram:PRON|VERB",
      "word_pos_pair:you|PRON",
      "word_pos_pair:suck|VERB",
      "relationship:stranger",
  };
  CHECK(got == want);
}

TEST_CASE("single-word clauses produce no bigrams") {
  Clause c = make_clause({"hello"});
  auto keys = extract_feature_keys(c, Lexicon());
  for (const auto& k : keys) {
    CHECK(k.tmpl != FeatureTemplate::WordBigram);
    CHECK(k.tmpl != FeatureTemplate::PosBigram);
  }
  // word_pos_pair + relationship are still present.
  CHECK(keys.size() == 2);
}

TEST_CASE("lexicon prefix patterns fire once per category per token") {
  Lexicon lex({{"negemo", {"hate", "suck*"}}});
  Clause c = make_clause({"you", "suck"}, std::vector<std::string>{"PRON", "VERB"});
  auto got = canonical_multiset(c, lex);
  CHECK(got.count("lexicon_category:negemo") == 1);

  // Two matching tokens -> two occurrences; literal pattern does not match
  // an extension of itself.
  Clause c2 = make_clause({"suck", "sucks", "hateful"});
  auto got2 = canonical_multiset(c2, lex);
  CHECK(got2.count("lexicon_category:negemo") == 2);

  // One token matching two patterns of the same category still counts once.
  Lexicon lex3({{"negemo", {"suck*", "sucks"}}});
  auto got3 = canonical_multiset(make_clause({"sucks"}), lex3);
  CHECK(got3.count("lexicon_category:negemo") == 1);
}

TEST_CASE("visual and relationship keys mirror the meta booleans") {
  Clause c = make_clause({"hi"});
  c.meta.relationship = Relationship::Friend;
  c.meta.head_nod = true;
  c.meta.smile = false;
  c.meta.gaze_partner = true;
  auto got = canonical_multiset(c, Lexicon());
  CHECK(got.count("visual:head_nod") == 1);
  CHECK(got.count("visual:smile") == 0);
  CHECK(got.count("visual:gaze_partner") == 1);
  CHECK(got.count("relationship:friend") == 1);
  CHECK(got.count("relationship:stranger") == 0);
}

TEST_CASE("tagger fallback engages only when the clause lacks pos tags") {
  Clause with = make_clause({"zorp"}, std::vector<std::string>{"VERB"});
  Clause without = make_clause({"zorp"});
  auto a = canonical_multiset(with, Lexicon());
  auto b = canonical_multiset(without, Lexicon());
  CHECK(a.count("word_pos_pair:zorp|VERB") == 1);
  CHECK(b.count("word_pos_pair:zorp|NOUN") == 1);
}

TEST_CASE("rare threshold keeps a count of 20 and drops a count of 19") {
  std::vector<Dialog> dialogs;
  Dialog d;
  d.session_id = "s0";
  for (int i = 0; i < 20; ++i) d.clauses.push_back(make_clause({"aaa"}));
  for (int i = 0; i < 19; ++i) d.clauses.push_back(make_clause({"bbb"}));
  dialogs.push_back(std::move(d));

  FeatureSpace space = build_feature_space(dialogs, Lexicon(), 20);
  CHECK(space.dim() == 2);  // relationship:stranger (39) + word_pos_pair:aaa|NOUN (20)
  CHECK(space.lookup({FeatureTemplate::WordPosPair, "aaa|NOUN"}).has_value());
  CHECK_FALSE(space.lookup({FeatureTemplate::WordPosPair, "bbb|NOUN"}).has_value());
  CHECK(space.lookup({FeatureTemplate::Relationship, "stranger"}).has_value());

  // Columns follow canonical order: "relationship:..." sorts before "word_pos_pair:...".
  CHECK(space.lookup({FeatureTemplate::Relationship, "stranger"}) == 0);
  CHECK(space.lookup({FeatureTemplate::WordPosPair, "aaa|NOUN"}) == 1);
}

TEST_CASE("threshold 1 on a one-clause corpus is exactly that clause's key set") {
  Clause c = make_clause({"aa", "bb", "aa"});
  c.meta.smile = true;
  std::vector<Dialog> dialogs = {one_clause_dialog("s0", c)};
  Lexicon lex = test_lexicon();

  FeatureSpace space = build_feature_space(dialogs, lex, 1);
  std::set<std::string> distinct;
  for (const auto& k : extract_feature_keys(c, lex)) distinct.insert(k.canonical());
  CHECK(space.dim() == static_cast<int>(distinct.size()));
  for (const auto& name : distinct) {
    bool found = false;
    for (const auto& e : space.entries())
      if (e.key.canonical() == name) found = true;
    CHECK(found);
  }
}

TEST_CASE("space dimension matches a flat-scan count oracle") {
  Lexicon lex = test_lexicon();
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    auto dialogs = random_corpus(seed, 12, 8);
    for (int threshold : {1, 2, 3, 5, 8}) {
      // Oracle: count canonical strings with a flat scan, keep >= threshold.
      std::map<std::string, std::int64_t> counts;
      for (const auto& d : dialogs)
        for (const auto& c : d.clauses)
          for (const auto& k : extract_feature_keys(c, lex)) counts[k.canonical()] += 1;
      std::vector<std::string> kept;
      for (const auto& [name, n] : counts)
        if (n >= threshold) kept.push_back(name);
      std::sort(kept.begin(), kept.end());

      if (kept.empty()) {
        CHECK_THROWS_AS(build_feature_space(dialogs, lex, threshold), ValidationError);
        continue;
      }
      FeatureSpace space = build_feature_space(dialogs, lex, threshold);
      REQUIRE(space.dim() == static_cast<int>(kept.size()));
      for (int i = 0; i < space.dim(); ++i) {
        const auto& e = space.entries()[static_cast<std::size_t>(i)];
        CHECK(e.column == i);
        CHECK(e.key.canonical() == kept[static_cast<std::size_t>(i)]);
        CHECK(e.count == counts[kept[static_cast<std::size_t>(i)]]);
      }
    }
  }
}

TEST_CASE("column ids are dense and canonical order is strictly increasing") {
  auto dialogs = random_corpus(7, 10, 6);
  FeatureSpace space = build_feature_space(dialogs, test_lexicon(), 2);
  REQUIRE(space.dim() > 1);
  for (int i = 0; i < space.dim(); ++i)
    CHECK(space.entries()[static_cast<std::size_t>(i)].column == i);
  for (int i = 1; i < space.dim(); ++i) {
    CHECK(space.entries()[static_cast<std::size_t>(i - 1)].key.canonical() <
          space.entries()[static_cast<std::size_t>(i)].key.canonical());
  }
}

TEST_CASE("raising the rare threshold never increases the dimension") {
  auto dialogs = random_corpus(99, 15, 8);
  int prev = -1;
  for (int threshold = 1; threshold <= 40; ++threshold) {
    int dim = 0;
    try {
      dim = build_feature_space(dialogs, test_lexicon(), threshold).dim();
    } catch (const ValidationError&) {
      dim = 0;
    }
    if (prev >= 0) CHECK(dim <= prev);
    prev = dim;
  }
}

TEST_CASE("identical inputs build identical spaces") {
  auto dialogs = random_corpus(5, 10, 6);
  FeatureSpace a = build_feature_space(dialogs, test_lexicon(), 2);
  FeatureSpace b = build_feature_space(dialogs, test_lexicon(), 2);
  CHECK(a.to_json_string() == b.to_json_string());
  CHECK(a.hash() == b.hash());
}

TEST_CASE("build_feature_space rejects bad inputs") {
  CHECK_THROWS_AS(build_feature_space({}, Lexicon(), 20), ValidationError);
  std::vector<Dialog> tiny = {one_clause_dialog("s0", make_clause({"aa"}))};
  CHECK_THROWS_AS(build_feature_space(tiny, Lexicon(), 1000), ValidationError);
  CHECK_THROWS_AS(build_feature_space(tiny, Lexicon(), 0), ValidationError);
}

TEST_CASE("vectorize counts occurrences and binary mode collapses them") {
  // "ha ha ha" has the bigram ha|ha twice.
  Clause c = make_clause({"ha", "ha", "ha"});
  std::vector<Dialog> dialogs = {one_clause_dialog("s0", c)};
  FeatureSpace space = build_feature_space(dialogs, Lexicon(), 1);

  SparseVector counts = vectorize(c, space, Lexicon());
  auto col = space.lookup({FeatureTemplate::WordBigram, "ha|ha"});
  REQUIRE(col.has_value());
  double got = 0.0;
  for (const auto& [column, v] : counts.entries)
    if (column == *col) got = v;
  CHECK(got == 2.0);

  VectorizeOptions binary;
  binary.binary = true;
  SparseVector ones = vectorize(c, space, Lexicon(), binary);
  for (const auto& [column, v] : ones.entries) CHECK(v == 1.0);
  CHECK(ones.entries.size() == counts.entries.size());
}

TEST_CASE("clauses with no indexed keys vectorize to an empty vector of full dim") {
  std::vector<Dialog> dialogs = {one_clause_dialog("s0", make_clause({"aa", "bb"}))};
  FeatureSpace space = build_feature_space(dialogs, Lexicon(), 1);

  // one word means no bigrams; "quickly" tags ADV so even the word_pos key
  // differs, and the friend relationship was never indexed either
  Clause other = make_clause({"quickly"});
  other.meta.relationship = Relationship::Friend;
  SparseVector v = vectorize(other, space, Lexicon());
  CHECK(v.dim == space.dim());
  CHECK(v.entries.empty());
}

TEST_CASE("vectorize agrees with a naive per-clause recount on random corpora") {
  Lexicon lex = test_lexicon();
  auto dialogs = random_corpus(31, 12, 8);
  FeatureSpace space = build_feature_space(dialogs, lex, 2);

  auto probe = random_corpus(77, 6, 5);  // includes unseen combinations
  for (const auto& d : probe) {
    for (const auto& c : d.clauses) {
      SparseVector v = vectorize(c, space, lex);
      std::map<int, double> oracle = brute_force_counts(c, space, lex);
      REQUIRE(v.entries.size() == oracle.size());
      for (const auto& [column, value] : v.entries) {
        REQUIRE(oracle.count(column) == 1);
        CHECK(value == oracle[column]);
      }
    }
  }
}

TEST_CASE("vectorize output is sorted, unique and in range on random clauses") {
  Lexicon lex = test_lexicon();
  auto dialogs = random_corpus(13, 12, 8);
  FeatureSpace space = build_feature_space(dialogs, lex, 2);
  std::int64_t total_entries = 0;

  for (const auto& d : random_corpus(17, 8, 6)) {
    for (const auto& c : d.clauses) {
      SparseVector v = vectorize(c, space, lex);
      CHECK(v.dim == space.dim());
      int prev = -1;
      double mass = 0.0;
      for (const auto& [column, value] : v.entries) {
        CHECK(column > prev);
        CHECK(column < v.dim);
        CHECK(value > 0.0);
        prev = column;
        mass += value;
        ++total_entries;
      }
      CHECK(mass <= static_cast<double>(extract_feature_keys(c, lex).size()));
    }
  }
  CHECK(total_entries > 0);
}

TEST_CASE("meta vector layout is [friend, head_nod, smile, gaze_partner]") {
  Clause a = make_clause({"hi"});
  a.meta.relationship = Relationship::Friend;
  CHECK(encode_meta(a) == std::array<double, 4>{1, 0, 0, 0});

  Clause b = make_clause({"hi"});
  b.meta.relationship = Relationship::Stranger;
  b.meta.smile = true;
  CHECK(encode_meta(b) == std::array<double, 4>{0, 0, 1, 0});

  Clause c = make_clause({"hi"});
  c.meta.relationship = Relationship::Stranger;
  c.meta.head_nod = true;
  c.meta.smile = true;
  c.meta.gaze_partner = true;
  CHECK(encode_meta(c) == std::array<double, 4>{0, 1, 1, 1});
  CHECK(kMetaDim == 4);
}

TEST_CASE("feature space JSON round trip preserves every entry") {
  auto dialogs = random_corpus(41, 10, 6);
  FeatureSpace space = build_feature_space(dialogs, test_lexicon(), 2);
  FeatureSpace back = FeatureSpace::from_json_string(space.to_json_string());
  REQUIRE(back.dim() == space.dim());
  CHECK(back.rare_threshold() == space.rare_threshold());
  CHECK(back.hash() == space.hash());
  for (int i = 0; i < space.dim(); ++i) {
    const auto& a = space.entries()[static_cast<std::size_t>(i)];
    const auto& b = back.entries()[static_cast<std::size_t>(i)];
    CHECK(a.key == b.key);
    CHECK(a.column == b.column);
    CHECK(a.count == b.count);
  }
}

TEST_CASE("feature space file round trip and hash stability") {
  auto dialogs = random_corpus(43, 8, 5);
  FeatureSpace space = build_feature_space(dialogs, test_lexicon(), 2);
  TempFile f("space.json");
  space.save(f.path);
  FeatureSpace back = FeatureSpace::load(f.path);
  CHECK(back.hash() == space.hash());
  CHECK(back.to_json_string() == space.to_json_string());
}

TEST_CASE("malformed feature space JSON is rejected") {
  CHECK_THROWS_AS(FeatureSpace::from_json_string("{nope"), ValidationError);
  CHECK_THROWS_AS(FeatureSpace::from_json_string("[]"), ValidationError);
  // Non-contiguous columns.
  CHECK_THROWS_AS(FeatureSpace::from_json_string(
                      R"({"rare_threshold":1,"dim":1,"entries":[
                          {"template":"visual","payload":"smile","column":3,"count":5}]})"),
                  ValidationError);
  // Duplicate key.
  CHECK_THROWS_AS(FeatureSpace::from_json_string(
                      R"({"rare_threshold":1,"dim":2,"entries":[
                          {"template":"visual","payload":"smile","column":0,"count":5},
                          {"template":"visual","payload":"smile","column":1,"count":5}]})"),
                  ValidationError);
  // Declared dim disagrees with the entry list.
  CHECK_THROWS_AS(FeatureSpace::from_json_string(
                      R"({"rare_threshold":1,"dim":7,"entries":[
                          {"template":"visual","payload":"smile","column":0,"count":5}]})"),
                  ValidationError);
  // Unknown template name.
  CHECK_THROWS_AS(FeatureSpace::from_json_string(
                      R"({"rare_threshold":1,"dim":1,"entries":[
                          {"template":"emoji","payload":"x","column":0,"count":5}]})"),
                  ValidationError);
}

TEST_CASE("per-template counts add up to the dimension") {
  auto dialogs = random_corpus(53, 10, 6);
  FeatureSpace space = build_feature_space(dialogs, test_lexicon(), 2);
  std::int64_t total = 0;
  for (const auto& [name, n] : space.per_template_counts()) {
    CHECK(n > 0);
    total += n;
  }
  CHECK(total == space.dim());
}

TEST_CASE("lexicon JSON round trip and validation") {
  Lexicon lex = test_lexicon();
  Lexicon back = Lexicon::from_json_string(lex.to_json_string());
  CHECK(back.to_json_string() == lex.to_json_string());
  CHECK(back.hash() == lex.hash());

  CHECK_THROWS_AS(Lexicon::from_json_string("[1,2]"), ValidationError);
  CHECK_THROWS_AS(Lexicon::from_json_string(R"({"cat":"nope"})"), ValidationError);
  CHECK_THROWS_AS(Lexicon::from_json_string(R"({"cat":[""]})"), ValidationError);
  CHECK_THROWS_AS(Lexicon::from_json_string(R"({"cat":["*"]})"), ValidationError);
  CHECK_THROWS_AS(Lexicon(std::vector<Lexicon::Category>{{"a", {"x"}}, {"a", {"y"}}}),
                  ValidationError);
}

TEST_CASE("sparse dot product multiplies counts into the dense vector") {
  Clause c = make_clause({"ha", "ha", "ha"});
  std::vector<Dialog> dialogs = {one_clause_dialog("s0", c)};
  FeatureSpace space = build_feature_space(dialogs, Lexicon(), 1);
  SparseVector v = vectorize(c, space, Lexicon());

  std::vector<double> weights(static_cast<std::size_t>(space.dim()), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = static_cast<double>(i + 1);
  double expect = 0.0;
  for (const auto& [column, value] : v.entries)
    expect += weights[static_cast<std::size_t>(column)] * value;
  CHECK(v.dot(weights) == doctest::Approx(expect).epsilon(1e-15));
}
