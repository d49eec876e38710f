#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "normseq/errors.hpp"
#include "normseq/eval.hpp"

using namespace normseq;

namespace {

// Independent O(n^2) alpha: pooled-value disagreement rates computed directly
// over ordered pairs, no coincidence matrix.
double alpha_brute_force(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> pooled;
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double n = static_cast<double>(pooled.size());

  double within_disagree = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u)
    if (a[u] != b[u]) within_disagree += 2.0;  // both ordered pairs of the unit
  const double observed = within_disagree / n;

  double cross_disagree = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = 0; j < pooled.size(); ++j)
      if (i != j && pooled[i] != pooled[j]) cross_disagree += 1.0;
  const double expected = cross_disagree / (n * (n - 1.0));

  return 1.0 - observed / expected;
}

}  // namespace

TEST_CASE("confusion counts the four cells") {
  Confusion c = confusion({1, 0, 1}, {1, 0, 1});
  CHECK(c.tp == 2);
  CHECK(c.tn == 1);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);

  Confusion d = confusion({1, 1}, {0, 0});
  CHECK(d.fp == 2);
  CHECK(d.total() == 2);
}

TEST_CASE("confusion rejects mismatched lengths") {
  CHECK_THROWS_AS(confusion({1, 0}, {1}), ValidationError);
}

TEST_CASE("confusion agrees with a flat recount over 1000 random pairs") {
  std::mt19937_64 eng(404);
  std::uniform_int_distribution<int> bit(0, 1);
  std::vector<int> preds(1000), golds(1000);
  for (int i = 0; i < 1000; ++i) {
    preds[static_cast<std::size_t>(i)] = bit(eng);
    golds[static_cast<std::size_t>(i)] = bit(eng);
  }
  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (int i = 0; i < 1000; ++i) {
    int p = preds[static_cast<std::size_t>(i)], g = golds[static_cast<std::size_t>(i)];
    tp += (p == 1 && g == 1);
    fp += (p == 1 && g == 0);
    fn += (p == 0 && g == 1);
    tn += (p == 0 && g == 0);
  }
  Confusion c = confusion(preds, golds);
  CHECK(c.tp == tp);
  CHECK(c.fp == fp);
  CHECK(c.fn == fn);
  CHECK(c.tn == tn);
  CHECK(c.total() == 1000);
}

TEST_CASE("confusion is invariant to shuffling the pair order") {
  std::mt19937_64 eng(7);
  std::uniform_int_distribution<int> bit(0, 1);
  std::vector<int> preds(200), golds(200);
  for (auto& p : preds) p = bit(eng);
  for (auto& g : golds) g = bit(eng);
  Confusion before = confusion(preds, golds);

  std::vector<std::size_t> order(200);
  for (std::size_t i = 0; i < 200; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), eng);
  std::vector<int> p2(200), g2(200);
  for (std::size_t i = 0; i < 200; ++i) {
    p2[i] = preds[order[i]];
    g2[i] = golds[order[i]];
  }
  CHECK(confusion(p2, g2) == before);
}

TEST_CASE("precision, recall and F1 follow the exact formulas") {
  std::mt19937_64 eng(11);
  std::uniform_int_distribution<long> cell(0, 50);
  for (int trial = 0; trial < 200; ++trial) {
    Confusion c{cell(eng), cell(eng), cell(eng), cell(eng)};
    Prf r = precision_recall_f1(c);
    double p = c.tp + c.fp > 0 ? double(c.tp) / double(c.tp + c.fp) : 0.0;
    double rec = c.tp + c.fn > 0 ? double(c.tp) / double(c.tp + c.fn) : 0.0;
    double f = p + rec > 0 ? 2.0 * p * rec / (p + rec) : 0.0;
    CHECK(r.precision == doctest::Approx(p).epsilon(1e-15));
    CHECK(r.recall == doctest::Approx(rec).epsilon(1e-15));
    CHECK(r.f1 == doctest::Approx(f).epsilon(1e-15));
    CHECK(r.precision >= 0.0);
    CHECK(r.precision <= 1.0);
    CHECK(r.recall >= 0.0);
    CHECK(r.recall <= 1.0);
    CHECK(r.f1 >= 0.0);
    CHECK(r.f1 <= 1.0);
  }
}

TEST_CASE("degenerate 0/0 cells resolve to zero") {
  Prf none = precision_recall_f1({0, 0, 0, 0});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  Prf miss = precision_recall_f1({0, 3, 4, 10});
  CHECK(miss.precision == 0.0);
  CHECK(miss.recall == 0.0);
  CHECK(miss.f1 == 0.0);

  // No predicted positives but the gold side has some: recall 0, precision 0/0 -> 0.
  Prf quiet = precision_recall_f1({0, 0, 5, 5});
  CHECK(quiet.precision == 0.0);
  CHECK(quiet.recall == 0.0);
  CHECK(quiet.f1 == 0.0);
}

TEST_CASE("f_measure reproduces rounded report rows from their P/R pairs") {
  // These four (P, R, F) triples are rounded to three decimals; the first,
  // second and fourth recompute to within half a thousandth.
  CHECK(std::abs(f_measure(0.573, 0.583) - 0.578) < 0.0005);
  CHECK(std::abs(f_measure(0.478, 0.747) - 0.583) < 0.0005);
  CHECK(std::abs(f_measure(0.690, 0.720) - 0.705) < 0.0005);

  // The third row's P/R pair recomputes to 0.69248, which rounds to 0.692,
  // not the printed 0.693. Pin the true arithmetic so any "fix" that forces
  // agreement would trip this test.
  CHECK(f_measure(0.689, 0.696) == doctest::Approx(0.959088 / 1.385).epsilon(1e-12));
  CHECK(std::abs(f_measure(0.689, 0.696) - 0.693) > 0.0005);
}

TEST_CASE("f_measure handles the zero boundary") {
  CHECK(f_measure(0.0, 0.0) == 0.0);
  CHECK(f_measure(1.0, 0.0) == 0.0);
  CHECK(f_measure(1.0, 1.0) == 1.0);
}

TEST_CASE("alpha is exactly 1 for identical mixed-value lists") {
  std::vector<int> labels = {0, 1, 0, 1, 1, 0, 2};
  CHECK(krippendorff_alpha_nominal(labels, labels) == 1.0);
}

TEST_CASE("alpha hand-verifiable case") {
  double a = krippendorff_alpha_nominal({0, 0, 1, 1}, {0, 0, 1, 0});
  // Do = 0.25, De = 30/56, alpha = 1 - 0.25*56/30 = 16/30.
  CHECK(a == doctest::Approx(16.0 / 30.0).epsilon(1e-12));
  CHECK(std::abs(a - 0.5333) < 0.0001);
}

TEST_CASE("alpha matches the brute-force pair formulation on random data") {
  std::mt19937_64 eng(2024);
  std::uniform_int_distribution<int> val(0, 2);
  std::uniform_int_distribution<int> len(2, 120);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    int n = len(eng);
    std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    for (auto& x : a) x = val(eng);
    for (auto& x : b) x = val(eng);
    bool constant = true;
    for (int i = 0; i < n && constant; ++i)
      constant = a[static_cast<std::size_t>(i)] == a[0] && b[static_cast<std::size_t>(i)] == a[0];
    if (constant) continue;
    double got = krippendorff_alpha_nominal(a, b);
    double want = alpha_brute_force(a, b);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got <= 1.0 + 1e-12);
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("alpha of a shuffled coder hovers near zero") {
  std::mt19937_64 eng(99);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> a(1000);
    for (auto& x : a) x = bit(eng);
    std::vector<int> b = a;
    std::shuffle(b.begin(), b.end(), eng);
    double alpha = krippendorff_alpha_nominal(a, b);
    CHECK(std::abs(alpha) < 0.1);
  }
}

TEST_CASE("alpha rejects degenerate inputs") {
  CHECK_THROWS_AS(krippendorff_alpha_nominal({0, 1}, {0}), ValidationError);
  CHECK_THROWS_AS(krippendorff_alpha_nominal({0}, {0}), ValidationError);
  CHECK_THROWS_AS(krippendorff_alpha_nominal({1, 1, 1}, {1, 1, 1}), ValidationError);
}

TEST_CASE("report JSON carries every field in a stable order") {
  MetricsReport report;
  report.model = "logreg";
  report.split = "test";
  report.confusion = {3, 1, 2, 10};
  report.prf = precision_recall_f1(report.confusion);
  report.base_rate = 5.0 / 16.0;
  SessionMetrics s;
  s.session = "s01";
  s.confusion = {3, 1, 2, 10};
  s.prf = report.prf;
  report.sessions.push_back(s);

  std::string text = report_to_json(report);
  CHECK(text.back() == '\n');
  auto j = nlohmann::json::parse(text);
  CHECK(j["model"] == "logreg");
  CHECK(j["split"] == "test");
  CHECK(j["precision"].get<double>() == doctest::Approx(0.75));
  CHECK(j["recall"].get<double>() == doctest::Approx(0.6));
  CHECK(j["f1"].get<double>() ==
        doctest::Approx(f_measure(0.75, 0.6)).epsilon(1e-12));
  CHECK(j["confusion"]["tp"] == 3);
  CHECK(j["confusion"]["fp"] == 1);
  CHECK(j["confusion"]["fn"] == 2);
  CHECK(j["confusion"]["tn"] == 10);
  CHECK(j["base_rate"].get<double>() == doctest::Approx(0.3125));
  REQUIRE(j["sessions"].size() == 1);
  CHECK(j["sessions"][0]["session"] == "s01");
  CHECK(j["sessions"][0]["confusion"]["tn"] == 10);

  // Key order is pinned: two renders are byte-identical.
  CHECK(report_to_json(report) == text);
}

TEST_CASE("confusion accumulation matches pooled counting") {
  std::mt19937_64 eng(5);
  std::uniform_int_distribution<int> bit(0, 1);
  std::vector<int> all_p, all_g;
  Confusion sum;
  for (int part = 0; part < 6; ++part) {
    std::vector<int> p(50), g(50);
    for (auto& x : p) x = bit(eng);
    for (auto& x : g) x = bit(eng);
    sum += confusion(p, g);
    all_p.insert(all_p.end(), p.begin(), p.end());
    all_g.insert(all_g.end(), g.begin(), g.end());
  }
  CHECK(sum == confusion(all_p, all_g));
}
