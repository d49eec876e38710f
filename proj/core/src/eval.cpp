#include "normseq/eval.hpp"

#include <map>

#include <nlohmann/json.hpp>

#include "normseq/errors.hpp"

namespace normseq {

Confusion confusion(const std::vector<int>& preds, const std::vector<int>& golds) {
  if (preds.size() != golds.size())
    throw ValidationError("confusion: preds and golds differ in length (" +
                          std::to_string(preds.size()) + " vs " +
                          std::to_string(golds.size()) + ")");
  Confusion c;
  for (size_t k = 0; k < preds.size(); ++k) {
    const bool p = preds[k] == 1;
    const bool g = golds[k] == 1;
    if (p && g)
      ++c.tp;
    else if (p && !g)
      ++c.fp;
    else if (!p && g)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

Prf precision_recall_f1(const Confusion& c) {
  Prf r;
  r.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
  r.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  r.f1 = f_measure(r.precision, r.recall);
  return r;
}

double f_measure(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

double krippendorff_alpha_nominal(const std::vector<int>& coder_a,
                                  const std::vector<int>& coder_b) {
  if (coder_a.size() != coder_b.size())
    throw ValidationError("alpha: coder lists differ in length");
  if (coder_a.size() < 2)
    throw ValidationError("alpha: need at least 2 units");

  // Dense value ids, then the coincidence matrix: each unit holds two values,
  // contributing one count per ordered pair of distinct rater positions.
  std::map<int, int> id;
  for (size_t u = 0; u < coder_a.size(); ++u) {
    id.emplace(coder_a[u], 0);
    id.emplace(coder_b[u], 0);
  }
  int next = 0;
  for (auto& [value, vid] : id) vid = next++;
  const int m = next;
  if (m < 2)
    throw ValidationError("alpha: all labels identical, agreement undefined");

  std::vector<double> coin(static_cast<size_t>(m) * m, 0.0);
  for (size_t u = 0; u < coder_a.size(); ++u) {
    const int va = id[coder_a[u]];
    const int vb = id[coder_b[u]];
    coin[static_cast<size_t>(va) * m + vb] += 1.0;
    coin[static_cast<size_t>(vb) * m + va] += 1.0;
  }

  const double n = 2.0 * static_cast<double>(coder_a.size());
  std::vector<double> margin(m, 0.0);
  double off_diag = 0.0;
  for (int v = 0; v < m; ++v)
    for (int w = 0; w < m; ++w) {
      margin[v] += coin[static_cast<size_t>(v) * m + w];
      if (v != w) off_diag += coin[static_cast<size_t>(v) * m + w];
    }

  const double observed = off_diag / n;
  double expected = 0.0;
  for (int v = 0; v < m; ++v)
    for (int w = 0; w < m; ++w)
      if (v != w) expected += margin[v] * margin[w];
  expected /= n * (n - 1.0);

  return 1.0 - observed / expected;
}

namespace {

nlohmann::ordered_json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

}  // namespace

std::string report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model;
  j["split"] = report.split;
  j["precision"] = report.prf.precision;
  j["recall"] = report.prf.recall;
  j["f1"] = report.prf.f1;
  j["confusion"] = confusion_json(report.confusion);
  j["base_rate"] = report.base_rate;
  j["sessions"] = nlohmann::ordered_json::array();
  for (const auto& s : report.sessions) {
    nlohmann::ordered_json row;
    row["session"] = s.session;
    row["precision"] = s.prf.precision;
    row["recall"] = s.prf.recall;
    row["f1"] = s.prf.f1;
    row["confusion"] = confusion_json(s.confusion);
    j["sessions"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

}  // namespace normseq
