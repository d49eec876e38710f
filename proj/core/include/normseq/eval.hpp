#pragma once

#include <string>
#include <vector>

namespace normseq {

struct Confusion {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;

  long total() const { return tp + fp + fn + tn; }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const Confusion&) const = default;
};

// Positive class is label 1. Throws on length mismatch.
Confusion confusion(const std::vector<int>& preds, const std::vector<int>& golds);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R), with every 0/0 defined as 0.
Prf precision_recall_f1(const Confusion& c);

// 2PR/(P+R) straight from the rates, for checking reported metric rows whose
// precision/recall are only known rounded.
double f_measure(double precision, double recall);

// Two-coder, complete-data, nominal-metric Krippendorff alpha. Throws if the
// lists differ in length, have fewer than 2 units, or hold a single distinct
// value (expected disagreement zero).
double krippendorff_alpha_nominal(const std::vector<int>& coder_a,
                                  const std::vector<int>& coder_b);

struct SessionMetrics {
  std::string session;
  Confusion confusion;
  Prf prf;
};

struct MetricsReport {
  std::string model;
  std::string split;
  Prf prf;
  Confusion confusion;
  double base_rate = 0.0;  // share of gold-positive clauses
  std::vector<SessionMetrics> sessions;
};

// Stable-key-order JSON rendering of a report.
std::string report_to_json(const MetricsReport& report);

}  // namespace normseq
