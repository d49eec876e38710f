#include "normseq/models/predict.hpp"

#include <nlohmann/json.hpp>

#include "normseq/errors.hpp"

namespace normseq {

namespace {

const FeatureSpace& required_space(const Checkpoint& ckpt) {
  if (!ckpt.space)
    throw ValidationError("checkpoint carries no feature space");
  return *ckpt.space;
}

const Lexicon& required_lexicon(const Checkpoint& ckpt) {
  if (!ckpt.lexicon)
    throw ValidationError("checkpoint carries no lexicon");
  return *ckpt.lexicon;
}

}  // namespace

std::vector<Prediction> predict_dialog(const Checkpoint& ckpt, const Dialog& dialog) {
  std::vector<Prediction> out;
  out.reserve(dialog.clauses.size());

  if (const auto* lr = std::get_if<LogRegModel>(&ckpt.model)) {
    const auto& space = required_space(ckpt);
    const auto& lexicon = required_lexicon(ckpt);
    const VectorizeOptions opts{ckpt.train_config.binary_features};
    for (const auto& clause : dialog.clauses) {
      const double p = logreg_predict(*lr, vectorize(clause, space, lexicon, opts));
      out.push_back({p, label_from_probability(p, lr->threshold)});
    }
    return out;
  }

  if (const auto* lc = std::get_if<LocalContextModel>(&ckpt.model)) {
    for (const auto& clause : dialog.clauses) {
      const nn::Vec probs = local_forward(*lc, clause);
      out.push_back({probs(1), label_from_probability(probs(1))});
    }
    return out;
  }

  const auto& gc = std::get<GlobalContextModel>(ckpt.model);
  const auto& space = required_space(ckpt);
  const auto& lexicon = required_lexicon(ckpt);
  const VectorizeOptions opts{ckpt.train_config.binary_features};
  std::vector<SparseVector> vecs;
  vecs.reserve(dialog.clauses.size());
  for (const auto& clause : dialog.clauses)
    vecs.push_back(vectorize(clause, space, lexicon, opts));
  const auto probs = global_forward_dialog(gc, vecs);
  for (const auto& p : probs)
    out.push_back({p(1), label_from_probability(p(1))});
  return out;
}

std::string predictions_to_jsonl(const Dialog& dialog,
                                 const std::vector<Prediction>& preds) {
  if (preds.size() != dialog.clauses.size())
    throw RuntimeFailure("prediction count does not match clause count");
  std::string out;
  for (size_t t = 0; t < preds.size(); ++t) {
    nlohmann::ordered_json j;
    j["session"] = dialog.session_id;
    j["index"] = t;
    j["p_violation"] = preds[t].p_violation;
    j["label"] = preds[t].label;
    out += j.dump();
    out += '\n';
  }
  return out;
}

MetricsReport evaluate_model(const Checkpoint& ckpt,
                             const std::vector<Dialog>& dialogs,
                             const std::string& split_name) {
  MetricsReport report;
  report.model = to_string(ckpt.kind);
  report.split = split_name;

  long positives = 0;
  long total = 0;
  for (const auto& dialog : dialogs) {
    const auto preds = predict_dialog(ckpt, dialog);
    std::vector<int> pl, gl;
    pl.reserve(preds.size());
    gl.reserve(preds.size());
    for (size_t t = 0; t < preds.size(); ++t) {
      pl.push_back(preds[t].label);
      gl.push_back(dialog.clauses[t].label);
      positives += dialog.clauses[t].label == 1 ? 1 : 0;
    }
    total += static_cast<long>(preds.size());

    SessionMetrics sm;
    sm.session = dialog.session_id;
    sm.confusion = confusion(pl, gl);
    sm.prf = precision_recall_f1(sm.confusion);
    report.confusion += sm.confusion;
    report.sessions.push_back(std::move(sm));
  }
  report.prf = precision_recall_f1(report.confusion);
  report.base_rate =
      total > 0 ? static_cast<double>(positives) / static_cast<double>(total) : 0.0;
  return report;
}

}  // namespace normseq
