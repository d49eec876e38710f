#include "normseq/models/logreg.hpp"

#include <cmath>
#include <numeric>

#include "normseq/errors.hpp"
#include "normseq/eval.hpp"
#include "normseq/log.hpp"
#include "normseq/nn/optim.hpp"
#include "normseq/nn/rng.hpp"

namespace normseq {

std::vector<LabeledVector> vectorize_dialogs(const std::vector<Dialog>& dialogs,
                                             const FeatureSpace& space,
                                             const Lexicon& lexicon,
                                             const VectorizeOptions& opts) {
  std::vector<LabeledVector> out;
  for (const auto& d : dialogs)
    for (const auto& c : d.clauses)
      out.push_back({vectorize(c, space, lexicon, opts), c.label});
  return out;
}

LogRegModel LogRegModel::zeros(int dim, double l2_lambda) {
  if (dim <= 0) throw ConfigError("logreg: dim must be positive");
  if (l2_lambda < 0.0) throw ConfigError("logreg: l2_lambda must be >= 0");
  LogRegModel m;
  m.w = nn::Vec::Zero(dim);
  m.dw = nn::Vec::Zero(dim);
  m.l2_lambda = l2_lambda;
  return m;
}

void LogRegModel::zero_grads() {
  dw.setZero();
  db = 0.0;
}

std::vector<nn::ParamRef> LogRegModel::params() {
  std::vector<nn::ParamRef> refs;
  refs.push_back(nn::param_ref("logreg.w", w, dw));
  refs.push_back({"logreg.b", &b, &db, 1, 1});
  return refs;
}

double logreg_predict(const LogRegModel& m, const SparseVector& f) {
  if (f.dim != m.dim())
    throw ValidationError("logreg: feature dim " + std::to_string(f.dim) +
                          " does not match model dim " + std::to_string(m.dim()));
  double z = m.b;
  for (const auto& [col, val] : f.entries) z += m.w(col) * val;
  return 1.0 / (1.0 + std::exp(-z));
}

namespace {

double clamped_log(double p) { return std::log(std::max(p, 1e-300)); }

}  // namespace

double logreg_loss(const LogRegModel& m, const std::vector<LabeledVector>& batch,
                   double pos_weight) {
  if (batch.empty()) throw ValidationError("logreg: empty batch");
  double ce = 0.0;
  for (const auto& ex : batch) {
    const double p = logreg_predict(m, ex.f);
    ce += ex.label == 1 ? -pos_weight * clamped_log(p) : -clamped_log(1.0 - p);
  }
  return ce / static_cast<double>(batch.size()) + m.l2_lambda * m.w.squaredNorm();
}

double logreg_loss_grad(LogRegModel& m, const std::vector<LabeledVector>& batch,
                        double pos_weight) {
  if (batch.empty()) throw ValidationError("logreg: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double ce = 0.0;
  for (const auto& ex : batch) {
    const double p = logreg_predict(m, ex.f);
    const double weight = ex.label == 1 ? pos_weight : 1.0;
    ce += ex.label == 1 ? -weight * clamped_log(p) : -clamped_log(1.0 - p);
    // d(weighted ce)/dz = weight * (p - y)
    const double dz = weight * (p - static_cast<double>(ex.label)) * inv_n;
    for (const auto& [col, val] : ex.f.entries) m.dw(col) += dz * val;
    m.db += dz;
  }
  m.dw += 2.0 * m.l2_lambda * m.w;
  return ce * inv_n + m.l2_lambda * m.w.squaredNorm();
}

LogRegTrainResult logreg_train(const std::vector<Dialog>& train_dialogs,
                               const std::vector<Dialog>& cv_dialogs,
                               const FeatureSpace& space, const Lexicon& lexicon,
                               const TrainConfig& config) {
  config.validate();
  const VectorizeOptions vopts{config.binary_features};
  const auto train = vectorize_dialogs(train_dialogs, space, lexicon, vopts);
  const auto cv = vectorize_dialogs(cv_dialogs, space, lexicon, vopts);
  if (train.empty()) throw ValidationError("logreg: empty training set");

  LogRegModel model = LogRegModel::zeros(space.dim(), config.l2_lambda);
  nn::Optimizer opt(optimizer_config(config));
  nn::Rng rng(config.seed);

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  LogRegTrainResult result;
  result.model = model;
  double best_f1 = -1.0;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    size_t seen = 0;
    std::vector<LabeledVector> batch;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      batch.clear();
      const size_t stop =
          std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      for (size_t k = start; k < stop; ++k) batch.push_back(train[order[k]]);
      model.zero_grads();
      const double loss = logreg_loss_grad(model, batch, config.pos_weight);
      auto refs = model.params();
      opt.step(refs);
      loss_sum += loss * static_cast<double>(batch.size());
      seen += batch.size();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    if (!cv.empty()) {
      std::vector<int> preds, golds;
      preds.reserve(cv.size());
      golds.reserve(cv.size());
      for (const auto& ex : cv) {
        preds.push_back(label_from_probability(logreg_predict(model, ex.f),
                                               model.threshold));
        golds.push_back(ex.label);
      }
      const Prf prf = precision_recall_f1(confusion(preds, golds));
      rec.cv_precision = prf.precision;
      rec.cv_recall = prf.recall;
      rec.cv_f1 = prf.f1;
      if (prf.f1 > best_f1) {
        best_f1 = prf.f1;
        best_epoch = epoch;
        rec.best = true;
        result.model = model;
      }
    } else if (epoch == config.epochs) {
      rec.best = true;
      best_epoch = epoch;
      result.model = model;
    }
    result.history.push_back(rec);
    log::debug("logreg epoch " + std::to_string(epoch) + " loss " +
               std::to_string(rec.train_loss) + " cv_f1 " +
               std::to_string(rec.cv_f1));
  }
  log::info("logreg: kept epoch " + std::to_string(best_epoch));
  return result;
}

}  // namespace normseq
