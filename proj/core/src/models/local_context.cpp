#include "normseq/models/local_context.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "normseq/errors.hpp"
#include "normseq/eval.hpp"
#include "normseq/features.hpp"
#include "normseq/models/logreg.hpp"
#include "normseq/log.hpp"
#include "normseq/nn/loss.hpp"
#include "normseq/nn/optim.hpp"

namespace normseq {

namespace {

constexpr const char* kUnkToken = "<unk>";

}  // namespace

int LocalContextModel::row_for(const std::string& word) const {
  auto it = vocab_index.find(word);
  return it == vocab_index.end() ? 0 : it->second;
}

void LocalContextModel::zero_grads() {
  dE.setZero();
  lstm.zero_grads();
  output.zero_grads();
}

std::vector<nn::ParamRef> LocalContextModel::params() {
  std::vector<nn::ParamRef> refs;
  refs.push_back(nn::param_ref("local.E", E, dE));
  for (auto& r : lstm.params("local.lstm")) refs.push_back(r);
  for (auto& r : output.params("local.output")) refs.push_back(r);
  return refs;
}

std::vector<std::string> build_vocab(const std::vector<Dialog>& train_dialogs) {
  std::set<std::string> words;
  for (const auto& d : train_dialogs)
    for (const auto& c : d.clauses)
      for (const auto& w : c.words) words.insert(w);
  std::vector<std::string> vocab;
  vocab.reserve(words.size() + 1);
  vocab.push_back(kUnkToken);
  vocab.insert(vocab.end(), words.begin(), words.end());
  return vocab;
}

LocalContextModel init_local_context(std::vector<std::string> vocab,
                                     const LocalContextConfig& config,
                                     nn::Rng& rng) {
  if (config.embed_dim <= 0 || config.hidden <= 0)
    throw ConfigError("local model: sizes must be positive");
  if (vocab.empty() || vocab[0] != kUnkToken)
    throw ConfigError("local model: vocab must start with the unknown slot");

  LocalContextModel m;
  m.config = config;
  m.vocab = std::move(vocab);
  for (size_t k = 0; k < m.vocab.size(); ++k) {
    if (!m.vocab_index.emplace(m.vocab[k], static_cast<int>(k)).second)
      throw ConfigError("local model: duplicate vocab word " + m.vocab[k]);
  }

  const auto rows = static_cast<Eigen::Index>(m.vocab.size());
  const double k = 1.0 / std::sqrt(static_cast<double>(config.embed_dim));
  m.E = nn::Mat(rows, config.embed_dim);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < config.embed_dim; ++c)
      m.E(r, c) = rng.uniform(-k, k);
  m.dE = nn::Mat::Zero(rows, config.embed_dim);
  m.lstm = nn::LstmParams::init(config.hidden, config.embed_dim, rng);
  m.output = nn::DenseParams::init(2, config.hidden + kMetaDim, rng);
  return m;
}

int load_embeddings_text(LocalContextModel& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings file " + path);

  std::string line;
  int filled = 0;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> values;
    double v;
    while (ss >> v) values.push_back(v);
    if (first) {
      first = false;
      // word2vec text files may start with a "count dim" header
      if (values.size() == 1) continue;
    }
    if (static_cast<int>(values.size()) != model.config.embed_dim)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(model.config.embed_dim) +
                            " values, got " + std::to_string(values.size()));
    auto it = model.vocab_index.find(word);
    if (it == model.vocab_index.end()) continue;
    for (int c = 0; c < model.config.embed_dim; ++c) model.E(it->second, c) = values[c];
    ++filled;
  }
  return filled;
}

namespace {

struct LocalForwardCache {
  std::vector<int> rows;
  std::vector<nn::LstmStepCache> steps;
  nn::Vec concat;  // [hidden + meta]
  nn::Vec logits;
};

nn::Vec local_forward_impl(const LocalContextModel& m, const Clause& clause,
                           LocalForwardCache* cache) {
  if (clause.words.empty())
    throw ValidationError("local model: empty clause");

  nn::LstmState state = nn::LstmState::zeros(m.config.hidden);
  if (cache) cache->steps.resize(clause.words.size());
  for (size_t t = 0; t < clause.words.size(); ++t) {
    const int row = m.row_for(clause.words[t]);
    const nn::Vec x = m.E.row(row).transpose();
    state = nn::lstm_forward(m.lstm, x, state, cache ? &cache->steps[t] : nullptr);
    if (cache) cache->rows.push_back(row);
  }

  const auto meta = encode_meta(clause);
  nn::Vec concat(m.config.hidden + kMetaDim);
  concat.head(m.config.hidden) = state.h;
  for (int k = 0; k < kMetaDim; ++k) concat(m.config.hidden + k) = meta[k];

  const nn::Vec logits = nn::dense_forward(m.output, concat);
  if (cache) {
    cache->concat = concat;
    cache->logits = logits;
  }
  return nn::softmax(logits);
}

}  // namespace

nn::Vec local_forward(const LocalContextModel& model, const Clause& clause,
                      bool /*training*/) {
  return local_forward_impl(model, clause, nullptr);
}

double local_loss_grad(LocalContextModel& model, const Clause& clause,
                       double pos_weight) {
  LocalForwardCache cache;
  local_forward_impl(model, clause, &cache);

  const auto ce = nn::softmax_cross_entropy(cache.logits, clause.label, pos_weight);
  const nn::Vec dconcat = nn::dense_backward(model.output, cache.concat, ce.dlogits);

  nn::Vec dh = dconcat.head(model.config.hidden);
  nn::Vec dc = nn::Vec::Zero(model.config.hidden);
  for (size_t t = cache.steps.size(); t-- > 0;) {
    const auto back = nn::lstm_backward(model.lstm, cache.steps[t], dh, dc);
    model.dE.row(cache.rows[t]) += back.dx.transpose();
    dh = back.dh_prev;
    dc = back.dc_prev;
  }
  return ce.loss;
}

LocalTrainResult local_train(const std::vector<Dialog>& train_dialogs,
                             const std::vector<Dialog>& cv_dialogs,
                             const LocalContextConfig& model_config,
                             const TrainConfig& config) {
  config.validate();
  std::vector<const Clause*> train;
  for (const auto& d : train_dialogs)
    for (const auto& c : d.clauses) train.push_back(&c);
  if (train.empty()) throw ValidationError("local model: empty training set");
  std::vector<const Clause*> cv;
  for (const auto& d : cv_dialogs)
    for (const auto& c : d.clauses) cv.push_back(&c);

  nn::Rng rng(config.seed);
  LocalContextModel model =
      init_local_context(build_vocab(train_dialogs), model_config, rng);
  nn::Optimizer opt(optimizer_config(config));

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  LocalTrainResult result;
  result.model = model;
  double best_f1 = -1.0;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      const size_t stop =
          std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      model.zero_grads();
      double batch_loss = 0.0;
      for (size_t k = start; k < stop; ++k)
        batch_loss += local_loss_grad(model, *train[order[k]], config.pos_weight);
      const double inv = 1.0 / static_cast<double>(stop - start);
      // scale accumulated sums into batch means before the update
      for (auto& r : model.params())
        for (Eigen::Index k = 0; k < r.size(); ++k) r.grad[k] *= inv;
      auto refs = model.params();
      opt.step(refs);
      loss_sum += batch_loss;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    if (!cv.empty()) {
      std::vector<int> preds, golds;
      preds.reserve(cv.size());
      golds.reserve(cv.size());
      for (const Clause* c : cv) {
        const nn::Vec probs = local_forward(model, *c);
        preds.push_back(label_from_probability(probs(1)));
        golds.push_back(c->label);
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
    log::debug("local epoch " + std::to_string(epoch) + " loss " +
               std::to_string(rec.train_loss) + " cv_f1 " +
               std::to_string(rec.cv_f1));
  }
  log::info("local model: kept epoch " + std::to_string(best_epoch));
  return result;
}

}  // namespace normseq
