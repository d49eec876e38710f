#include "normseq/models/global_context.hpp"

#include <algorithm>
#include <numeric>

#include "normseq/errors.hpp"
#include "normseq/eval.hpp"
#include "normseq/log.hpp"
#include "normseq/nn/loss.hpp"
#include "normseq/nn/optim.hpp"

namespace normseq {

void GlobalContextModel::zero_grads() {
  embed.zero_grads();
  for (auto& l : lstm_layers) l.zero_grads();
  mlp.zero_grads();
  output.zero_grads();
}

std::vector<nn::ParamRef> GlobalContextModel::params() {
  std::vector<nn::ParamRef> refs;
  for (auto& r : embed.params("global.embed")) refs.push_back(r);
  for (size_t l = 0; l < lstm_layers.size(); ++l)
    for (auto& r : lstm_layers[l].params("global.lstm" + std::to_string(l)))
      refs.push_back(r);
  for (auto& r : mlp.params("global.mlp")) refs.push_back(r);
  for (auto& r : output.params("global.output")) refs.push_back(r);
  return refs;
}

GlobalContextModel init_global_context(const GlobalContextConfig& config,
                                       nn::Rng& rng) {
  if (config.input_dim <= 0)
    throw ConfigError("global model: input_dim must be positive");
  if (config.embed_dim <= 0 || config.hidden <= 0 || config.mlp_hidden <= 0)
    throw ConfigError("global model: sizes must be positive");
  if (config.layers != 1 && config.layers != 2)
    throw ConfigError("global model: layers must be 1 or 2");
  if (config.dropout < 0.0 || config.dropout >= 1.0)
    throw ConfigError("global model: dropout must be in [0, 1)");

  GlobalContextModel m;
  m.config = config;
  m.embed = nn::DenseParams::init(config.embed_dim, config.input_dim, rng);
  m.lstm_layers.push_back(nn::LstmParams::init(config.hidden, config.embed_dim, rng));
  if (config.layers == 2)
    m.lstm_layers.push_back(nn::LstmParams::init(config.hidden, config.hidden, rng));
  m.mlp = nn::DenseParams::init(config.mlp_hidden, config.hidden, rng);
  m.output = nn::DenseParams::init(2, config.mlp_hidden, rng);
  return m;
}

LayerStates zero_states(const GlobalContextModel& model) {
  LayerStates states;
  for (size_t l = 0; l < model.lstm_layers.size(); ++l)
    states.push_back(nn::LstmState::zeros(model.config.hidden));
  return states;
}

std::vector<StepMasks> draw_chunk_masks(const GlobalContextModel& model,
                                        int steps, nn::Rng& rng) {
  const auto& c = model.config;
  std::vector<StepMasks> masks(static_cast<size_t>(steps));
  for (auto& m : masks) {
    m.embed = nn::dropout_mask(c.embed_dim, c.dropout, rng);
    for (int l = 0; l < c.layers; ++l)
      m.lstm.push_back(nn::dropout_mask(c.hidden, c.dropout, rng));
    m.mlp = nn::dropout_mask(c.mlp_hidden, c.dropout, rng);
  }
  return masks;
}

namespace {

// z = W f + b with f sparse: accumulate scaled columns.
nn::Vec embed_sparse(const nn::DenseParams& p, const SparseVector& f) {
  if (f.dim != p.in)
    throw ValidationError("global model: feature dim " + std::to_string(f.dim) +
                          " does not match embedding input " + std::to_string(p.in));
  nn::Vec z = p.b;
  for (const auto& [col, val] : f.entries) z += val * p.W.col(col);
  return z;
}

struct GlobalStepCache {
  const SparseVector* f = nullptr;
  nn::Vec emb;                             // pre-dropout embedding
  nn::Vec emb_in;                          // post-dropout LSTM input
  std::vector<nn::LstmStepCache> lstm;     // per layer
  std::vector<nn::Vec> h_out;              // per layer, post-dropout output
  nn::Vec mlp_act;                         // tanh activation, pre-dropout
  nn::Vec mlp_out;                         // post-dropout MLP output
  nn::Vec logits;
};

void check_incoming(const GlobalContextModel& model, const LayerStates& incoming) {
  if (incoming.size() != model.lstm_layers.size())
    throw ValidationError("global model: expected " +
                          std::to_string(model.lstm_layers.size()) +
                          " layer states, got " + std::to_string(incoming.size()));
  for (const auto& s : incoming)
    if (s.h.size() != model.config.hidden || s.c.size() != model.config.hidden)
      throw ValidationError("global model: state size mismatch");
}

GlobalChunkResult forward_chunk_impl(const GlobalContextModel& model,
                                     const std::vector<SparseVector>& chunk,
                                     const LayerStates& incoming,
                                     const std::vector<StepMasks>* masks,
                                     std::vector<GlobalStepCache>* caches) {
  if (chunk.empty()) throw ValidationError("global model: empty chunk");
  check_incoming(model, incoming);
  if (masks && masks->size() != chunk.size())
    throw ValidationError("global model: mask count does not match chunk length");

  const int layers = model.config.layers;
  GlobalChunkResult out;
  out.outgoing = incoming;
  if (caches) caches->resize(chunk.size());

  for (size_t t = 0; t < chunk.size(); ++t) {
    GlobalStepCache* cache = caches ? &(*caches)[t] : nullptr;
    if (cache) {
      cache->f = &chunk[t];
      cache->lstm.resize(layers);
      cache->h_out.resize(layers);
    }

    nn::Vec emb = embed_sparse(model.embed, chunk[t]);
    if (cache) cache->emb = emb;
    if (masks) emb = (*masks)[t].embed.apply(emb);
    if (cache) cache->emb_in = emb;

    nn::Vec layer_in = emb;
    for (int l = 0; l < layers; ++l) {
      out.outgoing[l] = nn::lstm_forward(model.lstm_layers[l], layer_in,
                                         out.outgoing[l],
                                         cache ? &cache->lstm[l] : nullptr);
      nn::Vec h = out.outgoing[l].h;
      if (masks) h = (*masks)[t].lstm[l].apply(h);
      if (cache) cache->h_out[l] = h;
      layer_in = std::move(h);
    }

    const nn::Vec act = nn::dense_tanh_forward(model.mlp, layer_in);
    nn::Vec mlp_out = act;
    if (masks) mlp_out = (*masks)[t].mlp.apply(mlp_out);
    const nn::Vec logits = nn::dense_forward(model.output, mlp_out);
    if (cache) {
      cache->mlp_act = act;
      cache->mlp_out = mlp_out;
      cache->logits = logits;
    }
    out.probs.push_back(nn::softmax(logits));
  }
  return out;
}

}  // namespace

GlobalChunkResult global_forward_chunk(const GlobalContextModel& model,
                                       const std::vector<SparseVector>& chunk,
                                       const LayerStates& incoming,
                                       const std::vector<StepMasks>* masks) {
  return forward_chunk_impl(model, chunk, incoming, masks, nullptr);
}

GlobalChunkGrad global_chunk_loss_grad(GlobalContextModel& model,
                                       const std::vector<SparseVector>& chunk,
                                       const std::vector<int>& labels,
                                       const LayerStates& incoming,
                                       double pos_weight,
                                       const std::vector<StepMasks>* masks) {
  if (labels.size() != chunk.size())
    throw ValidationError("global model: label count does not match chunk length");

  std::vector<GlobalStepCache> caches;
  const GlobalChunkResult fwd =
      forward_chunk_impl(model, chunk, incoming, masks, &caches);

  const int layers = model.config.layers;
  const int hidden = model.config.hidden;
  const double inv_t = 1.0 / static_cast<double>(chunk.size());

  GlobalChunkGrad result;
  result.outgoing = fwd.outgoing;

  // Recurrent gradient carried right-to-left inside the chunk, per layer.
  std::vector<nn::Vec> dh(layers, nn::Vec::Zero(hidden));
  std::vector<nn::Vec> dc(layers, nn::Vec::Zero(hidden));

  for (size_t t = chunk.size(); t-- > 0;) {
    GlobalStepCache& cache = caches[t];
    const auto ce =
        nn::softmax_cross_entropy(cache.logits, labels[t], pos_weight);
    result.loss += ce.loss * inv_t;

    const nn::Vec dlogits = inv_t * ce.dlogits;
    nn::Vec dmlp_out = nn::dense_backward(model.output, cache.mlp_out, dlogits);
    if (masks) dmlp_out = (*masks)[t].mlp.apply(dmlp_out);
    nn::Vec dtop = nn::dense_tanh_backward(model.mlp, cache.h_out[layers - 1],
                                           cache.mlp_act, dmlp_out);

    // dtop lands on the top layer's post-dropout output; walk the stack down.
    for (int l = layers - 1; l >= 0; --l) {
      nn::Vec dh_total = dh[l];
      if (masks)
        dh_total += (*masks)[t].lstm[l].apply(dtop);
      else
        dh_total += dtop;
      const auto back =
          nn::lstm_backward(model.lstm_layers[l], cache.lstm[l], dh_total, dc[l]);
      dh[l] = back.dh_prev;
      dc[l] = back.dc_prev;
      dtop = back.dx;  // gradient on the layer input (next layer down's output)
    }

    nn::Vec demb = dtop;
    if (masks) demb = (*masks)[t].embed.apply(demb);
    for (const auto& [col, val] : cache.f->entries)
      model.embed.dW.col(col) += val * demb;
    model.embed.db += demb;
  }
  return result;
}

std::vector<nn::Vec> global_forward_dialog(const GlobalContextModel& model,
                                           const std::vector<SparseVector>& vecs) {
  return global_forward_chunk(model, vecs, zero_states(model)).probs;
}

GlobalTrainResult global_train(const std::vector<Dialog>& train_dialogs,
                               const std::vector<Dialog>& cv_dialogs,
                               const FeatureSpace& space, const Lexicon& lexicon,
                               const GlobalContextConfig& model_config,
                               const TrainConfig& config) {
  config.validate();
  if (train_dialogs.empty())
    throw ValidationError("global model: empty training set");

  const VectorizeOptions vopts{config.binary_features};
  struct DialogVectors {
    std::vector<SparseVector> vecs;
    std::vector<int> labels;
  };
  auto vectorize_all = [&](const std::vector<Dialog>& dialogs) {
    std::vector<DialogVectors> out;
    for (const auto& d : dialogs) {
      DialogVectors dv;
      for (const auto& c : d.clauses) {
        dv.vecs.push_back(vectorize(c, space, lexicon, vopts));
        dv.labels.push_back(c.label);
      }
      out.push_back(std::move(dv));
    }
    return out;
  };
  const auto train = vectorize_all(train_dialogs);
  const auto cv = vectorize_all(cv_dialogs);

  GlobalContextConfig mc = model_config;
  mc.input_dim = space.dim();
  mc.dropout = config.dropout;

  nn::Rng rng(config.seed);
  GlobalContextModel model = init_global_context(mc, rng);
  nn::Optimizer opt(optimizer_config(config));

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  GlobalTrainResult result;
  result.model = model;
  double best_f1 = -1.0;
  int best_epoch = 0;
  const auto unroll = static_cast<size_t>(config.unroll);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    size_t clause_count = 0;

    for (size_t di : order) {
      const DialogVectors& dialog = train[di];
      LayerStates state = zero_states(model);
      for (size_t start = 0; start < dialog.vecs.size(); start += unroll) {
        const size_t stop = std::min(dialog.vecs.size(), start + unroll);
        const std::vector<SparseVector> chunk(dialog.vecs.begin() + start,
                                              dialog.vecs.begin() + stop);
        const std::vector<int> labels(dialog.labels.begin() + start,
                                      dialog.labels.begin() + stop);
        std::vector<StepMasks> masks;
        const std::vector<StepMasks>* masks_ptr = nullptr;
        if (config.dropout > 0.0) {
          masks = draw_chunk_masks(model, static_cast<int>(chunk.size()), rng);
          masks_ptr = &masks;
        }
        model.zero_grads();
        const auto step = global_chunk_loss_grad(model, chunk, labels, state,
                                                 config.pos_weight, masks_ptr);
        auto refs = model.params();
        opt.step(refs);
        state = step.outgoing;
        loss_sum += step.loss * static_cast<double>(chunk.size());
        clause_count += chunk.size();
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(clause_count);
    if (!cv.empty()) {
      std::vector<int> preds, golds;
      for (const auto& dialog : cv) {
        const auto probs = global_forward_dialog(model, dialog.vecs);
        for (size_t t = 0; t < probs.size(); ++t) {
          preds.push_back(label_from_probability(probs[t](1)));
          golds.push_back(dialog.labels[t]);
        }
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
    log::debug("global epoch " + std::to_string(epoch) + " loss " +
               std::to_string(rec.train_loss) + " cv_f1 " +
               std::to_string(rec.cv_f1));
  }
  log::info("global model: kept epoch " + std::to_string(best_epoch));
  return result;
}

}  // namespace normseq
