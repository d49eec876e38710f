// Microbenchmarks for the hot paths: the LSTM kernel at production sizes,
// sparse featurization, and the per-chunk training step.

#include <benchmark/benchmark.h>

#include <vector>

#include "normseq/features.hpp"
#include "normseq/models/global_context.hpp"
#include "normseq/models/logreg.hpp"
#include "normseq/nn/lstm.hpp"
#include "normseq/nn/rng.hpp"
#include "normseq/synth.hpp"

namespace {

using namespace normseq;

constexpr int kHidden = 600;
constexpr int kEmbed = 150;

nn::Vec random_vec(int n, nn::Rng& rng) {
  nn::Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
  return v;
}

void bm_lstm_forward(benchmark::State& state) {
  nn::Rng rng(1);
  nn::LstmParams p = nn::LstmParams::init(kHidden, kEmbed, rng);
  const nn::Vec x = random_vec(kEmbed, rng);
  nn::LstmState s = nn::LstmState::zeros(kHidden);
  for (auto _ : state) {
    s = lstm_forward(p, x, s);
    benchmark::DoNotOptimize(s.h.data());
  }
}
BENCHMARK(bm_lstm_forward);

void bm_lstm_forward_backward(benchmark::State& state) {
  nn::Rng rng(1);
  nn::LstmParams p = nn::LstmParams::init(kHidden, kEmbed, rng);
  const nn::Vec x = random_vec(kEmbed, rng);
  const nn::LstmState prev = nn::LstmState::zeros(kHidden);
  const nn::Vec dh = random_vec(kHidden, rng);
  const nn::Vec dc = nn::Vec::Zero(kHidden);
  for (auto _ : state) {
    nn::LstmStepCache cache;
    nn::LstmState s = lstm_forward(p, x, prev, &cache);
    benchmark::DoNotOptimize(s.h.data());
    auto back = lstm_backward(p, cache, dh, dc);
    benchmark::DoNotOptimize(back.dx.data());
    p.zero_grads();
  }
}
BENCHMARK(bm_lstm_forward_backward);

struct Corpus {
  SynthOutput synth;
  FeatureSpace space;
  std::vector<LabeledVector> vectors;
};

const Corpus& shared_corpus() {
  static const Corpus c = [] {
    SynthSpec spec;
    spec.train_sessions = 8;
    spec.cv_sessions = 1;
    spec.test_sessions = 1;
    spec.clauses_per_session = 100;
    spec.seed = 5;
    Corpus out{generate_synthetic_corpus(spec), FeatureSpace{}, {}};
    out.space = build_feature_space(out.synth.dialogs, out.synth.lexicon, 2);
    out.vectors =
        vectorize_dialogs(out.synth.dialogs, out.space, out.synth.lexicon);
    return out;
  }();
  return c;
}

void bm_vectorize_clause(benchmark::State& state) {
  const Corpus& c = shared_corpus();
  const Clause& clause = c.synth.dialogs.front().clauses.front();
  for (auto _ : state) {
    SparseVector v = vectorize(clause, c.space, c.synth.lexicon);
    benchmark::DoNotOptimize(v.entries.data());
  }
}
BENCHMARK(bm_vectorize_clause);

void bm_logreg_predict(benchmark::State& state) {
  const Corpus& c = shared_corpus();
  nn::Rng rng(2);
  LogRegModel m = LogRegModel::zeros(c.space.dim());
  for (int i = 0; i < m.dim(); ++i) m.w(i) = rng.uniform(-0.5, 0.5);
  size_t k = 0;
  for (auto _ : state) {
    const double p = logreg_predict(m, c.vectors[k].f);
    benchmark::DoNotOptimize(p);
    k = (k + 1) % c.vectors.size();
  }
}
BENCHMARK(bm_logreg_predict);

void bm_global_chunk_train_step(benchmark::State& state) {
  const Corpus& c = shared_corpus();
  const int layers = static_cast<int>(state.range(0));
  nn::Rng rng(3);
  GlobalContextConfig mc;
  mc.input_dim = c.space.dim();
  mc.embed_dim = kEmbed;
  mc.hidden = kHidden;
  mc.mlp_hidden = 100;
  mc.layers = layers;
  mc.dropout = 0.0;
  GlobalContextModel model = init_global_context(mc, rng);

  const int unroll = 20;
  std::vector<SparseVector> chunk;
  std::vector<int> labels;
  for (int t = 0; t < unroll; ++t) {
    chunk.push_back(c.vectors[static_cast<size_t>(t)].f);
    labels.push_back(c.vectors[static_cast<size_t>(t)].label);
  }
  LayerStates zero = zero_states(model);
  for (auto _ : state) {
    model.zero_grads();
    auto res = global_chunk_loss_grad(model, chunk, labels, zero);
    benchmark::DoNotOptimize(res.loss);
  }
}
BENCHMARK(bm_global_chunk_train_step)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
