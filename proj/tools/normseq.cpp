#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "normseq/corpus.hpp"
#include "normseq/errors.hpp"
#include "normseq/eval.hpp"
#include "normseq/features.hpp"
#include "normseq/lexicon.hpp"
#include "normseq/log.hpp"
#include "normseq/models/checkpoint.hpp"
#include "normseq/models/model_gradcheck.hpp"
#include "normseq/models/predict.hpp"
#include "normseq/synth.hpp"

namespace {

using namespace normseq;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& corpus_path) {
  const CorpusValidation v = validate_corpus(corpus_path);
  for (const auto& d : v.errors) {
    if (d.line > 0)
      std::cout << corpus_path << ":" << d.line << ": " << d.message << "\n";
    else
      std::cout << corpus_path << ": " << d.message << "\n";
  }
  if (!v.errors.empty()) {
    std::cout << v.errors.size() << " error(s)\n";
    return 1;
  }
  size_t clauses = 0;
  size_t positives = 0;
  for (const auto& d : v.dialogs) {
    clauses += d.clauses.size();
    for (const auto& c : d.clauses) positives += c.label;
  }
  std::cout << "ok: " << v.dialogs.size() << " session(s), " << clauses
            << " clause(s), " << positives << " positive(s)\n";
  return 0;
}

// ---------------------------------------------------------- build-features

int cmd_build_features(const std::string& corpus_path,
                       const std::string& lexicon_path,
                       const std::string& splits_path, int rare_threshold,
                       const std::string& out_path) {
  const auto dialogs = load_corpus(corpus_path);
  const auto lexicon = Lexicon::load(lexicon_path);
  const auto split = split_corpus(dialogs, load_split_assignment(splits_path));
  const FeatureSpace space = build_feature_space(split.train, lexicon, rare_threshold);
  space.save(out_path);
  std::cout << "features: " << space.dim() << "\n";
  for (const auto& [name, count] : space.per_template_counts())
    std::cout << "  " << name << ": " << count << "\n";
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string corpus, lexicon, splits, space, out_dir, config_path, model = "logreg";
  int embed_dim = -1, hidden = -1, mlp_hidden = -1;
  int rare_threshold = 20;
};

void append_log(std::string& log, const nlohmann::ordered_json& j) {
  log += j.dump();
  log += '\n';
}

int cmd_train(const TrainArgs& args, const TrainConfig& config) {
  const ModelKind kind = model_kind_from_string(args.model);
  const auto dialogs = load_corpus(args.corpus);
  const auto split = split_corpus(dialogs, load_split_assignment(args.splits));
  if (split.train.empty()) throw ValidationError("train split is empty");

  Checkpoint ckpt;
  ckpt.kind = kind;
  ckpt.train_config = config;

  const bool needs_features = kind != ModelKind::Local;
  if (needs_features) {
    if (args.lexicon.empty())
      throw ConfigError("--lexicon is required for model " + args.model);
    ckpt.lexicon = Lexicon::load(args.lexicon);
    if (!args.space.empty())
      ckpt.space = FeatureSpace::load(args.space);
    else
      ckpt.space = build_feature_space(split.train, *ckpt.lexicon, args.rare_threshold);
    log::info("feature space: " + std::to_string(ckpt.space->dim()) + " columns");
  }

  std::string train_log;
  nlohmann::ordered_json start;
  start["event"] = "start";
  start["model"] = args.model;
  start["seed"] = config.seed;
  start["config"] = nlohmann::json::parse(config.to_json_string());
  if (ckpt.space) start["feature_dim"] = ckpt.space->dim();
  append_log(train_log, start);

  TrainHistory history;
  switch (kind) {
    case ModelKind::LogReg: {
      auto result = logreg_train(split.train, split.cv, *ckpt.space, *ckpt.lexicon, config);
      history = std::move(result.history);
      ckpt.model = std::move(result.model);
      break;
    }
    case ModelKind::Local: {
      LocalContextConfig mc;
      if (args.embed_dim > 0) mc.embed_dim = args.embed_dim;
      if (args.hidden > 0) mc.hidden = args.hidden;
      auto result = local_train(split.train, split.cv, mc, config);
      history = std::move(result.history);
      ckpt.model = std::move(result.model);
      break;
    }
    case ModelKind::Global1:
    case ModelKind::Global2: {
      GlobalContextConfig mc;
      mc.layers = kind == ModelKind::Global1 ? 1 : 2;
      if (args.embed_dim > 0) mc.embed_dim = args.embed_dim;
      if (args.hidden > 0) mc.hidden = args.hidden;
      if (args.mlp_hidden > 0) mc.mlp_hidden = args.mlp_hidden;
      auto result =
          global_train(split.train, split.cv, *ckpt.space, *ckpt.lexicon, mc, config);
      history = std::move(result.history);
      ckpt.model = std::move(result.model);
      break;
    }
  }

  int best_epoch = 0;
  for (const auto& r : history) {
    nlohmann::ordered_json row;
    row["event"] = "epoch";
    row["epoch"] = r.epoch;
    row["train_loss"] = r.train_loss;
    row["cv_precision"] = r.cv_precision;
    row["cv_recall"] = r.cv_recall;
    row["cv_f1"] = r.cv_f1;
    row["best"] = r.best;
    append_log(train_log, row);
    if (r.best) best_epoch = r.epoch;
  }
  nlohmann::ordered_json done;
  done["event"] = "done";
  done["best_epoch"] = best_epoch;
  append_log(train_log, done);

  ckpt.history = std::move(history);
  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + args.out_dir);
  const std::string ckpt_path = args.out_dir + "/checkpoint.nsq";
  save_checkpoint(ckpt, ckpt_path);
  write_text(args.out_dir + "/train_log.jsonl", train_log);
  std::cout << "checkpoint: " << ckpt_path << "\n";
  return 0;
}

// ------------------------------------------------------- evaluate / predict

std::vector<Dialog> pick_split(const std::string& corpus_path,
                               const std::string& splits_path,
                               const std::string& split_name) {
  auto dialogs = load_corpus(corpus_path);
  if (splits_path.empty()) {
    if (split_name != "all")
      throw ConfigError("--splits is required to select split " + split_name);
    return dialogs;
  }
  const auto split = split_corpus(dialogs, load_split_assignment(splits_path));
  if (split_name == "train") return split.train;
  if (split_name == "cv") return split.cv;
  if (split_name == "test") return split.test;
  if (split_name == "all") return dialogs;
  throw ConfigError("unknown split " + split_name);
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& corpus_path,
                 const std::string& splits_path, const std::string& split_name,
                 const std::string& space_path, const std::string& out_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (!space_path.empty())
    require_space_match(ckpt, FeatureSpace::load(space_path));
  const auto dialogs = pick_split(corpus_path, splits_path, split_name);
  const MetricsReport report = evaluate_model(ckpt, dialogs, split_name);
  auto j = nlohmann::ordered_json::parse(report_to_json(report));
  j["seed"] = ckpt.train_config.seed;
  const std::string text = j.dump(2) + "\n";
  if (!out_path.empty()) write_text(out_path, text);
  std::cout << text;
  return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& corpus_path,
                const std::string& space_path, const std::string& out_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (!space_path.empty())
    require_space_match(ckpt, FeatureSpace::load(space_path));
  const auto dialogs = load_corpus(corpus_path);
  log::info("seed " + std::to_string(ckpt.train_config.seed));
  std::string lines;
  for (const auto& dialog : dialogs)
    lines += predictions_to_jsonl(dialog, predict_dialog(ckpt, dialog));
  if (!out_path.empty())
    write_text(out_path, lines);
  else
    std::cout << lines;
  return 0;
}

// ------------------------------------------------------------------- synth

int cmd_synth(const SynthSpec& spec, const std::string& out_dir) {
  const SynthOutput output = generate_synthetic_corpus(spec);
  const SynthPaths paths = write_synth_corpus(output, out_dir);
  size_t clauses = 0;
  size_t positives = 0;
  for (const auto& d : output.dialogs) {
    clauses += d.clauses.size();
    for (const auto& c : d.clauses) positives += c.label;
  }
  std::cout << "corpus: " << paths.corpus << "\n"
            << "splits: " << paths.splits << "\n"
            << "lexicon: " << paths.lexicon << "\n"
            << "rule: " << paths.rule << "\n"
            << "seed: " << spec.seed << "\n"
            << "sessions: " << output.dialogs.size() << ", clauses: " << clauses
            << ", positive rate: "
            << static_cast<double>(positives) / static_cast<double>(clauses) << "\n";
  return 0;
}

// --------------------------------------------------------------- gradcheck

int cmd_gradcheck(const std::string& model, unsigned long long seed) {
  std::vector<ModelKind> kinds;
  if (model == "all")
    kinds = {ModelKind::LogReg, ModelKind::Local, ModelKind::Global1,
             ModelKind::Global2};
  else
    kinds = {model_kind_from_string(model)};

  bool ok = true;
  for (const ModelKind kind : kinds) {
    const auto report = model_gradcheck(kind, seed);
    std::cout << to_string(kind) << ": max relative error "
              << report.max_rel_error << " over " << report.coords_checked
              << " coordinates (seed " << seed << ")\n";
    for (const auto& f : report.failures)
      std::cout << "  FAIL " << f.block << "[" << f.index << "] analytic "
                << f.analytic << " numeric " << f.numeric << " rel " << f.rel_error
                << "\n";
    ok = ok && report.ok();
  }
  std::cout << (ok ? "gradcheck passed" : "gradcheck FAILED") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequence labeling of social norm violations in dialog"};
  app.require_subcommand(1);

  // validate
  std::string v_corpus;
  auto* validate = app.add_subcommand("validate", "Check a corpus file");
  validate->add_option("--corpus", v_corpus, "Corpus JSONL path")->required();

  // build-features
  std::string bf_corpus, bf_lexicon, bf_splits, bf_out;
  int bf_threshold = 20;
  auto* build = app.add_subcommand("build-features", "Freeze a feature space");
  build->add_option("--corpus", bf_corpus)->required();
  build->add_option("--lexicon", bf_lexicon)->required();
  build->add_option("--splits", bf_splits)->required();
  build->add_option("--rare-threshold", bf_threshold,
                    "Minimum training count to keep a feature");
  build->add_option("--out", bf_out, "Feature space output path")->required();

  // train
  TrainArgs t;
  TrainConfig defaults;
  int t_unroll = defaults.unroll, t_epochs = defaults.epochs,
      t_batch = defaults.batch_size;
  double t_dropout = defaults.dropout, t_lr = defaults.lr,
         t_l2 = defaults.l2_lambda, t_clip = defaults.clip_norm,
         t_pos_weight = defaults.pos_weight;
  unsigned long long t_seed = defaults.seed;
  std::string t_optimizer = nn::to_string(defaults.optimizer);
  bool t_binary = false;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--corpus", t.corpus)->required();
  train->add_option("--splits", t.splits)->required();
  train->add_option("--lexicon", t.lexicon);
  train->add_option("--space", t.space, "Reuse a frozen feature space");
  train->add_option("--model", t.model, "logreg|local|global-1|global-2");
  train->add_option("--config", t.config_path, "Training config JSON file");
  train->add_option("--out", t.out_dir, "Output directory")->required();
  train->add_option("--unroll", t_unroll);
  train->add_option("--dropout", t_dropout);
  train->add_option("--epochs", t_epochs);
  train->add_option("--lr", t_lr);
  train->add_option("--l2", t_l2);
  train->add_option("--seed", t_seed);
  train->add_option("--clip", t_clip);
  train->add_option("--optimizer", t_optimizer, "sgd|adam");
  train->add_option("--batch-size", t_batch);
  train->add_option("--pos-weight", t_pos_weight);
  train->add_flag("--binary-features", t_binary, "Presence instead of counts");
  train->add_option("--rare-threshold", t.rare_threshold);
  train->add_option("--embed-dim", t.embed_dim);
  train->add_option("--hidden", t.hidden);
  train->add_option("--mlp-hidden", t.mlp_hidden);

  // evaluate
  std::string e_ckpt, e_corpus, e_splits, e_split = "test", e_space, e_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a split");
  evaluate->add_option("--checkpoint", e_ckpt)->required();
  evaluate->add_option("--corpus", e_corpus)->required();
  evaluate->add_option("--splits", e_splits);
  evaluate->add_option("--split", e_split, "train|cv|test|all");
  evaluate->add_option("--space", e_space, "Cross-check an external feature space");
  evaluate->add_option("--out", e_out, "Also write the report here");

  // predict
  std::string p_ckpt, p_corpus, p_space, p_out;
  auto* predict = app.add_subcommand("predict", "Per-clause probabilities as JSONL");
  predict->add_option("--checkpoint", p_ckpt)->required();
  predict->add_option("--corpus", p_corpus)->required();
  predict->add_option("--space", p_space, "Cross-check an external feature space");
  predict->add_option("--out", p_out);

  // synth
  SynthSpec spec;
  std::string s_out;
  auto* synth = app.add_subcommand("synth", "Generate the planted-context corpus");
  synth->add_option("--out", s_out, "Output directory")->required();
  synth->add_option("--train-sessions", spec.train_sessions);
  synth->add_option("--cv-sessions", spec.cv_sessions);
  synth->add_option("--test-sessions", spec.test_sessions);
  synth->add_option("--clauses", spec.clauses_per_session);
  synth->add_option("--vocab", spec.vocab_size);
  synth->add_option("--rate", spec.positive_rate);
  synth->add_option("--seed", spec.seed);

  // gradcheck
  std::string g_model = "all";
  unsigned long long g_seed = 7;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--model", g_model, "logreg|local|global-1|global-2|all");
  gradcheck->add_option("--seed", g_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(v_corpus);
    if (*build)
      return cmd_build_features(bf_corpus, bf_lexicon, bf_splits, bf_threshold, bf_out);
    if (*train) {
      TrainConfig config;
      if (!t.config_path.empty())
        config = TrainConfig::from_json_string(read_text(t.config_path));
      // flags passed explicitly override the config file
      if (train->count("--unroll")) config.unroll = t_unroll;
      if (train->count("--dropout")) config.dropout = t_dropout;
      if (train->count("--epochs")) config.epochs = t_epochs;
      if (train->count("--lr")) config.lr = t_lr;
      if (train->count("--l2")) config.l2_lambda = t_l2;
      if (train->count("--seed")) config.seed = t_seed;
      if (train->count("--clip")) config.clip_norm = t_clip;
      if (train->count("--optimizer"))
        config.optimizer = nn::optimizer_from_string(t_optimizer);
      if (train->count("--batch-size")) config.batch_size = t_batch;
      if (train->count("--pos-weight")) config.pos_weight = t_pos_weight;
      if (train->count("--binary-features")) config.binary_features = t_binary;
      config.validate();
      return cmd_train(t, config);
    }
    if (*evaluate)
      return cmd_evaluate(e_ckpt, e_corpus, e_splits, e_split, e_space, e_out);
    if (*predict) return cmd_predict(p_ckpt, p_corpus, p_space, p_out);
    if (*synth) return cmd_synth(spec, s_out);
    if (*gradcheck) return cmd_gradcheck(g_model, g_seed);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 2;
  }
}
