#include "normseq/models/train_config.hpp"

#include <nlohmann/json.hpp>

#include "normseq/errors.hpp"

namespace normseq {

void TrainConfig::validate() const {
  if (unroll < 1) throw ConfigError("train config: unroll must be >= 1");
  if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("train config: lr must be positive");
  if (l2_lambda < 0.0) throw ConfigError("train config: l2_lambda must be >= 0");
  if (clip_norm < 0.0) throw ConfigError("train config: clip_norm must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ConfigError("train config: dropout must be in [0, 1)");
  if (!(pos_weight > 0.0))
    throw ConfigError("train config: pos_weight must be positive");
  if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
}

std::string TrainConfig::to_json_string() const {
  nlohmann::ordered_json j;
  j["unroll"] = unroll;
  j["epochs"] = epochs;
  j["optimizer"] = nn::to_string(optimizer);
  j["lr"] = lr;
  j["l2_lambda"] = l2_lambda;
  j["seed"] = seed;
  j["clip_norm"] = clip_norm;
  j["dropout"] = dropout;
  j["pos_weight"] = pos_weight;
  j["batch_size"] = batch_size;
  j["binary_features"] = binary_features;
  return j.dump();
}

TrainConfig TrainConfig::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("train config: expected a JSON object");

  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "unroll")
        c.unroll = value.get<int>();
      else if (key == "epochs")
        c.epochs = value.get<int>();
      else if (key == "optimizer")
        c.optimizer = nn::optimizer_from_string(value.get<std::string>());
      else if (key == "lr")
        c.lr = value.get<double>();
      else if (key == "l2_lambda")
        c.l2_lambda = value.get<double>();
      else if (key == "seed")
        c.seed = value.get<unsigned long long>();
      else if (key == "clip_norm")
        c.clip_norm = value.get<double>();
      else if (key == "dropout")
        c.dropout = value.get<double>();
      else if (key == "pos_weight")
        c.pos_weight = value.get<double>();
      else if (key == "batch_size")
        c.batch_size = value.get<int>();
      else if (key == "binary_features")
        c.binary_features = value.get<bool>();
      else
        throw ConfigError("train config: unknown key \"" + key + "\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: bad value type: ") + e.what());
  }
  c.validate();
  return c;
}

nn::OptimizerConfig optimizer_config(const TrainConfig& c) {
  nn::OptimizerConfig oc;
  oc.kind = c.optimizer;
  oc.lr = c.lr;
  oc.clip_norm = c.clip_norm;
  return oc;
}

std::string history_to_json(const TrainHistory& history) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : history) {
    nlohmann::ordered_json row;
    row["epoch"] = r.epoch;
    row["train_loss"] = r.train_loss;
    row["cv_precision"] = r.cv_precision;
    row["cv_recall"] = r.cv_recall;
    row["cv_f1"] = r.cv_f1;
    row["best"] = r.best;
    rows.push_back(std::move(row));
  }
  return rows.dump();
}

TrainHistory history_from_json(const std::string& text) {
  nlohmann::json rows;
  try {
    rows = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("training history: invalid JSON: ") + e.what());
  }
  if (!rows.is_array()) throw ValidationError("training history: expected an array");
  TrainHistory history;
  try {
    for (const auto& row : rows) {
      EpochRecord r;
      r.epoch = row.at("epoch").get<int>();
      r.train_loss = row.at("train_loss").get<double>();
      r.cv_precision = row.at("cv_precision").get<double>();
      r.cv_recall = row.at("cv_recall").get<double>();
      r.cv_f1 = row.at("cv_f1").get<double>();
      r.best = row.at("best").get<bool>();
      history.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("training history: bad row: ") + e.what());
  }
  return history;
}

}  // namespace normseq
