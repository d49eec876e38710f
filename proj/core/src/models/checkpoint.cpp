#include "normseq/models/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "normseq/errors.hpp"
#include "normseq/hashing.hpp"

namespace normseq {

namespace {

constexpr char kMagic[4] = {'N', 'S', 'Q', 'C'};
constexpr std::uint32_t kVersion = 1;

std::vector<nn::ParamRef> model_params(Checkpoint& ckpt) {
  return std::visit([](auto& m) { return m.params(); }, ckpt.model);
}

nlohmann::ordered_json model_header(const Checkpoint& ckpt) {
  nlohmann::ordered_json j;
  if (const auto* lr = std::get_if<LogRegModel>(&ckpt.model)) {
    j["dim"] = lr->dim();
    j["l2_lambda"] = lr->l2_lambda;
    j["threshold"] = lr->threshold;
  } else if (const auto* lc = std::get_if<LocalContextModel>(&ckpt.model)) {
    j["embed_dim"] = lc->config.embed_dim;
    j["hidden"] = lc->config.hidden;
    j["vocab"] = lc->vocab;
  } else {
    const auto& gc = std::get<GlobalContextModel>(ckpt.model);
    j["input_dim"] = gc.config.input_dim;
    j["embed_dim"] = gc.config.embed_dim;
    j["hidden"] = gc.config.hidden;
    j["mlp_hidden"] = gc.config.mlp_hidden;
    j["layers"] = gc.config.layers;
    j["dropout"] = gc.config.dropout;
  }
  return j;
}

void allocate_model(Checkpoint& ckpt, const nlohmann::json& j) {
  switch (ckpt.kind) {
    case ModelKind::LogReg: {
      LogRegModel m = LogRegModel::zeros(j.at("dim").get<int>(),
                                         j.at("l2_lambda").get<double>());
      m.threshold = j.at("threshold").get<double>();
      ckpt.model = std::move(m);
      return;
    }
    case ModelKind::Local: {
      LocalContextConfig config;
      config.embed_dim = j.at("embed_dim").get<int>();
      config.hidden = j.at("hidden").get<int>();
      auto vocab = j.at("vocab").get<std::vector<std::string>>();
      // Zero-seed shell; every weight is overwritten by the parameter blocks.
      nn::Rng rng(0);
      ckpt.model = init_local_context(std::move(vocab), config, rng);
      return;
    }
    case ModelKind::Global1:
    case ModelKind::Global2: {
      GlobalContextConfig config;
      config.input_dim = j.at("input_dim").get<int>();
      config.embed_dim = j.at("embed_dim").get<int>();
      config.hidden = j.at("hidden").get<int>();
      config.mlp_hidden = j.at("mlp_hidden").get<int>();
      config.layers = j.at("layers").get<int>();
      config.dropout = j.at("dropout").get<double>();
      const int expected = ckpt.kind == ModelKind::Global1 ? 1 : 2;
      if (config.layers != expected)
        throw ValidationError("checkpoint: layer count does not match model kind");
      nn::Rng rng(0);
      ckpt.model = init_global_context(config, rng);
      return;
    }
  }
  throw RuntimeFailure("checkpoint: unreachable model kind");
}

template <typename T>
void append_raw(std::string& out, const T& value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogReg: return "logreg";
    case ModelKind::Local: return "local";
    case ModelKind::Global1: return "global-1";
    case ModelKind::Global2: return "global-2";
  }
  throw RuntimeFailure("unreachable model kind");
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "logreg") return ModelKind::LogReg;
  if (s == "local") return ModelKind::Local;
  if (s == "global-1") return ModelKind::Global1;
  if (s == "global-2") return ModelKind::Global2;
  throw ValidationError("unknown model kind: " + s +
                        " (expected logreg|local|global-1|global-2)");
}

void save_checkpoint(Checkpoint& ckpt, const std::string& path) {
  nlohmann::ordered_json header;
  header["kind"] = to_string(ckpt.kind);
  header["train_config"] = nlohmann::json::parse(ckpt.train_config.to_json_string());
  header["history"] = nlohmann::json::parse(history_to_json(ckpt.history));
  if (ckpt.space) {
    header["feature_space"] = nlohmann::json::parse(ckpt.space->to_json_string());
    std::ostringstream hash;
    hash << std::hex << ckpt.space->hash();
    header["space_hash"] = hash.str();
  } else {
    header["feature_space"] = nullptr;
    header["space_hash"] = nullptr;
  }
  if (ckpt.lexicon)
    header["lexicon"] = nlohmann::json::parse(ckpt.lexicon->to_json_string());
  else
    header["lexicon"] = nullptr;
  header["model"] = model_header(ckpt);

  const std::string header_text = header.dump();

  std::string body;
  body.append(kMagic, sizeof(kMagic));
  append_raw(body, kVersion);
  const auto header_len = static_cast<std::uint64_t>(header_text.size());
  append_raw(body, header_len);
  body += header_text;

  std::ostringstream blocks;
  nn::write_param_blocks(blocks, model_params(ckpt));
  body += blocks.str();

  const std::uint32_t crc = crc32(body.data(), body.size());
  append_raw(body, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint path " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw IoError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  const size_t min_size = sizeof(kMagic) + sizeof(std::uint32_t) +
                          sizeof(std::uint64_t) + sizeof(std::uint32_t);
  if (bytes.size() < min_size)
    throw RuntimeFailure("checkpoint " + path + ": file truncated");

  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - sizeof(stored_crc),
              sizeof(stored_crc));
  const std::uint32_t actual_crc =
      crc32(bytes.data(), bytes.size() - sizeof(stored_crc));
  if (stored_crc != actual_crc)
    throw RuntimeFailure("checkpoint " + path + ": checksum mismatch");

  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw ValidationError("checkpoint " + path + ": bad magic");
  size_t off = sizeof(kMagic);
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + off, sizeof(version));
  off += sizeof(version);
  if (version != kVersion)
    throw ValidationError("checkpoint " + path + ": unsupported version " +
                          std::to_string(version));
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + off, sizeof(header_len));
  off += sizeof(header_len);
  if (off + header_len + sizeof(std::uint32_t) > bytes.size())
    throw RuntimeFailure("checkpoint " + path + ": file truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(off, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint " + path + ": bad header: " + e.what());
  }
  off += header_len;

  Checkpoint ckpt;
  try {
    ckpt.kind = model_kind_from_string(header.at("kind").get<std::string>());
    ckpt.train_config =
        TrainConfig::from_json_string(header.at("train_config").dump());
    ckpt.history = history_from_json(header.at("history").dump());
    if (!header.at("feature_space").is_null())
      ckpt.space = FeatureSpace::from_json_string(header.at("feature_space").dump());
    if (!header.at("lexicon").is_null())
      ckpt.lexicon = Lexicon::from_json_string(header.at("lexicon").dump());
    allocate_model(ckpt, header.at("model"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint " + path + ": bad header: " + e.what());
  }

  std::istringstream blocks(
      bytes.substr(off, bytes.size() - off - sizeof(std::uint32_t)));
  nn::read_param_blocks(blocks, model_params(ckpt));
  return ckpt;
}

void require_space_match(const Checkpoint& ckpt, const FeatureSpace& space) {
  if (!ckpt.space)
    throw ValidationError("checkpoint carries no feature space");
  if (ckpt.space->hash() != space.hash())
    throw ValidationError(
        "feature space does not match the one this checkpoint was trained with");
}

}  // namespace normseq
