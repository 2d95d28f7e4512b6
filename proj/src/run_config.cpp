#include "hipool/run_config.hpp"

#include <fstream>
#include <set>

#include "hipool/errors.hpp"

namespace hipool {

using nlohmann::json;
using nlohmann::ordered_json;

nlohmann::ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["chunk_len"] = c.chunk_len;
  j["overlap"] = c.overlap;
  j["cluster_stride"] = c.cluster_stride;
  j["num_layers"] = c.num_layers;
  j["dim"] = c.dim;
  j["max_node"] = c.max_node;
  j["aggregator"] = std::string(to_string(c.aggregator));
  j["low_adjacency"] = std::string(to_string(c.low_adjacency));
  j["attention_softmax"] = c.attention_softmax;
  j["chunk_ffn"] = c.chunk_ffn;
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["early_stop"] = c.early_stop;
  j["patience"] = c.patience;
  j["max_tokens"] = c.max_tokens;
  j["min_count"] = c.min_count;
  j["max_vocab"] = c.max_vocab;
  j["num_classes"] = c.num_classes;
  j["train_path"] = c.train_path;
  j["dev_path"] = c.dev_path;
  j["test_path"] = c.test_path;
  j["embeddings_path"] = c.embeddings_path;
  j["output_dir"] = c.output_dir;
  return j;
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(std::string("config key '") + key + "' must be a boolean");
    dst = v.get<bool>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
    dst = v.get<double>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(std::string("config key '") + key + "' must be a string");
    dst = v.get<std::string>();
  } else {
    if (!v.is_number_unsigned()) throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
    dst = v.get<T>();
  }
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const std::set<std::string> known = [] {
    std::set<std::string> keys;
    const ordered_json defaults = to_json(RunConfig{});
    for (const auto& [k, v] : defaults.items()) keys.insert(k);
    return keys;
  }();
  for (const auto& [k, v] : j.items()) {
    if (known.count(k) == 0) throw ConfigError("unknown config key '" + k + "'");
  }
  RunConfig c;
  read(j, "chunk_len", c.chunk_len);
  read(j, "overlap", c.overlap);
  read(j, "cluster_stride", c.cluster_stride);
  read(j, "num_layers", c.num_layers);
  read(j, "dim", c.dim);
  read(j, "max_node", c.max_node);
  std::string name;
  if (j.contains("aggregator")) {
    read(j, "aggregator", name);
    c.aggregator = parse_aggregator(name);
  }
  if (j.contains("low_adjacency")) {
    read(j, "low_adjacency", name);
    c.low_adjacency = parse_low_adjacency(name);
  }
  read(j, "attention_softmax", c.attention_softmax);
  read(j, "chunk_ffn", c.chunk_ffn);
  read(j, "lr", c.lr);
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batch_size);
  read(j, "seed", c.seed);
  read(j, "early_stop", c.early_stop);
  read(j, "patience", c.patience);
  read(j, "max_tokens", c.max_tokens);
  read(j, "min_count", c.min_count);
  read(j, "max_vocab", c.max_vocab);
  read(j, "num_classes", c.num_classes);
  read(j, "train_path", c.train_path);
  read(j, "dev_path", c.dev_path);
  read(j, "test_path", c.test_path);
  read(j, "embeddings_path", c.embeddings_path);
  read(j, "output_dir", c.output_dir);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  ordered_json current = to_json(cfg);
  if (!current.contains(key)) throw ConfigError("unknown config key '" + key + "'");

  json parsed;
  const ordered_json& slot = current[key];
  if (slot.is_string()) {
    parsed = value;
  } else {
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      throw ConfigError("cannot parse value '" + value + "' for config key '" + key + "'");
    }
  }
  json merged = json::parse(current.dump());
  merged[key] = parsed;
  cfg = run_config_from_json(merged);
}

std::vector<std::string> validate(const RunConfig& c, bool needs_training_data) {
  std::vector<std::string> errors;
  if (c.chunk_len < 1) errors.push_back("chunk_len: must be at least 1");
  if (c.overlap >= c.chunk_len) errors.push_back("overlap: must be smaller than chunk_len");
  if (c.cluster_stride < 1) errors.push_back("cluster_stride: must be at least 1");
  if (c.num_layers < 1 && c.aggregator != Aggregator::kSimple) errors.push_back("num_layers: must be at least 1");
  if (c.dim < 1) errors.push_back("dim: must be at least 1");
  if (c.max_node < 1) errors.push_back("max_node: must be at least 1");
  if (!(c.lr >= 0.0)) errors.push_back("lr: must be non-negative");
  if (c.epochs < 1) errors.push_back("epochs: must be at least 1");
  if (c.batch_size < 1) errors.push_back("batch_size: must be at least 1");
  if (c.early_stop && c.patience < 1) errors.push_back("patience: must be at least 1 when early_stop is on");
  if (c.min_count < 1) errors.push_back("min_count: must be at least 1");
  if (c.max_vocab == 1 || c.max_vocab == 2) errors.push_back("max_vocab: must be 0 or larger than the 2 reserved ids");
  if (c.num_classes == 1) errors.push_back("num_classes: must be 0 (infer) or at least 2");
  if (needs_training_data && c.train_path.empty()) errors.push_back("train_path: required");
  if (c.output_dir.empty()) errors.push_back("output_dir: required");
  return errors;
}

ChunkingOptions chunking_options(const RunConfig& c) { return {c.chunk_len, c.overlap, c.max_node, c.max_tokens}; }

EncoderConfig encoder_config(const RunConfig& c) {
  return {c.cluster_stride, c.num_layers, c.aggregator, c.low_adjacency, c.attention_softmax};
}

TrainConfig train_config(const RunConfig& c) {
  return {c.lr, c.epochs, c.batch_size, c.seed, c.early_stop, c.patience};
}

ModelConfig model_config(const RunConfig& c, std::size_t vocab_size, std::size_t num_classes) {
  return {vocab_size, c.dim, num_classes, encoder_config(c), c.chunk_ffn};
}

}  // namespace hipool
