#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hipool/model.hpp"

namespace hipool {

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers, one pair per parameter tensor.
struct OptimizerState {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::size_t step = 0;
};

// One bias-corrected Adam update from the tensors' grad buffers. A tensor
// without a grad buffer counts as a zero gradient. Buffers are created on the
// first call; a later shape disagreement throws DimensionError.
void adam_step(std::span<Tensor* const> params, OptimizerState& state, const AdamConfig& cfg);

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct F1Result {
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<ClassCounts> per_class;
};

// Micro-F1 from TP/FP/FN pooled over classes. For single-label predictions it
// equals accuracy; a disagreement throws std::logic_error.
F1Result micro_f1(std::span<const std::size_t> predicted, std::span<const std::size_t> gold, std::size_t num_classes);

struct EvalResult {
  double micro_f1 = 0.0;
  double mean_loss = 0.0;
  std::vector<ClassCounts> per_class;
  std::vector<std::size_t> predictions;
};

// Argmax prediction per example. Throws DomainError on an empty set.
EvalResult evaluate(const Model& model, std::span<const Example> examples);

struct TrainConfig {
  double lr = 1e-5;
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  bool early_stop = true;
  std::size_t patience = 3;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;  // mean training cross-entropy after the epoch's updates
  double train_f1 = 0.0;
  std::optional<double> dev_f1;
};

nlohmann::ordered_json to_json(const EpochLog& row);

struct TrainResult {
  std::vector<EpochLog> log;
  bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Mini-batch Adam on the mean batch cross-entropy. The seed drives the
// per-epoch shuffle. With a non-empty dev set and early_stop on, training
// stops after `patience` epochs without a dev micro-F1 improvement; the model
// keeps the parameters of the last logged epoch.
TrainResult train(Model& model, std::span<const Example> train_set, std::span<const Example> dev_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = nullptr);

inline constexpr const char* kCheckpointFormat = "hipool-checkpoint-v1";

struct Checkpoint {
  nlohmann::json config;
  std::string vocab_ref;
  std::map<std::string, Tensor> tensors;
};

Checkpoint make_checkpoint(Model& model, nlohmann::json config, std::string vocab_ref);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// FormatError on malformed JSON or a wrong format tag.
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Rebuilds a model from checkpoint tensors; SchemaError when a tensor is missing or misshapen.
Model restore_model(const ModelConfig& config, const Checkpoint& ckpt);

}  // namespace hipool
