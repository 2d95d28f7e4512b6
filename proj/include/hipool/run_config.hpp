#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hipool/model.hpp"
#include "hipool/trainer.hpp"

namespace hipool {

// Every tunable of a run. Defaults follow the published HiPool setup where
// it states one (chunk length 300 with half overlap, stride 2, two layers,
// lr 1e-5, 10 epochs); the rest are conventional choices.
struct RunConfig {
  std::size_t chunk_len = kDefaultChunkLength;
  std::size_t overlap = kDefaultOverlap;
  std::size_t cluster_stride = 2;
  std::size_t num_layers = 2;
  std::size_t dim = 32;
  std::size_t max_node = 10;
  Aggregator aggregator = Aggregator::kSum;
  LowAdjacency low_adjacency = LowAdjacency::kChain;
  bool attention_softmax = false;
  bool chunk_ffn = false;

  double lr = 1e-5;
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  bool early_stop = true;
  std::size_t patience = 3;

  std::size_t max_tokens = 0;   // head truncation; 0 keeps whole documents
  std::size_t min_count = 1;    // vocabulary frequency cutoff
  std::size_t max_vocab = 0;    // 0 means unlimited
  std::size_t num_classes = 0;  // 0 infers from the training labels

  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string embeddings_path;  // chunk vectors from file instead of the token encoder
  std::string output_dir = "hipool-run";
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
// Unknown keys and wrongly typed values throw ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
// Applies one "key=value" override, parsing value by the key's type.
void apply_override(RunConfig& cfg, const std::string& assignment);

// Human-readable list of violated preconditions; empty when the config is usable.
std::vector<std::string> validate(const RunConfig& cfg, bool needs_training_data);

ChunkingOptions chunking_options(const RunConfig& cfg);
EncoderConfig encoder_config(const RunConfig& cfg);
TrainConfig train_config(const RunConfig& cfg);
ModelConfig model_config(const RunConfig& cfg, std::size_t vocab_size, std::size_t num_classes);

}  // namespace hipool
