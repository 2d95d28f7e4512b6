#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hipool/run_config.hpp"

namespace hipool {

// Prepared splits plus the vocabulary they were encoded with.
struct ExperimentData {
  Vocabulary vocab;
  bool external = false;
  std::size_t num_classes = 0;
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
};

// Encodes every non-null split with the config's chunking options. The
// vocabulary is `vocab` when given, otherwise built from the training texts;
// with embeddings_path set, chunk vectors come from that file instead.
ExperimentData prepare_experiment(const RunConfig& cfg, const LabeledCorpus& train, const LabeledCorpus* dev,
                                  const LabeledCorpus* test, const Vocabulary* vocab = nullptr);
// Same, reading the corpora named by train_path, dev_path and test_path.
ExperimentData load_experiment(const RunConfig& cfg);

struct RunOutcome {
  Model model;
  TrainResult result;
  std::optional<double> test_f1;
};

// Initializes a model from cfg.seed, trains it and scores the test split when present.
RunOutcome run_experiment(const RunConfig& cfg, const ExperimentData& data, const EpochCallback& on_epoch = nullptr);

}  // namespace hipool
