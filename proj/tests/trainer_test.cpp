#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "hipool/errors.hpp"
#include "hipool/pipeline.hpp"
#include "support.hpp"

namespace hipool {
namespace {

using testing::fixture;
using testing::TempDir;

RunConfig overfit_config() {
  RunConfig cfg;
  cfg.chunk_len = 16;
  cfg.overlap = 8;
  cfg.dim = 16;
  cfg.lr = 5e-3;
  cfg.batch_size = 16;
  cfg.epochs = 200;
  cfg.early_stop = false;
  return cfg;
}

ExperimentData overfit_data(const RunConfig& cfg) {
  return prepare_experiment(cfg, load_corpus(fixture("overfit64.jsonl")), nullptr, nullptr);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Tensor p = Tensor::matrix({{1.5, -2.0}});
  p.zero_grad();
  const Tensor before = p;
  std::vector<Tensor*> params{&p};
  OptimizerState state;
  adam_step(params, state, {0.1});
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor p = Tensor::matrix({{0.0}});
  p.grad()[0] = 1.0;
  std::vector<Tensor*> params{&p};
  OptimizerState state;
  adam_step(params, state, {0.1});
  // m_hat = v_hat = 1 after bias correction, so the step is lr / (1 + eps).
  EXPECT_NEAR(p[0], -0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, StateShapeMismatch) {
  Tensor a = Tensor::zeros(1, 2), b = Tensor::zeros(1, 3);
  std::vector<Tensor*> one{&a};
  std::vector<Tensor*> two{&a, &b};
  OptimizerState state;
  adam_step(one, state, {});
  EXPECT_THROW(adam_step(two, state, {}), DimensionError);
}

TEST(MicroF1, Examples) {
  const std::vector<std::size_t> gold{1, 0, 1};
  EXPECT_DOUBLE_EQ(micro_f1(gold, gold, 2).micro_f1, 1.0);
  const std::vector<std::size_t> ones{1, 1, 1};
  const F1Result r = micro_f1(ones, gold, 2);
  EXPECT_DOUBLE_EQ(r.micro_f1, 2.0 / 3.0);
  EXPECT_EQ(r.per_class[1].tp, 2u);
  EXPECT_EQ(r.per_class[1].fp, 1u);
  EXPECT_EQ(r.per_class[0].fn, 1u);
  const std::vector<std::size_t> wrong{0, 1, 0};
  EXPECT_DOUBLE_EQ(micro_f1(wrong, gold, 2).micro_f1, 0.0);
  EXPECT_THROW(micro_f1({}, {}, 2), DomainError);
}

TEST(MicroF1, EqualsAccuracyOnRandomLabels) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng() % 5, n = 1 + rng() % 40;
    std::vector<std::size_t> p(n), g(n);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng() % k;
      g[i] = rng() % k;
      hits += p[i] == g[i];
    }
    EXPECT_DOUBLE_EQ(micro_f1(p, g, k).micro_f1, static_cast<double>(hits) / static_cast<double>(n));
  }
}

TEST(Evaluate, EmptyDataset) {
  ModelConfig mc;
  mc.vocab_size = 4;
  mc.dim = 2;
  EXPECT_THROW(evaluate(Model(mc, 0), {}), DomainError);
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  RunConfig cfg = overfit_config();
  cfg.lr = 0.0;
  cfg.epochs = 3;
  const ExperimentData data = overfit_data(cfg);
  const Model fresh(model_config(cfg, data.vocab.size(), data.num_classes), cfg.seed);
  const RunOutcome run = run_experiment(cfg, data);
  EXPECT_EQ(run.model.params().embedding, fresh.params().embedding);
  EXPECT_EQ(run.model.params().head.weight, fresh.params().head.weight);
  ASSERT_EQ(run.result.log.size(), 3u);
  EXPECT_EQ(run.result.log[0].loss, run.result.log[2].loss);
}

TEST(Train, SameSeedIsBitwiseIdentical) {
  RunConfig cfg = overfit_config();
  cfg.epochs = 5;
  const ExperimentData data = overfit_data(cfg);
  const RunOutcome a = run_experiment(cfg, data);
  const RunOutcome b = run_experiment(cfg, data);
  const ModelParams& pa = a.model.params();
  const ModelParams& pb = b.model.params();
  EXPECT_EQ(pa.embedding, pb.embedding);
  for (std::size_t l = 0; l < pa.layers.size(); ++l) {
    EXPECT_EQ(pa.layers[l].attention, pb.layers[l].attention);
    EXPECT_EQ(pa.layers[l].gcn, pb.layers[l].gcn);
  }
  for (std::size_t e = 0; e < a.result.log.size(); ++e) EXPECT_EQ(a.result.log[e].loss, b.result.log[e].loss);
}

TEST(Train, OverfitsSyntheticFixture) {
  const RunConfig cfg = overfit_config();
  const RunOutcome run = run_experiment(cfg, overfit_data(cfg));
  EXPECT_EQ(run.result.log.back().train_f1, 1.0);
}

TEST(Train, EarlyStopOnFlatDev) {
  RunConfig cfg = overfit_config();
  cfg.lr = 0.0;
  cfg.epochs = 20;
  cfg.early_stop = true;
  cfg.patience = 3;
  const LabeledCorpus corpus = load_corpus(fixture("overfit64.jsonl"));
  const ExperimentData data = prepare_experiment(cfg, corpus, &corpus, nullptr);
  const RunOutcome run = run_experiment(cfg, data);
  // Epoch 1 sets the best dev score; three more without improvement stop the run.
  EXPECT_EQ(run.result.log.size(), 4u);
  EXPECT_TRUE(run.result.stopped_early);
}

TEST(Train, ReportsEveryEpochThroughCallback) {
  RunConfig cfg = overfit_config();
  cfg.epochs = 4;
  std::vector<std::size_t> seen;
  run_experiment(cfg, overfit_data(cfg), [&](const EpochLog& row) { seen.push_back(row.epoch); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3, 4}));
}

TEST(Checkpoint, RoundTripReproducesPredictions) {
  TempDir dir("ckpt");
  RunConfig cfg = overfit_config();
  cfg.epochs = 3;
  cfg.chunk_ffn = true;
  const ExperimentData data = overfit_data(cfg);
  RunOutcome run = run_experiment(cfg, data);
  save_checkpoint(dir / "c.json", make_checkpoint(run.model, {{"note", 1}}, "vocab.txt"));
  const Checkpoint back = load_checkpoint(dir / "c.json");
  EXPECT_EQ(back.vocab_ref, "vocab.txt");
  EXPECT_EQ(back.config["note"], 1);
  const Model restored = restore_model(run.model.config(), back);
  for (const Example& ex : data.train) EXPECT_EQ(restored.predict_logits(ex), run.model.predict_logits(ex));
}

TEST(Checkpoint, ShapeMismatchIsSchemaError) {
  TempDir dir("ckpt");
  ModelConfig mc;
  mc.vocab_size = 5;
  mc.dim = 3;
  Model model(mc, 0);
  save_checkpoint(dir / "c.json", make_checkpoint(model, {}, ""));
  mc.dim = 4;
  EXPECT_THROW(restore_model(mc, load_checkpoint(dir / "c.json")), SchemaError);
  mc.dim = 3;
  mc.chunk_ffn = true;
  EXPECT_THROW(restore_model(mc, load_checkpoint(dir / "c.json")), SchemaError);
}

TEST(Checkpoint, RejectsForeignFiles) {
  TempDir dir("ckpt");
  std::ofstream(dir / "x.json") << R"({"format": "other", "tensors": {}})";
  EXPECT_THROW(load_checkpoint(dir / "x.json"), FormatError);
  std::ofstream(dir / "y.json") << "not json";
  EXPECT_THROW(load_checkpoint(dir / "y.json"), FormatError);
}

}  // namespace
}  // namespace hipool
