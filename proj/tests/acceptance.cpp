// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hipool/cli.hpp"
#include "hipool/encoder.hpp"
#include "hipool/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hipool;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradEps = 1e-5;
constexpr double kGradBudgetSeconds = 60.0;
constexpr std::size_t kOracleMaxNodes = 64;
constexpr double kOracleBudgetSeconds = 10.0;
constexpr std::size_t kOverfitEpochs = 200;
constexpr double kOverfitBudgetSeconds = 300.0;
constexpr double kHierarchyMargin = 0.05;
constexpr double kHierarchyBudgetSeconds = 900.0;
constexpr double kLengthMargin = 0.10;
constexpr double kAggregatorFloor = 0.9;
constexpr std::size_t kSeeds = 5;

// Desk-scale setup shared by the training criteria: four 16-word segments per
// document, chunks of 16 with half overlap, so markers sit >= 2 strides apart.
constexpr std::size_t kChunkLen = 16;
constexpr std::size_t kSegments = 4;

const fs::path kFixtures = HIPOOL_FIXTURE_DIR;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "hipool");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig desk_config() {
  RunConfig cfg;
  cfg.chunk_len = kChunkLen;
  cfg.overlap = kChunkLen / 2;
  cfg.dim = 16;
  cfg.max_node = 10;
  cfg.lr = 5e-3;
  cfg.batch_size = 16;
  cfg.early_stop = false;
  return cfg;
}

class Workspace {
 public:
  Workspace() {
    std::mt19937_64 rng(std::random_device{}());
    root_ = fs::temp_directory_path() / ("hipool-acceptance-" + std::to_string(rng()));
    fs::create_directories(root_);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
  fs::path operator/(const std::string& name) const { return root_ / name; }

 private:
  fs::path root_;
};

Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  const CliResult r = cli_run({"gradcheck", "--eps", fmt("%g", kGradEps)});
  const double elapsed = seconds_since(t0);
  double err = NAN;
  const auto at = r.out.find("max relative error ");
  if (at != std::string::npos) err = std::stod(r.out.substr(at + 19));
  const bool pass = r.code == 0 && err < kGradTolerance && elapsed < kGradBudgetSeconds;
  return {pass, fmt("n=8 d=8 p=2 two layers: max rel err %.3e (< %.0e), %.2f s (< %.0f s)", err, kGradTolerance,
                    elapsed, kGradBudgetSeconds)};
}

Outcome adjacency_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::size_t cases = 0, mismatches = 0;
  for (std::size_t p : {2u, 3u, 4u}) {
    for (std::size_t n = 1; n <= kOracleMaxNodes; ++n) {
      const ClusterAssignment s = build_clusters(n, p);
      const CrossMask mask = build_cross_mask(s);
      const std::size_t m = (n + p - 1) / p;
      if (s.m != m || s.matrix.rows() != n || s.matrix.cols() != m) ++mismatches;
      for (std::size_t i = 0; i < n && s.m == m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          // Window j covers j*p .. j*p + 2p - 1.
          const double want = (i >= j * p && i < j * p + 2 * p) ? 1.0 : 0.0;
          if (s.matrix.at(i, j) != want || mask.matrix.at(i, j) != 1.0 - want) ++mismatches;
        }
      }
      // Chain adjacency and a random non-negative one, against the quadruple loop.
      Tensor weighted = Tensor::zeros(n, n);
      std::uniform_int_distribution<int> dist(0, 3);
      for (double& v : weighted.values()) v = dist(rng);
      for (const Tensor& a : {build_chain(n).matrix, weighted}) {
        const Tensor got = lift_adjacency(a, s);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < m; ++j) {
            double want = 0.0;
            for (std::size_t k = 0; k < n; ++k)
              for (std::size_t l = 0; l < n; ++l) want += s.matrix.at(k, i) * a.at(k, l) * s.matrix.at(l, j);
            if (got.at(i, j) != want) ++mismatches;
          }
        }
      }
      ++cases;
    }
  }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && elapsed < kOracleBudgetSeconds,
          fmt("%.0f (n, p) cases, %.0f mismatching entries, %.2f s (< %.0f s)", static_cast<double>(cases),
              static_cast<double>(mismatches), elapsed, kOracleBudgetSeconds)};
}

Outcome worked_examples() {
  Tape tape;
  const ClusterAssignment s = build_clusters(4, 2);
  const Var h = tape.input(Tensor::matrix({{1}, {2}, {3}, {4}}));
  const Var out = cross_attention(tape, h, pool_nodes(tape, s, h), build_cross_mask(s), tape.input(Tensor::matrix({{1}})));
  const Tensor& attention = tape.value(out);
  const Tensor lifted = lift_adjacency(build_chain(4).matrix, s);
  const bool pass = attention == Tensor::matrix({{10}, {42}}) && lifted == Tensor::matrix({{6, 3}, {3, 2}});
  return {pass, fmt("cross_attention -> [[%g],[%g]], lift_adjacency -> [[%g,%g],...]", attention[0], attention[1],
                    lifted[0], lifted[1])};
}

// Epoch of the first perfect train F1, or 0 when never reached.
std::size_t first_perfect_epoch(const TrainResult& r) {
  for (const EpochLog& row : r.log)
    if (row.train_f1 == 1.0) return row.epoch;
  return 0;
}

Outcome overfit() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = desk_config();
  cfg.epochs = kOverfitEpochs;
  const ExperimentData data = prepare_experiment(cfg, load_corpus(kFixtures / "overfit64.jsonl"), nullptr, nullptr);
  std::size_t reached = 0;
  std::string epochs;
  for (std::size_t seed = 0; seed < kSeeds; ++seed) {
    cfg.seed = seed;
    const std::size_t e = first_perfect_epoch(run_experiment(cfg, data).result);
    reached += e > 0;
    epochs += (epochs.empty() ? "" : ",") + (e > 0 ? std::to_string(e) : std::string("never"));
  }
  const double elapsed = seconds_since(t0);
  return {reached == kSeeds && elapsed < kOverfitBudgetSeconds,
          fmt("%.0f/%.0f seeds reach train micro-F1 1.0 within %.0f epochs", static_cast<double>(reached),
              static_cast<double>(kSeeds), static_cast<double>(kOverfitEpochs)) +
              " (first at epochs " + epochs + ")" + fmt(", %.1f s (< %.0f s)", elapsed, kOverfitBudgetSeconds)};
}

struct SynthSplit {
  LabeledCorpus train, dev, test;
};

SynthSplit longrange_split() {
  const LabeledCorpus corpus = synth_longrange(1000, 2, kSegments, kChunkLen, 2024);
  CorpusSplit parts = split(corpus, {0.8, 0.1, 0.1}, 2024);
  return {std::move(parts.train), std::move(parts.dev), std::move(parts.test)};
}

Outcome hierarchy_comparison(const SynthSplit& data) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = desk_config();
  cfg.epochs = 40;
  double hipool_sum = 0.0, simple_sum = 0.0;
  for (Aggregator agg : {Aggregator::kSum, Aggregator::kSimple}) {
    cfg.aggregator = agg;
    const ExperimentData prepared = prepare_experiment(cfg, data.train, &data.dev, &data.test);
    for (std::size_t seed = 0; seed < kSeeds; ++seed) {
      cfg.seed = seed;
      const double f1 = run_experiment(cfg, prepared).test_f1.value();
      (agg == Aggregator::kSimple ? simple_sum : hipool_sum) += f1;
    }
  }
  const double hipool = hipool_sum / kSeeds, simple = simple_sum / kSeeds;
  const double elapsed = seconds_since(t0);
  return {hipool - simple >= kHierarchyMargin && elapsed < kHierarchyBudgetSeconds,
          fmt("1000 docs, 5 seeds: HiPool test F1 %.4f vs Simple %.4f, margin %.4f (>= %.2f)", hipool, simple,
              hipool - simple, kHierarchyMargin) +
              fmt(", %.1f s (< %.0f s)", elapsed, kHierarchyBudgetSeconds)};
}

Outcome length_ablation(const SynthSplit& data, const Workspace& ws) {
  save_corpus(ws / "lr.train.jsonl", data.train);
  save_corpus(ws / "lr.dev.jsonl", data.dev);
  save_corpus(ws / "lr.test.jsonl", data.test);
  RunConfig cfg = desk_config();
  cfg.epochs = 40;
  cfg.train_path = (ws / "lr.train.jsonl").string();
  cfg.dev_path = (ws / "lr.dev.jsonl").string();
  cfg.test_path = (ws / "lr.test.jsonl").string();
  cfg.output_dir = (ws / "ablate").string();
  std::ofstream(ws / "ablate.json") << to_json(cfg).dump(1);

  // The first marker lies in the first half of the document, the second in the other half.
  const std::size_t one_marker = (kSegments / 2) * kChunkLen;
  const std::size_t both_markers = kSegments * kChunkLen;
  const CliResult r = cli_run({"ablate-length", (ws / "ablate.json").string(), "--lengths",
                               std::to_string(one_marker) + "," + std::to_string(both_markers), "--seeds",
                               std::to_string(kSeeds)});
  if (r.code != 0) return {false, "ablate-length exited with " + std::to_string(r.code) + ": " + r.err};
  std::istringstream table(r.out);
  std::string header;
  std::getline(table, header);
  std::size_t len_one = 0, len_both = 0;
  double f1_one = NAN, f1_both = NAN;
  table >> len_one >> f1_one >> len_both >> f1_both;
  return {f1_both - f1_one >= kLengthMargin,
          fmt("mean test F1 at %.0f tokens %.4f vs %.0f tokens %.4f", static_cast<double>(len_both), f1_both,
              static_cast<double>(len_one), f1_one) +
              fmt(", margin %.4f (>= %.2f)", f1_both - f1_one, kLengthMargin)};
}

Outcome aggregator_variants() {
  RunConfig cfg = desk_config();
  cfg.epochs = kOverfitEpochs;
  const LabeledCorpus corpus = load_corpus(kFixtures / "overfit64.jsonl");
  bool pass = true;
  std::string detail;
  for (Aggregator agg : {Aggregator::kSum, Aggregator::kMean, Aggregator::kStd}) {
    cfg.aggregator = agg;
    const ExperimentData data = prepare_experiment(cfg, corpus, nullptr, nullptr);
    double best = 0.0;
    for (const EpochLog& row : run_experiment(cfg, data).result.log) best = std::max(best, row.train_f1);
    pass = pass && best >= kAggregatorFloor;
    detail += (detail.empty() ? "" : ", ") + std::string(to_string(agg)) + fmt(" %.4f", best);
  }
  return {pass, "best train F1 " + detail + fmt(" (>= %.1f)", kAggregatorFloor)};
}

Outcome stats_correctness() {
  const CliResult r = cli_run({"stats", (kFixtures / "stats_1000.jsonl").string(), "--json"});
  if (r.code != 0) return {false, "stats exited with " + std::to_string(r.code)};
  const nlohmann::json got = nlohmann::json::parse(r.out);
  const nlohmann::json want = nlohmann::json::parse(slurp(kFixtures / "stats_1000.expected.json"));
  std::size_t matched = 0;
  std::string wrong;
  for (const auto& [key, value] : want.items()) {
    if (got.contains(key) && got[key] == value) {
      ++matched;
    } else {
      wrong += " " + key;
    }
  }
  // The plain report must carry the same seven values.
  const CliResult text = cli_run({"stats", (kFixtures / "stats_1000.jsonl").string()});
  const bool report_ok = text.code == 0 && text.out.find(fmt("Mean    %.2f", want["mean"].get<double>())) != std::string::npos &&
                         text.out.find("95pt.   " + std::to_string(want["p95"].get<std::size_t>())) != std::string::npos;
  return {matched == 7 && report_ok, fmt("%.0f/7 statistics equal the independent script's", static_cast<double>(matched)) +
                                         (wrong.empty() ? "" : "; differing:" + wrong) +
                                         (report_ok ? "" : "; text report disagrees")};
}

Outcome determinism(const Workspace& ws) {
  RunConfig cfg = desk_config();
  cfg.epochs = 8;
  cfg.train_path = (kFixtures / "overfit64.jsonl").string();
  cfg.dev_path = cfg.train_path;
  cfg.early_stop = true;
  cfg.output_dir = (ws / "det").string();
  std::ofstream(ws / "det.json") << to_json(cfg).dump(1);

  std::vector<std::vector<std::string>> commands{
      {"train", (ws / "det.json").string()},
      {"synth", "--docs", "50", "--seed", "3", "--out", (ws / "det" / "synth.jsonl").string()},
      {"split", cfg.train_path, "--seed", "9", "--out-dir", (ws / "det" / "parts").string()},
      {"eval", (ws / "det" / "checkpoint.json").string(), cfg.train_path, "--json"},
      {"gradcheck"},
      {"stats", cfg.train_path},
  };
  const std::vector<std::string> files{"metrics.jsonl", "checkpoint.json", "vocab.txt", "synth.jsonl",
                                       "parts/overfit64.train.jsonl", "parts/overfit64.test.jsonl"};
  std::vector<std::string> outputs[2];
  for (int round = 0; round < 2; ++round) {
    fs::remove_all(ws / "det");
    fs::create_directories(ws / "det");
    for (const auto& cmd : commands) {
      const CliResult r = cli_run(cmd);
      outputs[round].push_back(std::to_string(r.code) + "\n" + r.out);
    }
    for (const std::string& f : files) outputs[round].push_back(slurp(ws / "det" / f));
  }
  std::size_t identical = 0;
  for (std::size_t i = 0; i < outputs[0].size(); ++i) identical += outputs[0][i] == outputs[1][i] && !outputs[0][i].empty();
  return {identical == outputs[0].size(),
          fmt("%.0f/%.0f outputs byte-identical across two runs (6 commands, 6 artifact files)",
              static_cast<double>(identical), static_cast<double>(outputs[0].size()))};
}

}  // namespace

int main() {
  Workspace ws;
  const SynthSplit longrange = longrange_split();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient fidelity", gradient_fidelity},
      {"adjacency oracle equivalence", adjacency_oracles},
      {"worked-example fidelity", worked_examples},
      {"overfit", overfit},
      {"hierarchy comparison", [&] { return hierarchy_comparison(longrange); }},
      {"length ablation direction", [&] { return length_ablation(longrange, ws); }},
      {"aggregator variants", aggregator_variants},
      {"stats correctness", stats_correctness},
      {"determinism", [&] { return determinism(ws); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
