#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>

#include "hipool/cli.hpp"
#include "hipool/errors.hpp"
#include "hipool/grad_check.hpp"
#include "hipool/pipeline.hpp"

namespace hipool::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

RunConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides, RunConfig base = {}) {
  RunConfig cfg = path.empty() ? base : load_run_config(path);
  for (const std::string& o : overrides) apply_override(cfg, o);
  return cfg;
}

// Prints every violated field and returns false when the config is unusable.
bool check_config(const RunConfig& cfg, bool needs_training_data, std::ostream& err) {
  const std::vector<std::string> problems = validate(cfg, needs_training_data);
  for (const std::string& p : problems) err << "invalid config: " << p << '\n';
  return problems.empty();
}

int cmd_stats(const std::string& corpus_path, bool as_json, std::ostream& out) {
  const LabeledCorpus corpus = load_corpus(corpus_path);
  const CorpusStats s = stats(corpus);
  if (as_json) {
    out << stats_to_json(s, corpus.name) << '\n';
  } else {
    out << format_stats_report(s);
  }
  return kSuccess;
}

int cmd_split(const std::string& corpus_path, const std::vector<double>& ratios, std::uint64_t seed,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  if (ratios.size() != 3) throw ConfigError("--ratios needs exactly three values");
  const LabeledCorpus corpus = load_corpus(corpus_path);
  const CorpusSplit parts = split(corpus, {ratios[0], ratios[1], ratios[2]}, seed);
  for (const std::string& w : parts.warnings) err << "warning: " << w << '\n';
  fs::create_directories(out_dir);
  const std::string stem = fs::path(corpus_path).stem().string();
  for (const auto& [suffix, part] : {std::pair{"train", &parts.train}, {"dev", &parts.dev}, {"test", &parts.test}}) {
    const fs::path path = fs::path(out_dir) / (stem + "." + suffix + ".jsonl");
    save_corpus(path, *part);
    out << suffix << '\t' << part->size() << '\t' << path.string() << '\n';
  }
  return kSuccess;
}

int cmd_synth(std::size_t docs, std::size_t classes, std::size_t chunks, std::size_t chunk_len, std::uint64_t seed,
              const std::string& out_path, std::ostream& out) {
  const LabeledCorpus corpus = synth_longrange(docs, classes, chunks, chunk_len, seed);
  save_corpus(out_path, corpus);
  out << "wrote " << corpus.size() << " documents to " << out_path << '\n';
  return kSuccess;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!check_config(cfg, true, err)) return kUsageError;
  const ExperimentData data = load_experiment(cfg);

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  std::ofstream metrics(dir / "metrics.jsonl", std::ios::binary);
  if (!metrics) throw FormatError("cannot write " + (dir / "metrics.jsonl").string());

  RunOutcome run = run_experiment(cfg, data, [&](const EpochLog& row) {
    metrics << to_json(row).dump() << '\n';
    out << "epoch " << row.epoch << "  loss " << std::setprecision(6) << row.loss << "  train_f1 "
        << fixed4(row.train_f1) << "  dev_f1 " << (row.dev_f1 ? fixed4(*row.dev_f1) : "n/a") << '\n';
  });
  metrics.close();

  std::string vocab_ref;
  if (!data.external) {
    vocab_ref = "vocab.txt";
    data.vocab.save(dir / vocab_ref);
  }
  json config;
  config["run"] = json::parse(to_json(cfg).dump());
  config["model"] = {{"vocab_size", data.external ? 0 : data.vocab.size()}, {"num_classes", data.num_classes}};
  save_checkpoint(dir / "checkpoint.json", make_checkpoint(run.model, config, vocab_ref));

  const EpochLog& last = run.result.log.back();
  out << "final train micro-F1: " << fixed4(last.train_f1) << '\n';
  out << "final dev micro-F1: " << (last.dev_f1 ? fixed4(*last.dev_f1) : "n/a") << '\n';
  if (run.test_f1) out << "test micro-F1: " << fixed4(*run.test_f1) << '\n';
  return kSuccess;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& corpus_path, bool as_json, std::ostream& out,
             std::ostream& err) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (!ckpt.config.contains("run") || !ckpt.config.contains("model")) {
    throw FormatError("checkpoint config lacks run/model sections");
  }
  const RunConfig cfg = run_config_from_json(ckpt.config["run"]);
  const std::size_t vocab_size = ckpt.config["model"].value("vocab_size", std::size_t{0});
  const std::size_t num_classes = ckpt.config["model"].value("num_classes", std::size_t{0});
  const Model model = restore_model(model_config(cfg, vocab_size, num_classes), ckpt);

  const LabeledCorpus corpus = load_corpus(corpus_path);
  if (corpus.class_count > num_classes) {
    err << "class-count mismatch: corpus " << corpus_path << " has labels up to " << corpus.class_count - 1
        << " but the checkpoint classifies " << num_classes << " classes\n";
    return kUsageError;
  }

  std::vector<Example> examples;
  if (!cfg.embeddings_path.empty()) {
    examples = prepare_examples(corpus, load_external(cfg.embeddings_path, cfg.dim), cfg.max_node);
  } else {
    const Vocabulary vocab = Vocabulary::load(fs::path(checkpoint_path).parent_path() / ckpt.vocab_ref);
    if (vocab.size() != vocab_size) throw SchemaError("vocabulary size does not match the checkpoint");
    examples = prepare_examples(corpus, vocab, chunking_options(cfg));
  }
  const EvalResult result = evaluate(model, examples);
  if (as_json) {
    nlohmann::ordered_json j;
    j["micro_f1"] = result.micro_f1;
    j["documents"] = examples.size();
    j["mean_loss"] = result.mean_loss;
    nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
    for (const ClassCounts& c : result.per_class) per_class.push_back({{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}});
    j["per_class"] = std::move(per_class);
    out << j.dump() << '\n';
  } else {
    out << "micro-F1: " << fixed4(result.micro_f1) << '\n';
  }
  return kSuccess;
}

// Small model used when gradcheck runs without a config file.
RunConfig gradcheck_preset() {
  RunConfig cfg;
  cfg.chunk_len = 8;
  cfg.overlap = 4;
  cfg.max_node = 8;
  cfg.dim = 8;
  cfg.num_classes = 2;
  return cfg;
}

int cmd_gradcheck(const RunConfig& cfg, double eps, std::ostream& out, std::ostream& err) {
  if (!check_config(cfg, false, err)) return kUsageError;
  constexpr std::size_t kVocab = 24;
  constexpr std::size_t kDocs = 2;
  const std::size_t classes = std::max<std::size_t>(cfg.num_classes, 2);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<TokenId> token(0, kVocab - 1);
  std::vector<Example> examples;
  for (std::size_t d = 0; d < kDocs; ++d) {
    ChunkSequence cs;
    cs.length = cfg.chunk_len;
    cs.overlap = cfg.overlap;
    for (std::size_t c = 0; c < cfg.max_node; ++c) {
      std::vector<TokenId> ids(cfg.chunk_len);
      for (TokenId& t : ids) t = token(rng);
      cs.chunks.push_back(std::move(ids));
    }
    examples.push_back({"gradcheck-" + std::to_string(d), std::move(cs), d % classes});
  }

  Model model(model_config(cfg, kVocab, classes), cfg.seed);
  const LossBuilder loss_fn = [&](Tape& tape) {
    const Model::Bound bound = model.bind(tape);
    Var total;
    for (const Example& ex : examples) {
      const Var l = model.loss(tape, bound, ex);
      total = total.valid() ? tape.add(total, l) : l;
    }
    return tape.scale(total, 1.0 / static_cast<double>(examples.size()));
  };
  const std::vector<Tensor*> params = model.parameters();
  const GradCheckReport report = grad_check(loss_fn, params, eps);
  const bool pass = report.max_relative_error < 1e-4;
  out << "gradcheck: max relative error " << std::scientific << std::setprecision(3) << report.max_relative_error
      << " over " << report.entries_checked << " entries (eps=" << eps << ", nodes=" << cfg.max_node
      << ", dim=" << cfg.dim << ", layers=" << cfg.num_layers << ")\n";
  out << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kSuccess : kCheckFailed;
}

int cmd_ablate_length(const RunConfig& cfg, const std::vector<std::size_t>& lengths, std::size_t seeds,
                      std::ostream& out, std::ostream& err) {
  if (!check_config(cfg, true, err)) return kUsageError;
  if (lengths.empty()) throw ConfigError("--lengths needs at least one value");
  for (std::size_t i = 1; i < lengths.size(); ++i) {
    if (lengths[i] <= lengths[i - 1]) throw ConfigError("--lengths must be strictly ascending");
  }
  if (seeds < 1) throw ConfigError("--seeds must be at least 1");
  if (!cfg.embeddings_path.empty()) throw ConfigError("ablate-length needs token input, not external embeddings");

  const LabeledCorpus train = load_corpus(cfg.train_path);
  std::optional<LabeledCorpus> dev, test;
  if (!cfg.dev_path.empty()) dev = load_corpus(cfg.dev_path);
  if (!cfg.test_path.empty()) test = load_corpus(cfg.test_path);
  const LabeledCorpus* scored = test ? &*test : dev ? &*dev : &train;

  // One vocabulary for every length, built from the untruncated training texts.
  const ExperimentData full = prepare_experiment(cfg, train, nullptr, nullptr);
  out << "length\tf1\n";
  for (std::size_t length : lengths) {
    RunConfig run_cfg = cfg;
    run_cfg.max_tokens = length;
    ExperimentData data = prepare_experiment(run_cfg, train, dev ? &*dev : nullptr, scored, &full.vocab);
    double total = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
      run_cfg.seed = cfg.seed + s;
      total += run_experiment(run_cfg, data).test_f1.value();
    }
    out << length << '\t' << fixed4(total / static_cast<double>(seeds)) << '\n';
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"HiPool hierarchical graph pooling for long-document classification"};
  app.require_subcommand(1);

  std::string corpus_path, config_path, checkpoint_path, out_path;
  std::vector<std::string> overrides;
  bool as_json = false;

  auto* stats_cmd = app.add_subcommand("stats", "Token-length statistics of a corpus");
  stats_cmd->add_option("corpus", corpus_path, "Line-delimited corpus file")->required();
  stats_cmd->add_flag("--json", as_json, "Emit a machine-readable record");

  std::vector<double> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  auto* split_cmd = app.add_subcommand("split", "Seeded train/dev/test split");
  split_cmd->add_option("corpus", corpus_path, "Line-delimited corpus file")->required();
  split_cmd->add_option("--ratios", ratios, "train,dev,test ratios")->delimiter(',')->expected(3);
  split_cmd->add_option("--seed", seed, "Shuffle seed");
  split_cmd->add_option("--out-dir", out_path, "Directory for the three partitions")->required();

  std::size_t docs = 64, classes = 2, chunks = 4, chunk_len = 16;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic long-range corpus");
  synth_cmd->add_option("--docs", docs, "Number of documents");
  synth_cmd->add_option("--classes", classes, "Number of classes");
  synth_cmd->add_option("--chunks", chunks, "Segments of chunk-len words per document");
  synth_cmd->add_option("--chunk-len", chunk_len, "Words per segment");
  synth_cmd->add_option("--seed", seed, "Generator seed");
  synth_cmd->add_option("--out", out_path, "Output corpus file")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a model; writes checkpoint, vocabulary and metrics log");
  train_cmd->add_option("config", config_path, "Run config (JSON)")->required();
  train_cmd->add_option("--set", overrides, "key=value override")->take_all();

  auto* eval_cmd = app.add_subcommand("eval", "Micro-F1 of a checkpoint on a corpus");
  eval_cmd->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval_cmd->add_option("corpus", corpus_path, "Line-delimited corpus file")->required();
  eval_cmd->add_flag("--json", as_json, "Emit a machine-readable record");

  double eps = 1e-5;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the full model's gradients");
  grad_cmd->add_option("config", config_path, "Run config (JSON); a small preset when omitted");
  grad_cmd->add_option("--eps", eps, "Central-difference step");
  grad_cmd->add_option("--set", overrides, "key=value override")->take_all();

  std::vector<std::size_t> lengths;
  std::size_t seeds = 1;
  auto* ablate_cmd = app.add_subcommand("ablate-length", "Micro-F1 versus head-truncation length");
  ablate_cmd->add_option("config", config_path, "Run config (JSON)")->required();
  ablate_cmd->add_option("--lengths", lengths, "Ascending token lengths")->delimiter(',')->required();
  ablate_cmd->add_option("--seeds", seeds, "Seeds averaged per length, starting at the config seed");
  ablate_cmd->add_option("--set", overrides, "key=value override")->take_all();

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*stats_cmd) return cmd_stats(corpus_path, as_json, out);
    if (*split_cmd) return cmd_split(corpus_path, ratios, seed, out_path, out, err);
    if (*synth_cmd) return cmd_synth(docs, classes, chunks, chunk_len, seed, out_path, out);
    if (*train_cmd) return cmd_train(resolve_config(config_path, overrides), out, err);
    if (*eval_cmd) return cmd_eval(checkpoint_path, corpus_path, as_json, out, err);
    if (*grad_cmd) return cmd_gradcheck(resolve_config(config_path, overrides, gradcheck_preset()), eps, out, err);
    if (*ablate_cmd) return cmd_ablate_length(resolve_config(config_path, overrides), lengths, seeds, out, err);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::logic_error& e) {
    err << "check failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace hipool::cli
