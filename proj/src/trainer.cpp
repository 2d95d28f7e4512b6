#include "hipool/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hipool/errors.hpp"

namespace hipool {

using nlohmann::json;

void adam_step(std::span<Tensor* const> params, OptimizerState& state, const AdamConfig& cfg) {
  if (state.first.empty() && state.step == 0) {
    for (const Tensor* p : params) {
      state.first.emplace_back(p->size(), 0.0);
      state.second.emplace_back(p->size(), 0.0);
    }
  }
  if (state.first.size() != params.size()) {
    throw DimensionError("adam_step: optimizer tracks " + std::to_string(state.first.size()) + " tensors, got " +
                         std::to_string(params.size()));
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (state.first[t].size() != params[t]->size() || state.second[t].size() != params[t]->size()) {
      throw DimensionError("adam_step: moment buffers for tensor " + std::to_string(t) + " do not match shape " +
                           shape_to_string(params[t]->shape()));
    }
    if (params[t]->has_grad() && params[t]->grad().size() != params[t]->size()) {
      throw DimensionError("adam_step: gradient of tensor " + std::to_string(t) + " has the wrong size");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    if (!p.has_grad()) continue;
    const std::span<const double> g = std::as_const(p).grad();
    std::vector<double>& m = state.first[k];
    std::vector<double>& v = state.second[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

F1Result micro_f1(std::span<const std::size_t> predicted, std::span<const std::size_t> gold, std::size_t num_classes) {
  if (predicted.size() != gold.size()) throw DimensionError("micro_f1: prediction and gold counts differ");
  if (gold.empty()) throw DomainError("micro_f1: no examples");
  F1Result out;
  out.per_class.resize(num_classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] >= num_classes || gold[i] >= num_classes) throw DomainError("micro_f1: class index out of range");
    if (predicted[i] == gold[i]) {
      ++out.per_class[gold[i]].tp;
      ++correct;
    } else {
      ++out.per_class[predicted[i]].fp;
      ++out.per_class[gold[i]].fn;
    }
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const ClassCounts& c : out.per_class) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  out.micro_f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  out.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
  if (std::abs(out.micro_f1 - out.accuracy) > 1e-12) {
    throw std::logic_error("micro_f1: single-label micro-F1 differs from accuracy");
  }
  return out;
}

EvalResult evaluate(const Model& model, std::span<const Example> examples) {
  if (examples.empty()) throw DomainError("evaluate: empty dataset");
  EvalResult out;
  std::vector<std::size_t> gold;
  double loss_sum = 0.0;
  for (const Example& ex : examples) {
    const std::vector<double> z = model.predict_logits(ex);
    if (ex.label >= z.size()) {
      throw DomainError("evaluate: label " + std::to_string(ex.label) + " of document '" + ex.id + "' exceeds class count");
    }
    const double peak = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double v : z) total += std::exp(v - peak);
    loss_sum += peak + std::log(total) - z[ex.label];
    out.predictions.push_back(static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin()));
    gold.push_back(ex.label);
  }
  const F1Result f1 = micro_f1(out.predictions, gold, model.config().num_classes);
  out.micro_f1 = f1.micro_f1;
  out.per_class = f1.per_class;
  out.mean_loss = loss_sum / static_cast<double>(examples.size());
  return out;
}

nlohmann::ordered_json to_json(const EpochLog& row) {
  nlohmann::ordered_json j;
  j["epoch"] = row.epoch;
  j["loss"] = row.loss;
  j["train_f1"] = row.train_f1;
  j["dev_f1"] = row.dev_f1 ? nlohmann::ordered_json(*row.dev_f1) : nlohmann::ordered_json(nullptr);
  return j;
}

TrainResult train(Model& model, std::span<const Example> train_set, std::span<const Example> dev_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (train_set.empty()) throw DomainError("train: empty training set");
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
  if (!(cfg.lr >= 0.0)) throw ConfigError("train: learning rate must be non-negative");

  std::vector<Tensor*> params = model.parameters();
  OptimizerState state;
  const AdamConfig adam{cfg.lr};
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  double best_dev = -1.0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (Tensor* p : params) p->zero_grad();
      Tape tape;
      const Model::Bound bound = model.bind(tape);
      Var total;
      for (std::size_t k = start; k < end; ++k) {
        const Var l = model.loss(tape, bound, train_set[order[k]]);
        total = total.valid() ? tape.add(total, l) : l;
      }
      const Var mean = tape.scale(total, 1.0 / static_cast<double>(end - start));
      if (!std::isfinite(tape.value(mean)[0])) throw NumericError("train: non-finite loss in epoch " + std::to_string(epoch));
      tape.backward(mean);
      adam_step(params, state, adam);
    }

    const EvalResult on_train = evaluate(model, train_set);
    EpochLog row{epoch, on_train.mean_loss, on_train.micro_f1, std::nullopt};
    if (!dev_set.empty()) row.dev_f1 = evaluate(model, dev_set).micro_f1;
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);

    if (cfg.early_stop && row.dev_f1) {
      if (*row.dev_f1 > best_dev) {
        best_dev = *row.dev_f1;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        result.stopped_early = epoch < cfg.epochs;
        break;
      }
    }
  }
  return result;
}

Checkpoint make_checkpoint(Model& model, json config, std::string vocab_ref) {
  Checkpoint ckpt{std::move(config), std::move(vocab_ref), {}};
  for (auto& [name, t] : model.named_parameters()) {
    Tensor copy(t->shape(), t->storage());
    ckpt.tensors.emplace(name, std::move(copy));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::ordered_json doc;
  doc["format"] = kCheckpointFormat;
  doc["config"] = ckpt.config;
  doc["vocab_ref"] = ckpt.vocab_ref;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  for (const auto& [name, t] : ckpt.tensors) {
    tensors[name] = {{"shape", t.shape()}, {"values", t.storage()}};
  }
  doc["tensors"] = std::move(tensors);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  out << doc.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("format", std::string()) != kCheckpointFormat) {
    throw FormatError("checkpoint " + path.string() + " is not in " + kCheckpointFormat + " format");
  }
  if (!doc.contains("tensors") || !doc["tensors"].is_object()) throw FormatError("checkpoint has no tensors object");
  Checkpoint ckpt;
  ckpt.config = doc.value("config", json::object());
  ckpt.vocab_ref = doc.value("vocab_ref", std::string());
  for (const auto& [name, entry] : doc["tensors"].items()) {
    try {
      ckpt.tensors.emplace(name, Tensor(entry.at("shape").get<Shape>(), entry.at("values").get<std::vector<double>>()));
    } catch (const json::exception& e) {
      throw FormatError("checkpoint tensor '" + name + "' is malformed: " + e.what());
    } catch (const DimensionError& e) {
      throw SchemaError("checkpoint tensor '" + name + "': " + e.what());
    }
  }
  return ckpt;
}

Model restore_model(const ModelConfig& config, const Checkpoint& ckpt) {
  Model model(config, 0);
  std::size_t used = 0;
  for (auto& [name, t] : model.named_parameters()) {
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end()) throw SchemaError("checkpoint is missing tensor '" + name + "'");
    if (it->second.shape() != t->shape()) {
      throw SchemaError("checkpoint tensor '" + name + "' has shape " + shape_to_string(it->second.shape()) +
                        ", config expects " + shape_to_string(t->shape()));
    }
    t->storage() = it->second.storage();
    ++used;
  }
  if (used != ckpt.tensors.size()) throw SchemaError("checkpoint holds tensors the config does not describe");
  return model;
}

}  // namespace hipool
