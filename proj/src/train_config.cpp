#include <set>

#include <json.hpp>

#include "shapmix/errors.hpp"
#include "shapmix/trainer.hpp"

namespace shapmix {
using nlohmann::ordered_json;

std::string_view mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::baseline: return "baseline";
    case TrainMode::st_mix: return "st-mix";
    case TrainMode::shap_mix: return "shap-mix";
  }
  return "?";
}

TrainMode mode_from_name(std::string_view name) {
  if (name == "baseline") return TrainMode::baseline;
  if (name == "st-mix" || name == "st_mix") return TrainMode::st_mix;
  if (name == "shap-mix" || name == "shap_mix") return TrainMode::shap_mix;
  throw ConfigError("unknown training mode '" + std::string(name) + "'", "mode");
}

std::string_view loss_name(LossMode m) {
  return m == LossMode::plain_ce ? "ce" : "balanced-softmax";
}

LossMode loss_from_name(std::string_view name) {
  if (name == "ce" || name == "plain_ce" || name == "plain-ce") return LossMode::plain_ce;
  if (name == "balanced-softmax" || name == "balanced_softmax") return LossMode::balanced_softmax;
  throw ConfigError("unknown loss '" + std::string(name) + "'", "loss");
}

namespace {

template <typename T>
T get_field(const ordered_json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type", key);
  }
}

std::pair<double, double> get_pair(const ordered_json& doc, const char* key,
                                   std::pair<double, double> fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(std::string("field '") + key + "' must be a [min, max] pair", key);
  return {v[0].get<double>(), v[1].get<double>()};
}

const std::set<std::string> kFields = {
    "mode", "loss", "epochs", "warmup", "mixup_prob", "spatial", "temporal",
    "lambda_distribution", "beta_alpha", "align_temporal", "tau", "ema",
    "estimate_every", "batch", "lr", "momentum", "milestones", "lr_decay",
    "weight_decay", "hidden", "seed", "mixed_loss_weight", "coalition_sizes",
    "many_above", "few_below", "fallback_uniform", "partition"};

}  // namespace

TrainConfig train_config_from_json(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = json_text.empty() ? ordered_json::object() : ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!kFields.count(key)) throw ConfigError("unknown configuration field '" + key + "'", key);

  TrainConfig c;
  if (doc.contains("mode")) c.mode = mode_from_name(get_field<std::string>(doc, "mode", ""));
  if (doc.contains("loss")) c.loss = loss_from_name(get_field<std::string>(doc, "loss", ""));
  c.epochs = get_field(doc, "epochs", c.epochs);
  c.warmup_epochs = get_field(doc, "warmup", c.warmup_epochs);
  c.mix.mixup_prob = get_field(doc, "mixup_prob", c.mix.mixup_prob);
  const auto sp = get_pair(doc, "spatial", {c.mix.parts_min, c.mix.parts_max});
  if (sp.first != static_cast<int>(sp.first) || sp.second != static_cast<int>(sp.second))
    throw ConfigError("spatial bounds must be integers", "spatial");
  c.mix.parts_min = static_cast<int>(sp.first);
  c.mix.parts_max = static_cast<int>(sp.second);
  const auto tp = get_pair(doc, "temporal", {c.mix.temporal_min, c.mix.temporal_max});
  c.mix.temporal_min = tp.first;
  c.mix.temporal_max = tp.second;
  const auto ld = get_field<std::string>(doc, "lambda_distribution", "uniform");
  if (ld == "uniform") c.mix.lambda_distribution = LambdaDistribution::uniform;
  else if (ld == "beta") c.mix.lambda_distribution = LambdaDistribution::beta;
  else throw ConfigError("lambda_distribution must be 'uniform' or 'beta'", "lambda_distribution");
  c.mix.beta_alpha = get_field(doc, "beta_alpha", c.mix.beta_alpha);
  c.mix.align_temporal = get_field(doc, "align_temporal", c.mix.align_temporal);
  c.temperature = get_field(doc, "tau", c.temperature);
  c.ema_momentum = get_field(doc, "ema", c.ema_momentum);
  c.estimate_every = get_field(doc, "estimate_every", c.estimate_every);
  c.batch_size = get_field(doc, "batch", c.batch_size);
  c.sgd.base_lr = get_field(doc, "lr", c.sgd.base_lr);
  c.sgd.momentum = get_field(doc, "momentum", c.sgd.momentum);
  c.sgd.milestones = get_field(doc, "milestones", c.sgd.milestones);
  c.sgd.decay = get_field(doc, "lr_decay", c.sgd.decay);
  c.sgd.weight_decay = get_field(doc, "weight_decay", c.sgd.weight_decay);
  c.hidden = get_field(doc, "hidden", c.hidden);
  c.seed = get_field(doc, "seed", c.seed);
  c.mixed_loss_weight = get_field(doc, "mixed_loss_weight", c.mixed_loss_weight);
  c.coalition_sizes = get_field(doc, "coalition_sizes", c.coalition_sizes);
  c.shots.many_above = get_field(doc, "many_above", c.shots.many_above);
  c.shots.few_below = get_field(doc, "few_below", c.shots.few_below);
  c.fallback_uniform = get_field(doc, "fallback_uniform", c.fallback_uniform);
  c.partition_file = get_field(doc, "partition", c.partition_file);
  c.validate();
  return c;
}

std::string train_config_to_json(const TrainConfig& c) {
  ordered_json doc;
  doc["mode"] = mode_name(c.mode);
  doc["loss"] = loss_name(c.loss);
  doc["epochs"] = c.epochs;
  doc["warmup"] = c.warmup_epochs;
  doc["mixup_prob"] = c.mix.mixup_prob;
  doc["spatial"] = {c.mix.parts_min, c.mix.parts_max};
  doc["temporal"] = {c.mix.temporal_min, c.mix.temporal_max};
  doc["lambda_distribution"] =
      c.mix.lambda_distribution == LambdaDistribution::beta ? "beta" : "uniform";
  doc["beta_alpha"] = c.mix.beta_alpha;
  doc["align_temporal"] = c.mix.align_temporal;
  doc["tau"] = c.temperature;
  doc["ema"] = c.ema_momentum;
  doc["estimate_every"] = c.estimate_every;
  doc["batch"] = c.batch_size;
  doc["lr"] = c.sgd.base_lr;
  doc["momentum"] = c.sgd.momentum;
  doc["milestones"] = c.sgd.milestones;
  doc["lr_decay"] = c.sgd.decay;
  doc["weight_decay"] = c.sgd.weight_decay;
  doc["hidden"] = c.hidden;
  doc["seed"] = c.seed;
  doc["mixed_loss_weight"] = c.mixed_loss_weight;
  doc["coalition_sizes"] = c.coalition_sizes;
  doc["many_above"] = c.shots.many_above;
  doc["few_below"] = c.shots.few_below;
  doc["fallback_uniform"] = c.fallback_uniform;
  doc["partition"] = c.partition_file;
  return doc.dump(2);
}

}  // namespace shapmix
