#include "shapmix/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "shapmix/errors.hpp"
#include "shapmix/rng.hpp"
#include "shapmix/tail_policy.hpp"

namespace shapmix {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> one_hot(int label, int num_classes) {
  std::vector<double> y(static_cast<std::size_t>(num_classes), 0.0);
  y[static_cast<std::size_t>(label)] = 1.0;
  return y;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be positive", "epochs");
  if (warmup_epochs < 0 || warmup_epochs > epochs)
    throw ConfigError("warm-up must lie in [0, epochs]", "warmup");
  if (estimate_every < 1) throw ConfigError("estimate_every must be at least 1", "estimate_every");
  if (batch_size < 1) throw ConfigError("batch size must be positive", "batch");
  if (hidden < 1) throw ConfigError("hidden width must be positive", "hidden");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive", "tau");
  if (!(ema_momentum >= 0.0 && ema_momentum < 1.0))
    throw ConfigError("EMA momentum must lie in [0, 1)", "ema");
  if (!(mixed_loss_weight >= 0.0)) throw ConfigError("mixed loss weight must be non-negative", "mixed_loss_weight");
  if (shots.few_below > shots.many_above + 1)
    throw ConfigError("few-shot threshold exceeds many-shot threshold", "shots");
  mix.validate();
  sgd.validate();
  const auto coalitions = admissible_coalitions(coalition_sizes);
  if (mode == TrainMode::shap_mix)
    for (PartMask b : coalitions)
      if (b == PartMask::all())
        throw ConfigError("the full-body coalition leaves nothing to paste in the complement case",
                          "coalition_sizes");
}

PartPartition resolve_partition(const TrainConfig& config, int num_joints) {
  PartPartition p = config.partition_file.empty() ? default_partition(num_joints)
                                                  : load_partition(config.partition_file);
  if (p.num_joints() != num_joints)
    throw ConfigError("partition covers " + std::to_string(p.num_joints()) +
                          " joints, dataset has " + std::to_string(num_joints),
                      "partition");
  return p;
}

EvalMetrics evaluate_predictions(std::span<const int> predictions, std::span<const int> labels,
                                 std::span<const int> train_counts, const ShotThresholds& shots) {
  if (predictions.size() != labels.size())
    throw DataError("prediction and label counts differ");
  if (labels.empty()) throw DataError("cannot evaluate an empty test set");
  const auto K = train_counts.size();
  EvalMetrics m;
  m.test_counts.assign(K, 0);
  std::vector<int> correct(K, 0);
  int total_correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || c >= K) throw DataError("test label outside [0, K)");
    ++m.test_counts[c];
    if (predictions[i] == labels[i]) {
      ++correct[c];
      ++total_correct;
    }
  }
  m.overall = static_cast<double>(total_correct) / static_cast<double>(labels.size());
  m.per_class.resize(K);
  const auto buckets = shot_split(train_counts, shots);
  std::array<double, 3> sum{};
  std::array<int, 3> n{};
  for (std::size_t c = 0; c < K; ++c) {
    if (m.test_counts[c] == 0) continue;
    const double acc = static_cast<double>(correct[c]) / m.test_counts[c];
    m.per_class[c] = acc;
    const auto b = static_cast<std::size_t>(buckets[c]);
    sum[b] += acc;
    ++n[b];
  }
  auto bucket = [&](ShotBucket b) -> std::optional<double> {
    const auto i = static_cast<std::size_t>(b);
    if (n[i] == 0) return std::nullopt;
    return sum[i] / n[i];
  };
  m.many = bucket(ShotBucket::many);
  m.medium = bucket(ShotBucket::medium);
  m.few = bucket(ShotBucket::few);
  return m;
}

int predict(const ModelParams& params, const SkeletonSequence& sequence) {
  const auto fr = forward(params, extract_features(sequence));
  return static_cast<int>(std::max_element(fr.logits.begin(), fr.logits.end()) - fr.logits.begin());
}

EvalMetrics evaluate(const ModelParams& params, const LabeledDataset& test,
                     std::span<const int> train_counts, const ShotThresholds& shots) {
  if (static_cast<int>(train_counts.size()) != test.num_classes() ||
      params.classes != test.num_classes())
    throw DataError("model has " + std::to_string(params.classes) + " classes, test set has " +
                    std::to_string(test.num_classes()));
  std::vector<int> preds, labels;
  preds.reserve(test.size());
  labels.reserve(test.size());
  for (const auto& s : test.samples()) {
    preds.push_back(predict(params, s.sequence));
    labels.push_back(s.label);
  }
  return evaluate_predictions(preds, labels, train_counts, shots);
}

TrainResult train(const LabeledDataset& dataset, const TrainConfig& config,
                  const LabeledDataset* eval, const TrainHooks* hooks) {
  config.validate();
  if (dataset.empty()) throw DataError("training set is empty");
  if (eval && (eval->dims() != dataset.dims() || eval->num_classes() != dataset.num_classes()))
    throw DataError("evaluation set shape " + eval->dims().to_string() +
                    " does not match training set " + dataset.dims().to_string());
  const PartPartition partition = resolve_partition(config, dataset.dims().joints);
  const int K = dataset.num_classes();
  const Dims dims = dataset.dims();

  TrainResult result;
  result.stats = compute_class_stats(dataset);
  const std::vector<int>& counts = result.stats.counts;
  for (int c = 0; c < K; ++c)
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw DataError("class " + dataset.class_name(c) + " has no training samples");

  LossConfig loss_cfg{config.loss, counts};
  loss_cfg.validate(K);

  const FeatureSpec spec{dims};
  std::vector<std::vector<double>> clean_features;
  clean_features.reserve(dataset.size());
  for (const auto& s : dataset.samples()) clean_features.push_back(extract_features(s.sequence));

  result.params = init_params(spec.dim(), config.hidden, K, config.seed);
  SgdOptimizer optimizer(config.sgd, result.params);
  const auto coalitions = admissible_coalitions(config.coalition_sizes);
  if (config.mode == TrainMode::shap_mix)
    result.table.emplace(K, coalitions, config.ema_momentum);

  const ShapMixConfig shap_cfg{config.mix, config.temperature, config.fallback_uniform};
  TrainReport& report = result.report;
  report.train_counts = counts;
  for (int c = 0; c < K; ++c) report.class_names.push_back(dataset.class_name(c));

  std::vector<std::size_t> order(dataset.size());
  Gradients grads(spec.dim(), config.hidden, K);
  int iteration = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, "train.shuffle", {static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    const bool mixed_active = config.mode != TrainMode::baseline && epoch > config.warmup_epochs;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = config.sgd.lr_at(epoch);
    double clean_sum = 0.0, mixed_sum = 0.0;
    std::size_t clean_n = 0, mixed_n = 0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size), ++iteration) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
      const std::size_t B = batch.size();
      const auto iter_u = static_cast<std::uint64_t>(iteration);

      // Online saliency estimation on the clean batch with the current parameters.
      if (result.table && iteration % config.estimate_every == 0) {
        const auto t0 = Clock::now();
        for (std::size_t k = 0; k < B; ++k) {
          const Sample& s = dataset[batch[k]];
          Rng rng(derive_seed(config.seed, "train.estimate", {iter_u, k}));
          const GameFn game = confidence_game(result.params, s.sequence, s.label, partition, result.stats);
          const MarginalSample ms = sample_marginal(rng, game, coalitions);
          result.table->update(s.label, ms.coalition, ms.estimate);
          ++rec.saliency_updates;
          if (hooks && hooks->on_estimate)
            hooks->on_estimate({iteration, batch[k], &s.sequence, s.label, ms});
        }
        report.timings.estimation_s += seconds_since(t0);
      }

      std::vector<MixOutcome> mixes;
      std::vector<std::vector<double>> mixed_features;
      if (config.mode != TrainMode::baseline) {
        const auto t0 = Clock::now();
        std::vector<int> partner(B);
        std::iota(partner.begin(), partner.end(), 0);
        Rng perm_rng(derive_seed(config.seed, "train.perm", {iter_u}));
        std::shuffle(partner.begin(), partner.end(), perm_rng.engine());
        mixes.reserve(B);
        for (std::size_t k = 0; k < B; ++k) {
          const auto j = static_cast<std::size_t>(partner[k]);
          const Sample& a = dataset[batch[k]];
          const Sample& b = dataset[batch[j]];
          const LabeledView base{a.sequence, a.label, static_cast<int>(batch[k])};
          const LabeledView source{b.sequence, b.label, static_cast<int>(batch[j])};
          Rng rng(derive_seed(config.seed, "train.mix",
                              {static_cast<std::uint64_t>(epoch), iter_u, k}));
          if (config.mode == TrainMode::st_mix)
            mixes.push_back(st_mix(rng, base, source, config.mix, partition, K));
          else
            mixes.push_back(shap_mix(rng, base, source, *result.table, counts, shap_cfg, partition, K));
          if (mixed_active) mixed_features.push_back(extract_features(mixes.back().sequence));
        }
        rec.mixes_built += static_cast<int>(B);
        if (hooks && hooks->on_mix)
          hooks->on_mix({epoch, iteration, batch, partner, &mixes, mixed_active});
        report.timings.mixing_s += seconds_since(t0);
      }

      const auto t0 = Clock::now();
      grads.set_zero();
      const double inv_b = 1.0 / static_cast<double>(B);
      for (std::size_t k = 0; k < B; ++k) {
        const Sample& s = dataset[batch[k]];
        const double l = backward(result.params, clean_features[batch[k]], one_hot(s.label, K),
                                  loss_cfg, grads, inv_b);
        clean_sum += l;
        ++clean_n;
      }
      if (mixed_active) {
        const double w = config.mixed_loss_weight * inv_b;
        for (std::size_t k = 0; k < B; ++k) {
          const double l = backward(result.params, mixed_features[k], mixes[k].label_weights,
                                    loss_cfg, grads, w);
          mixed_sum += l;
          ++mixed_n;
          ++rec.mixed_terms;
        }
      }
      if (!std::isfinite(clean_sum) || !std::isfinite(mixed_sum))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
      optimizer.step(result.params, grads, epoch);
      if (!result.params.all_finite())
        throw NumericError("non-finite parameters at epoch " + std::to_string(epoch));
      report.timings.optimization_s += seconds_since(t0);
    }

    rec.clean_loss = clean_sum / static_cast<double>(clean_n);
    if (mixed_n > 0) rec.mixed_loss = mixed_sum / static_cast<double>(mixed_n);
    const auto t0 = Clock::now();
    rec.metrics = evaluate(result.params, eval ? *eval : dataset, counts, config.shots);
    report.timings.evaluation_s += seconds_since(t0);
    report.epochs.push_back(std::move(rec));
  }
  report.final_metrics = report.epochs.back().metrics;
  return result;
}

}  // namespace shapmix
