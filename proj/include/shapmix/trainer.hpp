#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shapmix/classifier.hpp"
#include "shapmix/dataset.hpp"
#include "shapmix/shapley.hpp"
#include "shapmix/st_mix.hpp"

namespace shapmix {

enum class TrainMode { baseline, st_mix, shap_mix };

std::string_view mode_name(TrainMode m);
TrainMode mode_from_name(std::string_view name);  // accepts st-mix / st_mix etc.
std::string_view loss_name(LossMode m);
LossMode loss_from_name(std::string_view name);

struct TrainConfig {
  TrainMode mode = TrainMode::shap_mix;
  LossMode loss = LossMode::balanced_softmax;
  int epochs = 100;
  int warmup_epochs = 5;
  MixConfig mix;
  double temperature = 0.2;
  double ema_momentum = 0.9;
  int estimate_every = 1;
  int batch_size = 64;
  SgdConfig sgd;
  int hidden = 64;
  std::uint64_t seed = 0;
  double mixed_loss_weight = 1.0;
  std::vector<int> coalition_sizes = {2, 3};
  ShotThresholds shots;
  bool fallback_uniform = true;
  // Empty: built-in partition for the dataset's joint count.
  std::string partition_file;

  void validate() const;  // throws ConfigError with the offending field
};

// Full round trip through JSON; unspecified fields keep their defaults.
// Unknown fields raise ConfigError.
TrainConfig train_config_from_json(std::string_view json_text);
std::string train_config_to_json(const TrainConfig& config);

struct EvalMetrics {
  double overall = 0.0;
  std::optional<double> many, medium, few;  // absent when the bucket is empty
  std::vector<std::optional<double>> per_class;  // absent when no test samples
  std::vector<int> test_counts;
};

// Top-1 accuracy; bucket metrics average per-class accuracy over classes in
// each shot bucket (buckets come from the training counts).
EvalMetrics evaluate_predictions(std::span<const int> predictions, std::span<const int> labels,
                                 std::span<const int> train_counts,
                                 const ShotThresholds& shots = {});

int predict(const ModelParams& params, const SkeletonSequence& sequence);

EvalMetrics evaluate(const ModelParams& params, const LabeledDataset& test,
                     std::span<const int> train_counts, const ShotThresholds& shots = {});

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double clean_loss = 0.0;
  std::optional<double> mixed_loss;  // only when the mixed term was applied
  int mixed_terms = 0;       // mixed samples contributing to the loss
  int mixes_built = 0;
  int saliency_updates = 0;
  EvalMetrics metrics;
};

struct PhaseTimings {
  double estimation_s = 0.0;
  double mixing_s = 0.0;
  double optimization_s = 0.0;
  double evaluation_s = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  EvalMetrics final_metrics;
  std::vector<int> train_counts;
  std::vector<std::string> class_names;
  PhaseTimings timings;  // not part of the reproducible report
};

struct EstimationEvent {
  int iteration = 0;
  std::size_t dataset_index = 0;
  const SkeletonSequence* probe = nullptr;
  int label = 0;
  MarginalSample sample;
};

struct MixEvent {
  int epoch = 0;
  int iteration = 0;
  std::vector<std::size_t> batch;  // dataset indices
  std::vector<int> partner;        // partner[k] is the batch position mixed into k
  const std::vector<MixOutcome>* outcomes = nullptr;
  bool loss_applied = false;
};

// Optional instrumentation used by tests.
struct TrainHooks {
  std::function<void(const EstimationEvent&)> on_estimate;
  std::function<void(const MixEvent&)> on_mix;
};

struct TrainResult {
  ModelParams params;
  std::optional<SaliencyTable> table;
  TrainReport report;
  ClassStats stats;
};

// Runs the training loop. Per-epoch metrics are measured on `eval` when
// given, on the training data otherwise.
TrainResult train(const LabeledDataset& dataset, const TrainConfig& config,
                  const LabeledDataset* eval = nullptr, const TrainHooks* hooks = nullptr);

PartPartition resolve_partition(const TrainConfig& config, int num_joints);

// Reproducible part of the report as JSON (timings excluded).
std::string report_to_json(const TrainReport& report, const TrainConfig& config);
std::string timings_to_json(const PhaseTimings& timings);
// class_id,class_name,train_count,bucket,accuracy
std::string per_class_csv(const EvalMetrics& metrics, std::span<const int> train_counts,
                          const std::vector<std::string>& class_names,
                          const ShotThresholds& shots = {});
std::string metrics_to_json(const EvalMetrics& metrics);

struct RankedCoalition {
  PartMask coalition;
  double ema_value = 0.0;
  double normalized = 0.0;
  int update_count = 0;
};

// Per class, coalitions sorted by normalized saliency (descending; ties keep
// table order). top_k == 0 keeps all.
std::vector<std::vector<RankedCoalition>> saliency_snapshot(const SaliencyTable& table,
                                                            std::size_t top_k = 0);

// class_name -> { "a+b": {ema_value, normalized, update_count, rank} }
std::string saliency_to_json(const SaliencyTable& table,
                             const std::vector<std::string>& class_names,
                             std::size_t top_k = 0);

}  // namespace shapmix
