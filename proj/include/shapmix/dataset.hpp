#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapmix/partition.hpp"
#include "shapmix/skeleton.hpp"

namespace shapmix {

struct Sample {
  SkeletonSequence sequence;
  int label = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Immutable collection of labelled sequences sharing one shape.
class LabeledDataset {
 public:
  LabeledDataset(Dims dims, int num_classes, std::vector<Sample> samples,
                 std::vector<std::string> class_names = {},
                 std::vector<PartMask> ground_truth_parts = {});

  const Dims& dims() const { return dims_; }
  int num_classes() const { return num_classes_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const Sample> samples() const { return samples_; }

  // Falls back to "class_<id>" when no names were given.
  std::string class_name(int c) const;
  const std::vector<std::string>& class_names() const { return class_names_; }
  // Per-class active parts recorded by the synthetic generator; empty if unknown.
  const std::vector<PartMask>& ground_truth_parts() const { return ground_truth_; }

  std::vector<int> class_counts() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  Dims dims_;
  int num_classes_;
  std::vector<Sample> samples_;
  std::vector<std::string> class_names_;
  std::vector<PartMask> ground_truth_;
};

// Per-class counts and the dataset-wide mean joint coordinates, shape C x V,
// averaged over samples, frames and performers. Accumulated in 64-bit.
struct ClassStats {
  std::vector<int> counts;
  int channels = 0;
  int joints = 0;
  std::vector<double> mean_pose;  // index c * joints + v

  double mean(int c, int v) const {
    return mean_pose[static_cast<std::size_t>(c) * joints + v];
  }
};

ClassStats compute_class_stats(const LabeledDataset& dataset);

// Exponential long-tail profile: n_k = round(max * IF^(-k / (K - 1))).
std::vector<int> pareto_counts(int num_classes, double imbalance_factor, int max_per_class);

// Long-tailed truncation. Class ranks are assigned by a seeded permutation of
// class ids; class with rank k keeps pareto_counts()[k] samples drawn
// uniformly without replacement. Relative sample order is preserved.
LabeledDataset pareto_subsample(const LabeledDataset& dataset, double imbalance_factor,
                                int max_per_class, std::uint64_t seed);

enum class ShotBucket { many, medium, few };

std::string_view bucket_name(ShotBucket b);

struct ShotThresholds {
  int many_above = 100;   // many if count > many_above
  int few_below = 20;     // few if count < few_below
};

ShotBucket shot_bucket(int count, const ShotThresholds& th = {});
std::vector<ShotBucket> shot_split(std::span<const int> counts, const ShotThresholds& th = {});

struct SyntheticConfig {
  int num_classes = 10;
  int per_class = 200;
  Dims dims{3, 64, 25, 1};
  std::uint64_t seed = 0;
  // Selects an independent set of samples drawn from the same class
  // definitions (e.g. 0 for training, 1 for testing).
  std::uint64_t split = 0;
  // Standard deviation of i.i.d. coordinate noise.
  double noise = 0.3;
  // Scale of per-sample nuisance variation (amplitude, phase, speed jitter).
  double jitter = 1.0;
};

// Desk-scale stand-in for a skeleton action dataset. Each class animates a
// seeded choice of 1-3 body parts with its own oscillation; the other parts
// follow a shared idle motion. Ground-truth active parts are recorded.
LabeledDataset generate_synthetic_dataset(const SyntheticConfig& config,
                                          const PartPartition& partition);

}  // namespace shapmix
