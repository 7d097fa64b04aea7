#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "shapmix/classifier.hpp"
#include "shapmix/dataset.hpp"
#include "shapmix/partition.hpp"
#include "shapmix/rng.hpp"

namespace shapmix {

// Worth of a coalition of body parts.
using GameFn = std::function<double(PartMask)>;

// Caches every coalition's worth after the first evaluation (32 entries).
class MemoizedGame {
 public:
  explicit MemoizedGame(GameFn game) : game_(std::move(game)) {}

  double operator()(PartMask s);
  int evaluations() const { return evaluations_; }

 private:
  GameFn game_;
  std::array<std::optional<double>, 32> cache_{};
  int evaluations_ = 0;
};

// Average marginal contribution of coalition `b` treated as a single player
// alongside the singletons of U - b:
//   v_b = 1/(n+1) * sum_{r subset of U-b} [f(r u b) - f(r)] / C(n, |r|),
// with n = |U - b|. Throws ConfigError for an empty coalition.
double exact_shapley(const GameFn& game, PartMask coalition);

// All non-empty coalitions whose part count is listed in `sizes`, ordered by
// size then by bit pattern. Default sizes {2, 3} give 20 coalitions.
std::vector<PartMask> admissible_coalitions(std::span<const int> sizes);
std::vector<PartMask> default_coalitions();

struct MarginalSample {
  PartMask coalition;  // b
  PartMask context;    // r, disjoint from b
  double estimate = 0.0;
};

// One-draw estimate: b uniform over `admissible`, |r| uniform in
// {0..|U-b|}, r uniform among subsets of U - b of that size. Unbiased for
// exact_shapley(game, b) given b.
MarginalSample sample_marginal(Rng& rng, const GameFn& game,
                               std::span<const PartMask> admissible);

// Per-class exponential moving averages of coalition Shapley values.
class SaliencyTable {
 public:
  SaliencyTable(int num_classes, std::vector<PartMask> coalitions, double momentum = 0.9,
                double init_value = 0.0);

  int num_classes() const { return num_classes_; }
  const std::vector<PartMask>& coalitions() const { return coalitions_; }
  double momentum() const { return momentum_; }
  double init_value() const { return init_value_; }

  // Throws ConfigError if the coalition is not admissible.
  std::size_t index_of(PartMask coalition) const;

  // v <- momentum * v + (1 - momentum) * estimate
  void update(int cls, PartMask coalition, double estimate);

  double value(int cls, std::size_t k) const { return values_[offset(cls, k)]; }
  int update_count(int cls, std::size_t k) const { return counts_[offset(cls, k)]; }
  long long total_updates(int cls) const;
  std::span<const double> values(int cls) const {
    return {values_.data() + offset(cls, 0), coalitions_.size()};
  }

  friend bool operator==(const SaliencyTable&, const SaliencyTable&) = default;

 private:
  std::size_t offset(int cls, std::size_t k) const {
    return static_cast<std::size_t>(cls) * coalitions_.size() + k;
  }

  int num_classes_;
  std::vector<PartMask> coalitions_;
  double momentum_;
  double init_value_;
  std::vector<double> values_;
  std::vector<int> counts_;
};

// Reporting transform: clamp at 0 and divide by the sum (uniform when the
// clamped values are all zero).
std::vector<double> normalized_saliency(const SaliencyTable& table, int cls);

// Joints of parts in `keep` retain their values; all other joints are set to
// the static dataset mean pose for every frame and performer.
SkeletonSequence compose_masked_input(const SkeletonSequence& sequence, PartMask keep,
                                      const PartPartition& partition, const ClassStats& stats);

// f^c(S): softmax confidence of `cls` on the masked probe sequence.
GameFn confidence_game(const ModelParams& params, const SkeletonSequence& probe, int cls,
                       const PartPartition& partition, const ClassStats& stats);

}  // namespace shapmix
