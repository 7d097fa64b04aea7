#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shapmix/skeleton.hpp"

namespace shapmix {

// Pooled pose + motion features: for every (c, v, m), the mean coordinate over
// frames followed by the mean absolute frame-to-frame difference.
struct FeatureSpec {
  Dims dims;
  int dim() const { return 2 * dims.channels * dims.joints * dims.performers; }
};

std::vector<double> extract_features(const SkeletonSequence& sequence);

// Two-layer perceptron. Weights are row-major: w1 is hidden x input,
// w2 is classes x hidden.
struct ModelParams {
  int input = 0;
  int hidden = 0;
  int classes = 0;
  std::vector<double> w1, b1, w2, b2;

  ModelParams() = default;
  ModelParams(int input, int hidden, int classes);  // zero-initialised

  std::size_t parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
  bool all_finite() const;
  void set_zero();
  // a <- a + scale * other
  void add_scaled(const ModelParams& other, double scale);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

using Gradients = ModelParams;

// He-scaled normal initialisation for the first layer, Glorot for the second.
ModelParams init_params(int input, int hidden, int classes, std::uint64_t seed);

struct ForwardResult {
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> probs;
};

ForwardResult forward(const ModelParams& params, std::span<const double> features);

// Overflow-safe softmax.
std::vector<double> softmax(std::span<const double> logits);

enum class LossMode { plain_ce, balanced_softmax };

struct LossConfig {
  LossMode mode = LossMode::plain_ce;
  std::vector<int> class_counts;  // required for balanced_softmax

  void validate(int num_classes) const;
  // Additive logit adjustment: log n_c - max_c' log n_c' (zero for plain CE).
  // The constant shift leaves the softmax unchanged and makes equal counts an
  // exact no-op.
  std::vector<double> logit_adjustment(int num_classes) const;
};

inline constexpr double kLossEpsilon = 1e-12;

// Soft-label cross entropy over (adjusted) softmax probabilities. Each log is
// taken of max(p, kLossEpsilon).
double loss(std::span<const double> logits, std::span<const double> soft_label,
            const LossConfig& config);

// Adds scale * d loss / d params to `grads`. Returns the loss value.
double backward(const ModelParams& params, std::span<const double> features,
                std::span<const double> soft_label, const LossConfig& config,
                Gradients& grads, double scale = 1.0);

struct SgdConfig {
  double base_lr = 0.05;
  double momentum = 0.9;
  std::vector<int> milestones = {60, 80};
  double decay = 0.1;
  double weight_decay = 0.0;

  void validate() const;
  // Learning rate for a 1-based epoch: base * decay^(milestones <= epoch).
  double lr_at(int epoch) const;
};

// v <- momentum * v + g ; theta <- theta - lr * v
class SgdOptimizer {
 public:
  SgdOptimizer(SgdConfig config, const ModelParams& shape);

  void step(ModelParams& params, const Gradients& grads, int epoch);
  const ModelParams& velocity() const { return velocity_; }
  const SgdConfig& config() const { return config_; }

 private:
  SgdConfig config_;
  ModelParams velocity_;
};

}  // namespace shapmix
