#include "shapmix/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "shapmix/errors.hpp"
#include "shapmix/rng.hpp"

namespace shapmix {

std::vector<double> extract_features(const SkeletonSequence& sequence) {
  const Dims d = sequence.dims();
  const std::size_t half = static_cast<std::size_t>(d.channels) * d.joints * d.performers;
  std::vector<double> feat(2 * half, 0.0);
  for (int c = 0; c < d.channels; ++c)
    for (int v = 0; v < d.joints; ++v)
      for (int m = 0; m < d.performers; ++m) {
        const std::size_t k = (static_cast<std::size_t>(c) * d.joints + v) * d.performers + m;
        double pose = 0.0;
        double motion = 0.0;
        double prev = sequence.at(c, 0, v, m);
        pose += prev;
        for (int t = 1; t < d.frames; ++t) {
          const double x = sequence.at(c, t, v, m);
          pose += x;
          motion += std::abs(x - prev);
          prev = x;
        }
        feat[k] = pose / d.frames;
        feat[half + k] = d.frames >= 2 ? motion / (d.frames - 1) : 0.0;
      }
  return feat;
}

ModelParams::ModelParams(int input_, int hidden_, int classes_)
    : input(input_),
      hidden(hidden_),
      classes(classes_),
      w1(static_cast<std::size_t>(hidden_) * input_, 0.0),
      b1(static_cast<std::size_t>(hidden_), 0.0),
      w2(static_cast<std::size_t>(classes_) * hidden_, 0.0),
      b2(static_cast<std::size_t>(classes_), 0.0) {
  if (input_ <= 0 || hidden_ <= 0 || classes_ <= 0)
    throw ConfigError("model dimensions must be positive", "hidden");
}

bool ModelParams::all_finite() const {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(w1) && ok(b1) && ok(w2) && ok(b2);
}

void ModelParams::set_zero() {
  for (auto* v : {&w1, &b1, &w2, &b2}) std::fill(v->begin(), v->end(), 0.0);
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  auto axpy = [scale](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
  };
  axpy(w1, other.w1);
  axpy(b1, other.b1);
  axpy(w2, other.w2);
  axpy(b2, other.b2);
}

ModelParams init_params(int input, int hidden, int classes, std::uint64_t seed) {
  ModelParams p(input, hidden, classes);
  Rng rng(derive_seed(seed, "model.init"));
  const double s1 = std::sqrt(2.0 / input);
  for (auto& w : p.w1) w = rng.normal(0.0, s1);
  const double s2 = std::sqrt(2.0 / (hidden + classes));
  for (auto& w : p.w2) w = rng.normal(0.0, s2);
  return p;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& x : p) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (auto& x : p) x /= sum;
  return p;
}

ForwardResult forward(const ModelParams& params, std::span<const double> features) {
  if (static_cast<int>(features.size()) != params.input)
    throw DataError("feature vector has " + std::to_string(features.size()) +
                    " entries, model expects " + std::to_string(params.input));
  ForwardResult r;
  r.hidden_pre.assign(static_cast<std::size_t>(params.hidden), 0.0);
  r.hidden.assign(static_cast<std::size_t>(params.hidden), 0.0);
  for (int h = 0; h < params.hidden; ++h) {
    const double* row = params.w1.data() + static_cast<std::size_t>(h) * params.input;
    double acc = params.b1[static_cast<std::size_t>(h)];
    for (int i = 0; i < params.input; ++i) acc += row[i] * features[static_cast<std::size_t>(i)];
    r.hidden_pre[static_cast<std::size_t>(h)] = acc;
    r.hidden[static_cast<std::size_t>(h)] = acc > 0.0 ? acc : 0.0;
  }
  r.logits.assign(static_cast<std::size_t>(params.classes), 0.0);
  for (int k = 0; k < params.classes; ++k) {
    const double* row = params.w2.data() + static_cast<std::size_t>(k) * params.hidden;
    double acc = params.b2[static_cast<std::size_t>(k)];
    for (int h = 0; h < params.hidden; ++h) acc += row[h] * r.hidden[static_cast<std::size_t>(h)];
    r.logits[static_cast<std::size_t>(k)] = acc;
  }
  r.probs = softmax(r.logits);
  return r;
}

void LossConfig::validate(int num_classes) const {
  if (mode != LossMode::balanced_softmax) return;
  if (static_cast<int>(class_counts.size()) != num_classes)
    throw ConfigError("balanced softmax needs one training count per class", "loss");
  for (int n : class_counts)
    if (n <= 0) throw ConfigError("balanced softmax needs strictly positive class counts", "loss");
}

std::vector<double> LossConfig::logit_adjustment(int num_classes) const {
  std::vector<double> adj(static_cast<std::size_t>(num_classes), 0.0);
  if (mode != LossMode::balanced_softmax) return adj;
  validate(num_classes);
  for (int c = 0; c < num_classes; ++c)
    adj[static_cast<std::size_t>(c)] = std::log(static_cast<double>(class_counts[static_cast<std::size_t>(c)]));
  const double mx = *std::max_element(adj.begin(), adj.end());
  for (auto& a : adj) a -= mx;
  return adj;
}

namespace {

std::vector<double> adjusted_probs(std::span<const double> logits, const LossConfig& config) {
  const auto adj = config.logit_adjustment(static_cast<int>(logits.size()));
  std::vector<double> z(logits.begin(), logits.end());
  for (std::size_t c = 0; c < z.size(); ++c) z[c] += adj[c];
  return softmax(z);
}

double cross_entropy(std::span<const double> probs, std::span<const double> soft_label) {
  double l = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c)
    if (soft_label[c] != 0.0) l -= soft_label[c] * std::log(std::max(probs[c], kLossEpsilon));
  return l;
}

}  // namespace

double loss(std::span<const double> logits, std::span<const double> soft_label,
            const LossConfig& config) {
  if (logits.size() != soft_label.size())
    throw DataError("soft label size does not match the number of classes");
  return cross_entropy(adjusted_probs(logits, config), soft_label);
}

double backward(const ModelParams& params, std::span<const double> features,
                std::span<const double> soft_label, const LossConfig& config,
                Gradients& grads, double scale) {
  const ForwardResult fr = forward(params, features);
  const auto p = adjusted_probs(fr.logits, config);
  const double value = cross_entropy(p, soft_label);

  std::vector<double> dz(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) dz[k] = scale * (p[k] - soft_label[k]);

  std::vector<double> dh(static_cast<std::size_t>(params.hidden), 0.0);
  for (int k = 0; k < params.classes; ++k) {
    const double g = dz[static_cast<std::size_t>(k)];
    grads.b2[static_cast<std::size_t>(k)] += g;
    const std::size_t off = static_cast<std::size_t>(k) * params.hidden;
    for (int h = 0; h < params.hidden; ++h) {
      grads.w2[off + static_cast<std::size_t>(h)] += g * fr.hidden[static_cast<std::size_t>(h)];
      dh[static_cast<std::size_t>(h)] += g * params.w2[off + static_cast<std::size_t>(h)];
    }
  }
  for (int h = 0; h < params.hidden; ++h) {
    if (fr.hidden_pre[static_cast<std::size_t>(h)] <= 0.0) continue;
    const double g = dh[static_cast<std::size_t>(h)];
    grads.b1[static_cast<std::size_t>(h)] += g;
    double* row = grads.w1.data() + static_cast<std::size_t>(h) * params.input;
    for (int i = 0; i < params.input; ++i) row[i] += g * features[static_cast<std::size_t>(i)];
  }
  return value;
}

void SgdConfig::validate() const {
  if (!(base_lr > 0.0)) throw ConfigError("learning rate must be positive", "lr");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)", "momentum");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("lr decay must lie in (0, 1]", "lr_decay");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative", "weight_decay");
  for (int m : milestones)
    if (m < 1) throw ConfigError("lr milestones are 1-based epochs", "milestones");
}

double SgdConfig::lr_at(int epoch) const {
  double lr = base_lr;
  for (int m : milestones)
    if (epoch >= m) lr *= decay;
  return lr;
}

SgdOptimizer::SgdOptimizer(SgdConfig config, const ModelParams& shape)
    : config_(std::move(config)), velocity_(shape) {
  config_.validate();
  velocity_.set_zero();
}

void SgdOptimizer::step(ModelParams& params, const Gradients& grads, int epoch) {
  const double lr = config_.lr_at(epoch);
  const double mu = config_.momentum;
  const double wd = config_.weight_decay;
  auto update = [&](std::vector<double>& theta, std::vector<double>& vel,
                    const std::vector<double>& g) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      vel[i] = mu * vel[i] + g[i] + wd * theta[i];
      theta[i] -= lr * vel[i];
    }
  };
  update(params.w1, velocity_.w1, grads.w1);
  update(params.b1, velocity_.b1, grads.b1);
  update(params.w2, velocity_.w2, grads.w2);
  update(params.b2, velocity_.b2, grads.b2);
}

}  // namespace shapmix
