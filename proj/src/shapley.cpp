#include "shapmix/shapley.hpp"

#include <algorithm>
#include <cmath>

#include "shapmix/errors.hpp"

namespace shapmix {
namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

double MemoizedGame::operator()(PartMask s) {
  auto& slot = cache_[s.bits()];
  if (!slot) {
    slot = game_(s);
    ++evaluations_;
  }
  return *slot;
}

double exact_shapley(const GameFn& game, PartMask coalition) {
  if (coalition.empty()) throw ConfigError("Shapley value needs a non-empty coalition", "coalition");
  const PartMask rest = coalition.complement();
  const int n = rest.size();
  const std::uint8_t rest_bits = rest.bits();
  double total = 0.0;
  // Enumerate every subset r of rest (including the empty set).
  std::uint8_t sub = 0;
  do {
    const PartMask r(sub);
    const double delta = game(r | coalition) - game(r);
    total += delta / binomial(n, r.size());
    sub = static_cast<std::uint8_t>((sub - rest_bits) & rest_bits);
  } while (sub != 0);
  return total / (n + 1);
}

std::vector<PartMask> admissible_coalitions(std::span<const int> sizes) {
  std::vector<PartMask> out;
  std::vector<int> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (int s : sorted) {
    if (s < 1 || s > kNumParts)
      throw ConfigError("coalition sizes must lie in [1, 5]", "coalition_sizes");
    for (unsigned bits = 1; bits < (1u << kNumParts); ++bits) {
      const PartMask m(static_cast<std::uint8_t>(bits));
      if (m.size() == s) out.push_back(m);
    }
  }
  if (out.empty()) throw ConfigError("no admissible coalitions", "coalition_sizes");
  return out;
}

std::vector<PartMask> default_coalitions() {
  constexpr int sizes[] = {2, 3};
  return admissible_coalitions(sizes);
}

MarginalSample sample_marginal(Rng& rng, const GameFn& game,
                               std::span<const PartMask> admissible) {
  if (admissible.empty()) throw ConfigError("no admissible coalitions", "coalition_sizes");
  MarginalSample s;
  s.coalition = admissible[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(admissible.size()) - 1))];
  std::vector<Part> rest = s.coalition.complement().parts();
  const int size = rng.uniform_int(0, static_cast<int>(rest.size()));
  std::shuffle(rest.begin(), rest.end(), rng.engine());
  for (int k = 0; k < size; ++k) s.context = s.context | PartMask::of(rest[static_cast<std::size_t>(k)]);
  s.estimate = game(s.context | s.coalition) - game(s.context);
  return s;
}

SaliencyTable::SaliencyTable(int num_classes, std::vector<PartMask> coalitions,
                             double momentum, double init_value)
    : num_classes_(num_classes),
      coalitions_(std::move(coalitions)),
      momentum_(momentum),
      init_value_(init_value) {
  if (num_classes_ <= 0) throw ConfigError("saliency table needs at least one class", "classes");
  if (coalitions_.empty()) throw ConfigError("saliency table needs coalitions", "coalition_sizes");
  if (!(momentum_ >= 0.0 && momentum_ < 1.0))
    throw ConfigError("EMA momentum must lie in [0, 1)", "ema");
  values_.assign(static_cast<std::size_t>(num_classes_) * coalitions_.size(), init_value_);
  counts_.assign(values_.size(), 0);
}

std::size_t SaliencyTable::index_of(PartMask coalition) const {
  const auto it = std::find(coalitions_.begin(), coalitions_.end(), coalition);
  if (it == coalitions_.end())
    throw ConfigError("coalition '" + coalition.key() + "' is not admissible", "coalition");
  return static_cast<std::size_t>(it - coalitions_.begin());
}

void SaliencyTable::update(int cls, PartMask coalition, double estimate) {
  if (cls < 0 || cls >= num_classes_) throw ConfigError("class outside saliency table", "class");
  if (!std::isfinite(estimate)) throw NumericError("non-finite Shapley estimate");
  const std::size_t at = offset(cls, index_of(coalition));
  values_[at] = momentum_ * values_[at] + (1.0 - momentum_) * estimate;
  ++counts_[at];
}

long long SaliencyTable::total_updates(int cls) const {
  long long n = 0;
  for (std::size_t k = 0; k < coalitions_.size(); ++k) n += update_count(cls, k);
  return n;
}

std::vector<double> normalized_saliency(const SaliencyTable& table, int cls) {
  const auto raw = table.values(cls);
  std::vector<double> out(raw.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    out[k] = std::max(raw[k], 0.0);
    sum += out[k];
  }
  if (sum <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
  } else {
    for (auto& x : out) x /= sum;
  }
  return out;
}

SkeletonSequence compose_masked_input(const SkeletonSequence& sequence, PartMask keep,
                                      const PartPartition& partition, const ClassStats& stats) {
  const Dims d = sequence.dims();
  if (d.joints != partition.num_joints() || d.joints != stats.joints || d.channels != stats.channels)
    throw DataError("masked input: sequence dims " + d.to_string() +
                    " do not match partition/statistics");
  SkeletonSequence out = sequence;
  for (int v = 0; v < d.joints; ++v) {
    if (keep.contains(partition.part_of_joint(v))) continue;
    for (int c = 0; c < d.channels; ++c) {
      const auto mean = static_cast<float>(stats.mean(c, v));
      for (int t = 0; t < d.frames; ++t)
        for (int m = 0; m < d.performers; ++m) out.at(c, t, v, m) = mean;
    }
  }
  return out;
}

GameFn confidence_game(const ModelParams& params, const SkeletonSequence& probe, int cls,
                       const PartPartition& partition, const ClassStats& stats) {
  return [&params, &probe, cls, &partition, &stats](PartMask keep) {
    const auto masked = compose_masked_input(probe, keep, partition, stats);
    const auto fr = forward(params, extract_features(masked));
    return fr.probs[static_cast<std::size_t>(cls)];
  };
}

}  // namespace shapmix
