#include "shapmix/tail_policy.hpp"

#include <cmath>

#include "shapmix/errors.hpp"

namespace shapmix {

ImportanceDistribution importance_distribution(const SaliencyTable& table, int cls,
                                               double temperature,
                                               const PartPartition& partition,
                                               bool fallback_uniform) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive", "tau");
  if (cls < 0 || cls >= table.num_classes()) throw ConfigError("class outside saliency table", "class");
  const auto& coalitions = table.coalitions();
  const std::size_t n = coalitions.size();
  ImportanceDistribution d;
  d.temperature = temperature;
  d.cls = cls;

  if (table.total_updates(cls) == 0) {
    if (!fallback_uniform)
      throw DataError("class " + std::to_string(cls) + " has no saliency estimates yet");
    d.fallback_uniform = true;
    d.probs.assign(n, 1.0 / static_cast<double>(n));
    return d;
  }

  std::vector<double> x(n);
  double l1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = table.value(cls, k) / partition.joint_count(coalitions[k]);
    l1 += std::abs(x[k]);
  }
  if (l1 == 0.0) {
    d.probs.assign(n, 1.0 / static_cast<double>(n));
    return d;
  }
  for (auto& v : x) v = v / l1 / temperature;
  d.probs = softmax(x);
  return d;
}

std::size_t sample_index(Rng& rng, std::span<const double> probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  // Rounding left u above the cumulative sum: return the last non-zero cell.
  for (std::size_t k = probs.size(); k-- > 0;)
    if (probs[k] > 0.0) return k;
  return probs.size() - 1;
}

TailChoice tail_aware_parts(int base_class, int source_class, std::span<const int> counts,
                            const SaliencyTable& table, double temperature,
                            const PartPartition& partition, Rng& rng, bool fallback_uniform) {
  const auto nb = static_cast<std::size_t>(base_class);
  const auto ns = static_cast<std::size_t>(source_class);
  if (nb >= counts.size() || ns >= counts.size())
    throw ConfigError("class counts missing for a mixed pair", "counts");
  TailChoice choice;
  if (counts[nb] > counts[ns]) {
    choice.drawn_for_class = source_class;
    choice.complement = false;
  } else {
    choice.drawn_for_class = base_class;
    choice.complement = true;
  }
  const auto d = importance_distribution(table, choice.drawn_for_class, temperature, partition,
                                         fallback_uniform);
  choice.drawn = table.coalitions()[sample_index(rng, d.probs)];
  choice.pasted = choice.complement ? choice.drawn.complement() : choice.drawn;
  return choice;
}

MixOutcome shap_mix(Rng& rng, LabeledView base, LabeledView source, const SaliencyTable& table,
                    std::span<const int> counts, const ShapMixConfig& config,
                    const PartPartition& partition, int num_classes) {
  if (rng.uniform() < config.mix.mixup_prob)
    return mixup_blend(base, source, sample_lambda(rng, config.mix), num_classes);
  const auto choice = tail_aware_parts(base.label, source.label, counts, table,
                                       config.temperature, partition, rng,
                                       config.fallback_uniform);
  if (choice.pasted.empty())
    throw DataError("tail-aware policy produced an empty selection; coalition '" +
                    choice.drawn.key() + "' covers every part");
  const auto selection = make_selection(choice.pasted, partition);
  const auto segment = sample_temporal_segment(rng, base.sequence.dims().frames,
                                               config.mix.temporal_min, config.mix.temporal_max,
                                               config.mix.align_temporal);
  MixOutcome out = apply_cutmix(base, source, selection, segment, num_classes);
  out.provenance.drawn_coalition = choice.drawn;
  out.provenance.drawn_for_class = choice.drawn_for_class;
  out.provenance.pasted_complement = choice.complement;
  return out;
}

}  // namespace shapmix
