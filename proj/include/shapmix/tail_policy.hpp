#pragma once

#include <span>
#include <vector>

#include "shapmix/partition.hpp"
#include "shapmix/rng.hpp"
#include "shapmix/shapley.hpp"
#include "shapmix/st_mix.hpp"

namespace shapmix {

struct ImportanceDistribution {
  std::vector<double> probs;  // aligned with SaliencyTable::coalitions()
  double temperature = 0.2;
  int cls = -1;
  bool fallback_uniform = false;
};

// softmax(l1norm({v_b / |b|}) / tau), |b| being the joint count of b.
// Classes without table updates get a uniform distribution when
// `fallback_uniform` is set and a DataError otherwise.
ImportanceDistribution importance_distribution(const SaliencyTable& table, int cls,
                                               double temperature,
                                               const PartPartition& partition,
                                               bool fallback_uniform = true);

std::size_t sample_index(Rng& rng, std::span<const double> probs);

struct TailChoice {
  PartMask drawn;      // coalition drawn from d(drawn_for_class)
  PartMask pasted;     // parts copied from s_j into s_i
  int drawn_for_class = -1;
  bool complement = false;
};

// If count(c_i) > count(c_j): paste b ~ d(c_j). Otherwise paste U - b with
// b ~ d(c_i), keeping s_i's salient parts.
TailChoice tail_aware_parts(int base_class, int source_class, std::span<const int> counts,
                            const SaliencyTable& table, double temperature,
                            const PartPartition& partition, Rng& rng,
                            bool fallback_uniform = true);

struct ShapMixConfig {
  MixConfig mix;
  double temperature = 0.2;
  bool fallback_uniform = true;
};

// ST-Mix whose Cut-Mix spatial selection comes from tail_aware_parts.
MixOutcome shap_mix(Rng& rng, LabeledView base, LabeledView source, const SaliencyTable& table,
                    std::span<const int> counts, const ShapMixConfig& config,
                    const PartPartition& partition, int num_classes);

}  // namespace shapmix
