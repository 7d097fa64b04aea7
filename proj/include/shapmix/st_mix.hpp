#pragma once

#include <optional>
#include <vector>

#include "shapmix/partition.hpp"
#include "shapmix/rng.hpp"
#include "shapmix/skeleton.hpp"

namespace shapmix {

struct SpatialSelection {
  PartMask parts;
  std::vector<int> joints;  // union of the selected parts' joints, sorted
};

// Destination window [dest_start, dest_start + dest_len) in the base sample
// receives dest_len frames down-sampled from [src_start, src_start + src_len)
// of the source sample.
struct TemporalSegment {
  int dest_start = 0;
  int dest_len = 0;
  int src_start = 0;
  int src_len = 0;
};

enum class MixKind { mixup, cutmix };

struct MixProvenance {
  int base_index = -1;    // i
  int source_index = -1;  // j
  std::optional<SpatialSelection> selection;
  std::optional<TemporalSegment> segment;
  // Shap-Mix only: the coalition drawn from a class importance distribution,
  // the class it was drawn for, and whether the pasted parts are its complement.
  std::optional<PartMask> drawn_coalition;
  int drawn_for_class = -1;
  bool pasted_complement = false;
};

struct MixOutcome {
  SkeletonSequence sequence;
  std::vector<double> label_weights;  // per class, sums to 1
  MixKind kind = MixKind::mixup;
  double lambda = 1.0;  // fraction kept from the base sample
  MixProvenance provenance;
};

// A sequence together with its class and position in its batch/dataset.
struct LabeledView {
  const SkeletonSequence& sequence;
  int label;
  int index = -1;
};

enum class LambdaDistribution { uniform, beta };

struct MixConfig {
  double mixup_prob = 0.5;
  int parts_min = 2;
  int parts_max = 3;
  double temporal_min = 0.4;
  double temporal_max = 0.7;
  LambdaDistribution lambda_distribution = LambdaDistribution::uniform;
  double beta_alpha = 1.0;
  // Place the pasted clip at the source clip's start (clamped) instead of an
  // independently drawn destination.
  bool align_temporal = false;

  void validate() const;  // throws ConfigError naming the field
};

// s_i * lambda + s_j * (1 - lambda). Throws DataError on dim mismatch.
MixOutcome mixup_blend(LabeledView base, LabeledView source, double lambda, int num_classes);

SpatialSelection make_selection(PartMask parts, const PartPartition& partition);

SpatialSelection sample_spatial_parts(Rng& rng, int parts_min, int parts_max,
                                      const PartPartition& partition);

TemporalSegment sample_temporal_segment(Rng& rng, int frames, double ratio_min,
                                        double ratio_max, bool align = false);

// Evenly spaced nearest-index selection of `target` frames out of `src_len`.
std::vector<int> downsample_indices(int src_len, int target);

// Row-major T x V mask; 1 marks entries replaced by the source sample.
std::vector<unsigned char> build_mask(const SpatialSelection& selection,
                                      const TemporalSegment& segment, const Dims& dims);

// Exact fraction of the (T, V) grid taken from the source sample.
double replaced_fraction(const SpatialSelection& selection, const TemporalSegment& segment,
                         const Dims& dims);

MixOutcome apply_cutmix(LabeledView base, LabeledView source,
                        const SpatialSelection& selection, const TemporalSegment& segment,
                        int num_classes);

double sample_lambda(Rng& rng, const MixConfig& config);

// Random branch choice between global Mixup and part-level spatial-temporal
// Cut-Mix with uniformly random parts.
MixOutcome st_mix(Rng& rng, LabeledView base, LabeledView source, const MixConfig& config,
                  const PartPartition& partition, int num_classes);

}  // namespace shapmix
