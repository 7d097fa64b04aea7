#include "shapmix/st_mix.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "shapmix/errors.hpp"

namespace shapmix {
namespace {

void require_same_dims(const SkeletonSequence& a, const SkeletonSequence& b) {
  if (a.dims() != b.dims())
    throw DataError("cannot mix sequences of dims " + a.dims().to_string() + " and " +
                    b.dims().to_string());
}

std::vector<double> two_class_label(int base, int source, double base_weight,
                                    double source_weight, int num_classes) {
  std::vector<double> w(static_cast<std::size_t>(num_classes), 0.0);
  if (base == source) {
    w[static_cast<std::size_t>(base)] = 1.0;
  } else {
    w[static_cast<std::size_t>(base)] = base_weight;
    w[static_cast<std::size_t>(source)] = source_weight;
  }
  return w;
}

}  // namespace

void MixConfig::validate() const {
  if (!(mixup_prob >= 0.0 && mixup_prob <= 1.0))
    throw ConfigError("mixup probability must lie in [0, 1]", "mixup_prob");
  if (parts_min < 1 || parts_max > kNumParts || parts_min > parts_max)
    throw ConfigError("spatial bounds must satisfy 1 <= min <= max <= 5", "spatial");
  if (!(temporal_min > 0.0 && temporal_min <= temporal_max && temporal_max <= 1.0))
    throw ConfigError("temporal bounds must satisfy 0 < min <= max <= 1", "temporal");
  if (lambda_distribution == LambdaDistribution::beta && !(beta_alpha > 0.0))
    throw ConfigError("beta alpha must be positive", "beta_alpha");
}

MixOutcome mixup_blend(LabeledView base, LabeledView source, double lambda, int num_classes) {
  require_same_dims(base.sequence, source.sequence);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]", "lambda");
  MixOutcome out;
  out.kind = MixKind::mixup;
  out.lambda = lambda;
  out.sequence = SkeletonSequence(base.sequence.dims());
  auto dst = out.sequence.data();
  auto a = base.sequence.data();
  auto b = source.sequence.data();
  for (std::size_t k = 0; k < dst.size(); ++k)
    dst[k] = static_cast<float>(lambda * static_cast<double>(a[k]) +
                                (1.0 - lambda) * static_cast<double>(b[k]));
  out.label_weights = two_class_label(base.label, source.label, lambda, 1.0 - lambda, num_classes);
  out.provenance.base_index = base.index;
  out.provenance.source_index = source.index;
  return out;
}

SpatialSelection make_selection(PartMask parts, const PartPartition& partition) {
  if (parts.empty()) throw ConfigError("spatial selection must not be empty", "spatial");
  return {parts, partition.joints_of(parts)};
}

SpatialSelection sample_spatial_parts(Rng& rng, int parts_min, int parts_max,
                                      const PartPartition& partition) {
  if (parts_min < 1 || parts_max > kNumParts || parts_min > parts_max)
    throw ConfigError("spatial bounds must satisfy 1 <= min <= max <= 5", "spatial");
  const int n = rng.uniform_int(parts_min, parts_max);
  std::array<int, kNumParts> order = {0, 1, 2, 3, 4};
  std::shuffle(order.begin(), order.end(), rng.engine());
  PartMask mask;
  for (int k = 0; k < n; ++k)
    mask = mask | PartMask::of(static_cast<Part>(order[static_cast<std::size_t>(k)]));
  return make_selection(mask, partition);
}

TemporalSegment sample_temporal_segment(Rng& rng, int frames, double ratio_min,
                                        double ratio_max, bool align) {
  if (frames < 1) throw ConfigError("sequence needs at least one frame", "frames");
  if (!(ratio_min > 0.0 && ratio_min <= ratio_max && ratio_max <= 1.0))
    throw ConfigError("temporal bounds must satisfy 0 < min <= max <= 1", "temporal");
  const double u = ratio_min == ratio_max ? ratio_min : rng.uniform(ratio_min, ratio_max);
  TemporalSegment seg;
  seg.dest_len = std::clamp(static_cast<int>(std::lround(u * frames)), 1, frames);
  seg.src_len = rng.uniform_int(seg.dest_len, frames);
  seg.src_start = rng.uniform_int(0, frames - seg.src_len);
  seg.dest_start = rng.uniform_int(0, frames - seg.dest_len);
  if (align) seg.dest_start = std::min(seg.src_start, frames - seg.dest_len);
  return seg;
}

std::vector<int> downsample_indices(int src_len, int target) {
  if (target < 1 || target > src_len)
    throw ConfigError("down-sampling target must lie in [1, src_len]", "temporal");
  std::vector<int> idx(static_cast<std::size_t>(target));
  if (target == 1) {
    idx[0] = (src_len - 1) / 2;
    return idx;
  }
  // round(k * (src_len - 1) / (target - 1)) in exact integer arithmetic.
  const long num = src_len - 1;
  const long den = target - 1;
  for (long k = 0; k < target; ++k)
    idx[static_cast<std::size_t>(k)] = static_cast<int>((2 * k * num + den) / (2 * den));
  return idx;
}

std::vector<unsigned char> build_mask(const SpatialSelection& selection,
                                      const TemporalSegment& segment, const Dims& dims) {
  std::vector<unsigned char> mask(static_cast<std::size_t>(dims.frames) * dims.joints, 0);
  for (int t = segment.dest_start; t < segment.dest_start + segment.dest_len; ++t)
    for (int v : selection.joints) mask[static_cast<std::size_t>(t) * dims.joints + v] = 1;
  return mask;
}

double replaced_fraction(const SpatialSelection& selection, const TemporalSegment& segment,
                         const Dims& dims) {
  const double cells = static_cast<double>(selection.joints.size()) * segment.dest_len;
  return cells / (static_cast<double>(dims.joints) * dims.frames);
}

MixOutcome apply_cutmix(LabeledView base, LabeledView source,
                        const SpatialSelection& selection, const TemporalSegment& segment,
                        int num_classes) {
  require_same_dims(base.sequence, source.sequence);
  const Dims d = base.sequence.dims();
  if (segment.dest_len < 1 || segment.dest_start < 0 ||
      segment.dest_start + segment.dest_len > d.frames || segment.src_len < segment.dest_len ||
      segment.src_start < 0 || segment.src_start + segment.src_len > d.frames)
    throw ConfigError("temporal segment does not fit " + std::to_string(d.frames) + " frames",
                      "temporal");
  for (int v : selection.joints)
    if (v < 0 || v >= d.joints) throw ConfigError("selected joint outside the skeleton", "spatial");

  MixOutcome out;
  out.kind = MixKind::cutmix;
  out.sequence = base.sequence;
  const auto frames = downsample_indices(segment.src_len, segment.dest_len);
  for (int c = 0; c < d.channels; ++c)
    for (int k = 0; k < segment.dest_len; ++k) {
      const int t_dst = segment.dest_start + k;
      const int t_src = segment.src_start + frames[static_cast<std::size_t>(k)];
      for (int v : selection.joints)
        for (int m = 0; m < d.performers; ++m)
          out.sequence.at(c, t_dst, v, m) = source.sequence.at(c, t_src, v, m);
    }
  const double replaced = replaced_fraction(selection, segment, d);
  out.lambda = 1.0 - replaced;
  out.label_weights = two_class_label(base.label, source.label, 1.0 - replaced, replaced, num_classes);
  out.provenance.base_index = base.index;
  out.provenance.source_index = source.index;
  out.provenance.selection = selection;
  out.provenance.segment = segment;
  return out;
}

double sample_lambda(Rng& rng, const MixConfig& config) {
  if (config.lambda_distribution == LambdaDistribution::beta)
    return rng.beta(config.beta_alpha, config.beta_alpha);
  return rng.uniform();
}

MixOutcome st_mix(Rng& rng, LabeledView base, LabeledView source, const MixConfig& config,
                  const PartPartition& partition, int num_classes) {
  if (rng.uniform() < config.mixup_prob)
    return mixup_blend(base, source, sample_lambda(rng, config), num_classes);
  const auto selection = sample_spatial_parts(rng, config.parts_min, config.parts_max, partition);
  const auto segment = sample_temporal_segment(rng, base.sequence.dims().frames,
                                               config.temporal_min, config.temporal_max,
                                               config.align_temporal);
  return apply_cutmix(base, source, selection, segment, num_classes);
}

}  // namespace shapmix
