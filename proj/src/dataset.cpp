#include "shapmix/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "shapmix/errors.hpp"
#include "shapmix/rng.hpp"

namespace shapmix {

LabeledDataset::LabeledDataset(Dims dims, int num_classes, std::vector<Sample> samples,
                               std::vector<std::string> class_names,
                               std::vector<PartMask> ground_truth_parts)
    : dims_(dims),
      num_classes_(num_classes),
      samples_(std::move(samples)),
      class_names_(std::move(class_names)),
      ground_truth_(std::move(ground_truth_parts)) {
  if (!dims_.valid()) throw DataError("invalid dataset dims " + dims_.to_string());
  if (num_classes_ <= 0) throw DataError("dataset needs at least one class");
  if (!class_names_.empty() && class_names_.size() != static_cast<std::size_t>(num_classes_))
    throw DataError("class_names has " + std::to_string(class_names_.size()) +
                    " entries for " + std::to_string(num_classes_) + " classes");
  if (!ground_truth_.empty() && ground_truth_.size() != static_cast<std::size_t>(num_classes_))
    throw DataError("ground_truth_parts has " + std::to_string(ground_truth_.size()) +
                    " entries for " + std::to_string(num_classes_) + " classes");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.label < 0 || s.label >= num_classes_)
      throw DataError("sample " + std::to_string(i) + " has label " +
                      std::to_string(s.label) + " outside [0, " +
                      std::to_string(num_classes_) + ")");
    if (s.sequence.dims() != dims_)
      throw DataError("sample " + std::to_string(i) + " has dims " +
                      s.sequence.dims().to_string() + ", dataset expects " +
                      dims_.to_string());
    if (!s.sequence.all_finite())
      throw DataError("sample " + std::to_string(i) + " contains non-finite values");
  }
}

std::string LabeledDataset::class_name(int c) const {
  if (!class_names_.empty()) return class_names_[static_cast<std::size_t>(c)];
  return "class_" + std::to_string(c);
}

std::vector<int> LabeledDataset::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(num_classes_), 0);
  for (const auto& s : samples_) ++counts[static_cast<std::size_t>(s.label)];
  return counts;
}

ClassStats compute_class_stats(const LabeledDataset& dataset) {
  if (dataset.empty()) throw DataError("cannot compute statistics of an empty dataset");
  const Dims d = dataset.dims();
  ClassStats stats;
  stats.counts = dataset.class_counts();
  stats.channels = d.channels;
  stats.joints = d.joints;
  std::vector<double> sum(static_cast<std::size_t>(d.channels) * d.joints, 0.0);
  for (const auto& s : dataset.samples()) {
    const auto& seq = s.sequence;
    for (int c = 0; c < d.channels; ++c)
      for (int t = 0; t < d.frames; ++t)
        for (int v = 0; v < d.joints; ++v) {
          double acc = 0.0;
          for (int m = 0; m < d.performers; ++m) acc += seq.at(c, t, v, m);
          sum[static_cast<std::size_t>(c) * d.joints + v] += acc;
        }
  }
  const double denom = static_cast<double>(dataset.size()) * d.frames * d.performers;
  stats.mean_pose.resize(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i) stats.mean_pose[i] = sum[i] / denom;
  return stats;
}

std::vector<int> pareto_counts(int num_classes, double imbalance_factor, int max_per_class) {
  if (num_classes < 2) throw ConfigError("long-tail profile needs at least 2 classes", "classes");
  if (!(imbalance_factor >= 1.0) || !std::isfinite(imbalance_factor))
    throw ConfigError("imbalance factor must be >= 1", "imbalance_factor");
  if (max_per_class < 1) throw ConfigError("max_per_class must be positive", "max_per_class");
  std::vector<int> counts(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) {
    const double frac = static_cast<double>(k) / (num_classes - 1);
    const double n = max_per_class * std::pow(imbalance_factor, -frac);
    counts[static_cast<std::size_t>(k)] = std::max(1, static_cast<int>(std::lround(n)));
  }
  return counts;
}

LabeledDataset pareto_subsample(const LabeledDataset& dataset, double imbalance_factor,
                                int max_per_class, std::uint64_t seed) {
  const int K = dataset.num_classes();
  const auto profile = pareto_counts(K, imbalance_factor, max_per_class);

  std::vector<int> rank_to_class(static_cast<std::size_t>(K));
  std::iota(rank_to_class.begin(), rank_to_class.end(), 0);
  Rng order_rng(derive_seed(seed, "pareto.order"));
  std::shuffle(rank_to_class.begin(), rank_to_class.end(), order_rng.engine());

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < dataset.size(); ++i)
    by_class[static_cast<std::size_t>(dataset[i].label)].push_back(i);

  std::vector<char> keep(dataset.size(), 0);
  for (int rank = 0; rank < K; ++rank) {
    const int c = rank_to_class[static_cast<std::size_t>(rank)];
    auto& pool = by_class[static_cast<std::size_t>(c)];
    const int want = profile[static_cast<std::size_t>(rank)];
    if (static_cast<int>(pool.size()) < want)
      throw DataError("class " + dataset.class_name(c) + " has " +
                      std::to_string(pool.size()) + " samples, long-tail profile needs " +
                      std::to_string(want));
    Rng pick(derive_seed(seed, "pareto.pick", {static_cast<std::uint64_t>(c)}));
    std::shuffle(pool.begin(), pool.end(), pick.engine());
    for (int n = 0; n < want; ++n) keep[pool[static_cast<std::size_t>(n)]] = 1;
  }

  std::vector<Sample> kept;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (keep[i]) kept.push_back(dataset[i]);
  return LabeledDataset(dataset.dims(), K, std::move(kept), dataset.class_names(),
                        dataset.ground_truth_parts());
}

std::string_view bucket_name(ShotBucket b) {
  switch (b) {
    case ShotBucket::many: return "many";
    case ShotBucket::medium: return "medium";
    case ShotBucket::few: return "few";
  }
  return "?";
}

ShotBucket shot_bucket(int count, const ShotThresholds& th) {
  if (count > th.many_above) return ShotBucket::many;
  if (count < th.few_below) return ShotBucket::few;
  return ShotBucket::medium;
}

std::vector<ShotBucket> shot_split(std::span<const int> counts, const ShotThresholds& th) {
  std::vector<ShotBucket> out;
  out.reserve(counts.size());
  for (int n : counts) out.push_back(shot_bucket(n, th));
  return out;
}

namespace {

struct Vec3 {
  double x, y, z;
};

// Rough NTU-25 rest pose in metres, origin at the spine base.
constexpr std::array<Vec3, 25> kNtuRest = {{
    {0.00, 0.00, 0.0},   {0.00, 0.30, 0.0},   {0.00, 0.60, 0.0},   {0.00, 0.75, 0.0},
    {0.18, 0.55, 0.0},   {0.25, 0.30, 0.0},   {0.28, 0.08, 0.0},   {0.29, 0.02, 0.0},
    {-0.18, 0.55, 0.0},  {-0.25, 0.30, 0.0},  {-0.28, 0.08, 0.0},  {-0.29, 0.02, 0.0},
    {0.10, -0.02, 0.0},  {0.12, -0.45, 0.0},  {0.12, -0.85, 0.0},  {0.12, -0.90, 0.1},
    {-0.10, -0.02, 0.0}, {-0.12, -0.45, 0.0}, {-0.12, -0.85, 0.0}, {-0.12, -0.90, 0.1},
    {0.00, 0.55, 0.0},   {0.30, -0.05, 0.0},  {0.27, 0.00, 0.03},  {-0.30, -0.05, 0.0},
    {-0.27, 0.00, 0.03},
}};

double rest_coordinate(const PartPartition& partition, int c, int v) {
  if (partition.num_joints() == 25 && c < 3) {
    const Vec3& p = kNtuRest[static_cast<std::size_t>(v)];
    return c == 0 ? p.x : (c == 1 ? p.y : p.z);
  }
  // Generic layout: parts side by side along x, joints stacked along y.
  const Part part = partition.part_of_joint(v);
  const auto& js = partition.joints(part);
  const auto rank = std::find(js.begin(), js.end(), v) - js.begin();
  if (c == 0) return 0.2 * static_cast<double>(part) - 0.4;
  if (c == 1) return -0.1 * static_cast<double>(rank);
  return 0.0;
}

struct PartMotion {
  std::vector<double> direction;  // unit vector over channels
  std::vector<double> offset;     // static pose shift over channels
  double amplitude = 0.0;
};

struct ClassProfile {
  PartMask active;
  double frequency = 0.0;  // cycles per sequence
  std::array<PartMotion, kNumParts> motion;
};

ClassProfile make_class_profile(Rng& rng, int channels) {
  ClassProfile prof;
  const int n_active = rng.uniform_int(1, 3);
  std::array<int, kNumParts> order = {0, 1, 2, 3, 4};
  std::shuffle(order.begin(), order.end(), rng.engine());
  for (int i = 0; i < n_active; ++i)
    prof.active = prof.active | PartMask::of(static_cast<Part>(order[static_cast<std::size_t>(i)]));
  prof.frequency = rng.uniform(1.0, 4.0);
  for (auto& pm : prof.motion) {
    pm.direction.resize(static_cast<std::size_t>(channels));
    double norm = 0.0;
    for (auto& d : pm.direction) {
      d = rng.normal();
      norm += d * d;
    }
    norm = std::sqrt(norm);
    for (auto& d : pm.direction) d = norm > 0.0 ? d / norm : 0.0;
    pm.offset.resize(static_cast<std::size_t>(channels));
    for (auto& o : pm.offset) o = rng.normal(0.0, 0.15);
    pm.amplitude = rng.uniform(0.15, 0.35);
  }
  return prof;
}

}  // namespace

LabeledDataset generate_synthetic_dataset(const SyntheticConfig& config,
                                          const PartPartition& partition) {
  const Dims d = config.dims;
  if (config.num_classes < 2) throw ConfigError("need at least 2 classes", "classes");
  if (config.per_class < 1) throw ConfigError("per_class must be positive", "per_class");
  if (!d.valid()) throw ConfigError("invalid dims " + d.to_string(), "dims");
  if (d.joints != partition.num_joints())
    throw ConfigError("dims have " + std::to_string(d.joints) + " joints, partition covers " +
                          std::to_string(partition.num_joints()),
                      "dims");
  if (!(config.noise >= 0.0) || !(config.jitter >= 0.0))
    throw ConfigError("noise and jitter must be non-negative", "noise");

  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<ClassProfile> profiles;
  std::vector<PartMask> truth;
  std::vector<std::string> names;
  for (int c = 0; c < config.num_classes; ++c) {
    Rng rng(derive_seed(config.seed, "synthetic.class", {static_cast<std::uint64_t>(c)}));
    profiles.push_back(make_class_profile(rng, d.channels));
    truth.push_back(profiles.back().active);
    names.push_back("action_" + std::to_string(c));
  }

  // Distal joints of a part move more than proximal ones.
  std::vector<double> reach(static_cast<std::size_t>(d.joints));
  for (int p = 0; p < kNumParts; ++p) {
    const auto& js = partition.joints(static_cast<Part>(p));
    for (std::size_t r = 0; r < js.size(); ++r)
      reach[static_cast<std::size_t>(js[r])] =
          static_cast<double>(r + 1) / static_cast<double>(js.size());
  }

  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(config.num_classes) * config.per_class);
  for (int c = 0; c < config.num_classes; ++c) {
    const ClassProfile& prof = profiles[static_cast<std::size_t>(c)];
    for (int n = 0; n < config.per_class; ++n) {
      Rng rng(derive_seed(config.seed, "synthetic.sample",
                          {config.split, static_cast<std::uint64_t>(c),
                           static_cast<std::uint64_t>(n)}));
      const double amp_scale = 1.0 + config.jitter * rng.uniform(-0.3, 0.3);
      const double offset_scale = 1.0 + config.jitter * rng.uniform(-0.3, 0.3);
      const double speed = 1.0 + config.jitter * rng.uniform(-0.15, 0.15);
      const double phase = rng.uniform(0.0, two_pi);
      const double idle_phase = rng.uniform(0.0, two_pi);
      std::vector<double> shift(static_cast<std::size_t>(d.channels));
      for (auto& s : shift) s = rng.normal(0.0, 0.1 * config.jitter);

      SkeletonSequence seq(d);
      for (int c_ = 0; c_ < d.channels; ++c_)
        for (int t = 0; t < d.frames; ++t) {
          const double u = static_cast<double>(t) / d.frames;
          const double idle = c_ == 1 ? 0.03 * std::sin(two_pi * 0.7 * u + idle_phase) : 0.0;
          const double wave = std::sin(two_pi * prof.frequency * speed * u + phase);
          for (int v = 0; v < d.joints; ++v) {
            const Part part = partition.part_of_joint(v);
            double base = rest_coordinate(partition, c_, v) + shift[static_cast<std::size_t>(c_)] + idle;
            if (prof.active.contains(part)) {
              const PartMotion& pm = prof.motion[static_cast<std::size_t>(part)];
              const double w = reach[static_cast<std::size_t>(v)];
              base += w * (offset_scale * pm.offset[static_cast<std::size_t>(c_)] +
                           amp_scale * pm.amplitude * pm.direction[static_cast<std::size_t>(c_)] * wave);
            }
            for (int m = 0; m < d.performers; ++m) {
              const double perf = c_ == 0 ? 0.8 * m : 0.0;
              seq.at(c_, t, v, m) =
                  static_cast<float>(base + perf + rng.normal(0.0, config.noise));
            }
          }
        }
      samples.push_back({std::move(seq), c});
    }
  }
  return LabeledDataset(d, config.num_classes, std::move(samples), std::move(names),
                        std::move(truth));
}

}  // namespace shapmix
