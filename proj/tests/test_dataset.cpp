#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "shapmix/dataset.hpp"
#include "shapmix/errors.hpp"
#include "shapmix/rng.hpp"

using namespace shapmix;

namespace {

const Dims kSmall{2, 3, 25, 2};

LabeledDataset constant_dataset(std::vector<float> values, std::vector<int> labels, int K) {
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < values.size(); ++i)
    samples.push_back({SkeletonSequence(kSmall, values[i]), labels[i]});
  return LabeledDataset(kSmall, K, std::move(samples));
}

LabeledDataset random_dataset(Rng& rng, int n, int K) {
  std::vector<Sample> samples;
  for (int i = 0; i < n; ++i) {
    SkeletonSequence s(kSmall);
    for (auto& x : s.data()) x = static_cast<float>(rng.normal());
    samples.push_back({std::move(s), i % K});
  }
  return LabeledDataset(kSmall, K, std::move(samples));
}

}  // namespace

TEST_CASE("class stats on zero and constant data") {
  const auto zeros = compute_class_stats(constant_dataset({0.0f, 0.0f}, {0, 1}, 2));
  for (double m : zeros.mean_pose) CHECK(m == 0.0);
  CHECK(zeros.counts == std::vector<int>{1, 1});

  const auto k = compute_class_stats(constant_dataset({2.5f}, {0}, 1));
  for (double m : k.mean_pose) CHECK(m == doctest::Approx(2.5));
}

TEST_CASE("class stats of two samples is their elementwise average") {
  Rng rng(3);
  const auto ds = random_dataset(rng, 2, 2);
  const auto stats = compute_class_stats(ds);
  // Oracle: average each (c, v) cell by direct summation in long double.
  for (int c = 0; c < kSmall.channels; ++c)
    for (int v = 0; v < kSmall.joints; ++v) {
      long double sum = 0;
      for (const auto& s : ds.samples())
        for (int t = 0; t < kSmall.frames; ++t)
          for (int m = 0; m < kSmall.performers; ++m) sum += s.sequence.at(c, t, v, m);
      const double expect = static_cast<double>(sum / (2 * kSmall.frames * kSmall.performers));
      CHECK(stats.mean(c, v) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("mean pose is linear under concatenation") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int na = rng.uniform_int(1, 6), nb = rng.uniform_int(1, 6);
    const auto a = random_dataset(rng, na, 2);
    const auto b = random_dataset(rng, nb, 2);
    std::vector<Sample> both(a.samples().begin(), a.samples().end());
    both.insert(both.end(), b.samples().begin(), b.samples().end());
    const auto ab = compute_class_stats(LabeledDataset(kSmall, 2, both));
    const auto sa = compute_class_stats(a), sb = compute_class_stats(b);
    for (std::size_t i = 0; i < ab.mean_pose.size(); ++i) {
      const double w = (na * sa.mean_pose[i] + nb * sb.mean_pose[i]) / (na + nb);
      CHECK(std::abs(ab.mean_pose[i] - w) < 1e-9);
    }
  }
}

TEST_CASE("class stats reject empty datasets") {
  CHECK_THROWS_AS(compute_class_stats(LabeledDataset(kSmall, 2, {})), DataError);
}

TEST_CASE("long-tail profile") {
  CHECK(pareto_counts(2, 100, 100) == std::vector<int>{100, 1});
  CHECK(pareto_counts(3, 100, 600) == std::vector<int>{600, 60, 6});
  CHECK(pareto_counts(4, 1, 50) == std::vector<int>{50, 50, 50, 50});
  CHECK(pareto_counts(10, 100, 200) ==
        std::vector<int>{200, 120, 72, 43, 26, 15, 9, 6, 3, 2});
  CHECK_THROWS_AS(pareto_counts(1, 10, 10), ConfigError);
}

TEST_CASE("long-tail profile is non-increasing with the requested ratio") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = rng.uniform_int(2, 60);
    const double IF = rng.uniform(1.0, 200.0);
    const int mx = rng.uniform_int(10, 1000);
    const auto n = pareto_counts(K, IF, mx);
    for (int k = 1; k < K; ++k) CHECK(n[static_cast<std::size_t>(k)] <= n[static_cast<std::size_t>(k - 1)]);
    if (mx / IF < 1.0) continue;  // tail clamps to one sample
    const double ratio = static_cast<double>(n.front()) / n.back();
    const double tol = 1.0 / n.back();
    CHECK(ratio >= IF * (1 - tol) - 1e-12);
    CHECK(ratio <= IF * (1 + tol) + 1e-12);
  }
}

TEST_CASE("pareto subsampling") {
  const auto part = default_partition(25);
  SyntheticConfig cfg;
  cfg.num_classes = 3;
  cfg.per_class = 20;
  cfg.dims = {3, 8, 25, 1};
  const auto pool = generate_synthetic_dataset(cfg, part);
  const auto lt = pareto_subsample(pool, 10, 20, 42);
  auto counts = lt.class_counts();
  std::sort(counts.rbegin(), counts.rend());
  CHECK(counts == std::vector<int>{20, 6, 2});
  CHECK(lt.ground_truth_parts() == pool.ground_truth_parts());
  CHECK(pareto_subsample(pool, 10, 20, 42) == lt);

  const auto balanced = pareto_subsample(pool, 1, 20, 1);
  CHECK(balanced.class_counts() == std::vector<int>{20, 20, 20});

  try {
    (void)pareto_subsample(pool, 10, 25, 1);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("action_") != std::string::npos);
  }
}

TEST_CASE("head/tail identity follows the seed") {
  const auto part = default_partition(25);
  SyntheticConfig cfg;
  cfg.num_classes = 6;
  cfg.per_class = 10;
  cfg.dims = {3, 4, 25, 1};
  const auto pool = generate_synthetic_dataset(cfg, part);
  std::set<int> heads;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto counts = pareto_subsample(pool, 10, 10, seed).class_counts();
    heads.insert(static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin()));
  }
  CHECK(heads.size() > 1);
}

TEST_CASE("shot buckets") {
  CHECK(shot_bucket(600) == ShotBucket::many);
  CHECK(shot_bucket(101) == ShotBucket::many);
  CHECK(shot_bucket(100) == ShotBucket::medium);
  CHECK(shot_bucket(20) == ShotBucket::medium);
  CHECK(shot_bucket(19) == ShotBucket::few);
  CHECK(shot_bucket(0) == ShotBucket::few);
  const std::vector<int> counts{200, 50, 3};
  CHECK(shot_split(counts) ==
        std::vector<ShotBucket>{ShotBucket::many, ShotBucket::medium, ShotBucket::few});
  CHECK(shot_bucket(30, {25, 5}) == ShotBucket::many);
}

TEST_CASE("synthetic generator") {
  const auto part = default_partition(25);
  SyntheticConfig cfg;
  cfg.num_classes = 4;
  cfg.per_class = 3;
  cfg.dims = {3, 16, 25, 2};
  cfg.seed = 9;
  const auto a = generate_synthetic_dataset(cfg, part);
  const auto b = generate_synthetic_dataset(cfg, part);
  CHECK(a == b);
  CHECK(a.size() == 12);
  CHECK(a.ground_truth_parts().size() == 4);
  for (PartMask m : a.ground_truth_parts()) {
    CHECK(m.size() >= 1);
    CHECK(m.size() <= 3);
  }

  cfg.split = 1;
  const auto other = generate_synthetic_dataset(cfg, part);
  CHECK_FALSE(other == a);
  CHECK(other.ground_truth_parts() == a.ground_truth_parts());

  cfg.per_class = 0;
  CHECK_THROWS_AS(generate_synthetic_dataset(cfg, part), ConfigError);
  cfg.per_class = 3;
  cfg.num_classes = 1;
  CHECK_THROWS_AS(generate_synthetic_dataset(cfg, part), ConfigError);
  cfg.num_classes = 4;
  cfg.dims = {3, 16, 17, 1};
  CHECK_THROWS_AS(generate_synthetic_dataset(cfg, part), ConfigError);
}

TEST_CASE("dataset rejects inconsistent samples") {
  std::vector<Sample> bad{{SkeletonSequence(kSmall), 3}};
  CHECK_THROWS_AS(LabeledDataset(kSmall, 2, bad), DataError);
  std::vector<Sample> wrong_dims{{SkeletonSequence(Dims{1, 1, 25, 1}), 0}};
  CHECK_THROWS_AS(LabeledDataset(kSmall, 2, wrong_dims), DataError);
  SkeletonSequence nan_seq(kSmall);
  nan_seq.data()[0] = std::nanf("");
  std::vector<Sample> nan_samples{{nan_seq, 0}};
  CHECK_THROWS_AS(LabeledDataset(kSmall, 2, nan_samples), DataError);
}
