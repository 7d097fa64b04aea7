#include <doctest.h>

#include <cmath>
#include <numeric>

#include "shapmix/errors.hpp"
#include "shapmix/st_mix.hpp"

using namespace shapmix;

namespace {

const Dims kDims{3, 64, 25, 2};

SkeletonSequence ramp(const Dims& d, float offset) {
  SkeletonSequence s(d);
  auto data = s.data();
  for (std::size_t k = 0; k < data.size(); ++k) data[k] = offset + 0.001f * static_cast<float>(k);
  return s;
}

double weight_sum(const std::vector<double>& w) { return std::accumulate(w.begin(), w.end(), 0.0); }

}  // namespace

TEST_CASE("mixup identities") {
  const Dims d{3, 4, 25, 1};
  const SkeletonSequence a(d, 2.0f), b(d, 4.0f);
  const auto one = mixup_blend({a, 0}, {b, 1}, 1.0, 3);
  CHECK(one.sequence == a);
  CHECK(one.label_weights == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(mixup_blend({a, 0}, {b, 1}, 0.0, 3).sequence == b);
  const auto half = mixup_blend({a, 0}, {b, 1}, 0.5, 3);
  for (float x : half.sequence.data()) CHECK(x == 3.0f);
  CHECK(half.label_weights == std::vector<double>{0.5, 0.5, 0.0});
  CHECK_THROWS_AS(mixup_blend({a, 0}, {SkeletonSequence(kDims), 1}, 0.5, 3), DataError);
}

TEST_CASE("spatial part sampling") {
  const auto part = default_partition(25);
  Rng rng(1);
  const auto all = sample_spatial_parts(rng, 5, 5, part);
  CHECK(all.parts == PartMask::all());
  CHECK(all.joints.size() == 25);
  for (int v = 0; v < 25; ++v) CHECK(all.joints[static_cast<std::size_t>(v)] == v);

  CHECK_THROWS_AS(sample_spatial_parts(rng, 0, 2, part), ConfigError);
  CHECK_THROWS_AS(sample_spatial_parts(rng, 3, 2, part), ConfigError);
  CHECK_THROWS_AS(sample_spatial_parts(rng, 1, 6, part), ConfigError);

  // Each part is selected with probability E[N_s] / 5 = 0.5 under bounds [2, 3].
  const int draws = 100000;
  std::array<int, kNumParts> hits{};
  for (int k = 0; k < draws; ++k) {
    const auto sel = sample_spatial_parts(rng, 2, 3, part);
    const int n = sel.parts.size();
    REQUIRE((n == 2 || n == 3));
    for (Part p : sel.parts.parts()) ++hits[static_cast<std::size_t>(p)];
  }
  const double p = 0.5;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int h : hits) CHECK(std::abs(h - draws * p) < 3 * sigma);
}

TEST_CASE("temporal segment bounds") {
  Rng rng(2);
  const auto whole = sample_temporal_segment(rng, 64, 1.0, 1.0);
  CHECK(whole.dest_len == 64);
  CHECK(whole.src_len == 64);
  CHECK(whole.dest_start == 0);
  CHECK(whole.src_start == 0);

  int lo = 64, hi = 0;
  for (int k = 0; k < 20000; ++k) {
    const auto s = sample_temporal_segment(rng, 64, 0.4, 0.7);
    lo = std::min(lo, s.dest_len);
    hi = std::max(hi, s.dest_len);
    CHECK(s.src_len >= s.dest_len);
    CHECK(s.src_start + s.src_len <= 64);
    CHECK(s.dest_start + s.dest_len <= 64);
    CHECK(s.src_start >= 0);
    CHECK(s.dest_start >= 0);
  }
  CHECK(lo == 26);
  CHECK(hi == 45);
  CHECK_THROWS_AS(sample_temporal_segment(rng, 64, 0.0, 0.5), ConfigError);
  CHECK_THROWS_AS(sample_temporal_segment(rng, 64, 0.6, 0.5), ConfigError);

  for (int k = 0; k < 1000; ++k) {
    const auto s = sample_temporal_segment(rng, 64, 0.4, 0.7, true);
    CHECK(s.dest_start == std::min(s.src_start, 64 - s.dest_len));
  }
}

TEST_CASE("down-sampling indices") {
  CHECK(downsample_indices(5, 3) == std::vector<int>{0, 2, 4});
  CHECK(downsample_indices(4, 4) == std::vector<int>{0, 1, 2, 3});
  CHECK(downsample_indices(7, 1) == std::vector<int>{3});
  CHECK_THROWS_AS(downsample_indices(3, 4), ConfigError);
  for (int src = 2; src <= 64; ++src)
    for (int n = 2; n <= src; ++n) {
      const auto idx = downsample_indices(src, n);
      CHECK(idx.front() == 0);
      CHECK(idx.back() == src - 1);
      for (std::size_t k = 1; k < idx.size(); ++k) CHECK(idx[k] > idx[k - 1]);
      // Independent oracle in floating point; half-way cases never occur
      // ambiguously because both round half up.
      for (int k = 0; k < n; ++k) {
        const double exact = static_cast<double>(k) * (src - 1) / (n - 1);
        CHECK(idx[static_cast<std::size_t>(k)] == static_cast<int>(std::floor(exact + 0.5)));
      }
    }
}

TEST_CASE("mask and replaced fraction") {
  const Dims d{3, 10, 25, 1};
  SpatialSelection sel{PartMask::none(), {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
  const TemporalSegment seg{2, 5, 0, 5};
  CHECK(replaced_fraction(sel, seg, d) == doctest::Approx(0.2).epsilon(1e-15));
  const auto mask = build_mask(sel, seg, d);
  int ones = 0;
  for (int t = 0; t < d.frames; ++t)
    for (int v = 0; v < d.joints; ++v) {
      const unsigned char m = mask[static_cast<std::size_t>(t) * d.joints + v];
      CHECK((m == 0 || m == 1));
      const bool expect = t >= 2 && t < 7 && v < 10;
      CHECK(static_cast<bool>(m) == expect);
      ones += m;
    }
  CHECK(ones == 50);

  const auto part = default_partition(25);
  const auto full = build_mask(make_selection(PartMask::all(), part), {0, 10, 0, 10}, d);
  for (auto m : full) CHECK(m == 1);
}

TEST_CASE("cut-mix labels and copy semantics") {
  const Dims d{3, 10, 25, 2};
  const auto a = ramp(d, 0.0f), b = ramp(d, 100.0f);
  SpatialSelection sel{PartMask::none(), {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
  const TemporalSegment seg{2, 5, 1, 9};
  const auto out = apply_cutmix({a, 0}, {b, 1}, sel, seg, 2);
  CHECK(out.label_weights[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(out.label_weights[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(out.lambda == doctest::Approx(0.8));
  const auto idx = downsample_indices(9, 5);
  const auto mask = build_mask(sel, seg, d);
  for (int c = 0; c < d.channels; ++c)
    for (int t = 0; t < d.frames; ++t)
      for (int v = 0; v < d.joints; ++v)
        for (int m = 0; m < d.performers; ++m) {
          const float got = out.sequence.at(c, t, v, m);
          if (mask[static_cast<std::size_t>(t) * d.joints + v]) {
            const int ts = 1 + idx[static_cast<std::size_t>(t - 2)];
            CHECK(got == b.at(c, ts, v, m));
          } else {
            CHECK(got == a.at(c, t, v, m));
          }
        }

  const auto part = default_partition(25);
  const auto full = apply_cutmix({a, 0}, {b, 1}, make_selection(PartMask::all(), part),
                                 {0, 10, 0, 10}, 2);
  CHECK(full.sequence == b);
  CHECK(full.lambda == 0.0);
  CHECK(full.label_weights == std::vector<double>{0.0, 1.0});

  CHECK_THROWS_AS(apply_cutmix({a, 0}, {b, 1}, sel, {6, 5, 0, 5}, 2), ConfigError);
  CHECK_THROWS_AS(apply_cutmix({a, 0}, {SkeletonSequence(kDims), 1}, sel, seg, 2), DataError);
}

TEST_CASE("st-mix branch probabilities and invariants") {
  const auto part = default_partition(25);
  const auto a = ramp(kDims, -1.0f), b = ramp(kDims, 3.0f);
  MixConfig cfg;
  Rng rng(7);
  cfg.mixup_prob = 1.0;
  for (int k = 0; k < 100; ++k) CHECK(st_mix(rng, {a, 0}, {b, 1}, cfg, part, 4).kind == MixKind::mixup);
  cfg.mixup_prob = 0.0;
  for (int k = 0; k < 100; ++k) CHECK(st_mix(rng, {a, 0}, {b, 1}, cfg, part, 4).kind == MixKind::cutmix);

  cfg.mixup_prob = 0.5;
  for (int k = 0; k < 300; ++k) {
    const auto out = st_mix(rng, {a, 0}, {b, 2}, cfg, part, 4);
    CHECK(weight_sum(out.label_weights) == doctest::Approx(1.0).epsilon(1e-15));
    for (double w : out.label_weights) CHECK(w >= 0.0);
    const auto x = out.sequence.data(), xa = a.data(), xb = b.data();
    if (out.kind == MixKind::mixup) {
      bool ok = true;
      for (std::size_t e = 0; e < x.size(); ++e)
        ok &= x[e] >= std::min(xa[e], xb[e]) && x[e] <= std::max(xa[e], xb[e]);
      CHECK(ok);
    }
    if (out.kind == MixKind::cutmix) {
      const auto& sel = *out.provenance.selection;
      const auto& seg = *out.provenance.segment;
      CHECK(out.label_weights[2] == replaced_fraction(sel, seg, kDims));
      // Every element is copied verbatim from one of the two sources.
      const auto idx = downsample_indices(seg.src_len, seg.dest_len);
      const auto mask = build_mask(sel, seg, kDims);
      bool copy_ok = true;
      for (int c = 0; c < kDims.channels; ++c)
        for (int t = 0; t < kDims.frames; ++t)
          for (int v = 0; v < kDims.joints; ++v)
            for (int m = 0; m < kDims.performers; ++m) {
              const float got = out.sequence.at(c, t, v, m);
              if (mask[static_cast<std::size_t>(t) * kDims.joints + v])
                copy_ok &= got == b.at(c, seg.src_start + idx[static_cast<std::size_t>(t - seg.dest_start)], v, m);
              else
                copy_ok &= got == a.at(c, t, v, m);
            }
      CHECK(copy_ok);
    }
  }
}

TEST_CASE("self-mix keeps a one-hot label") {
  const auto part = default_partition(25);
  const auto a = ramp(kDims, 0.0f);
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto out = st_mix(rng, {a, 1}, {a, 1}, MixConfig{}, part, 3);
    CHECK(out.label_weights == std::vector<double>{0.0, 1.0, 0.0});
  }
}

TEST_CASE("st-mix is deterministic for a fixed seed") {
  const auto part = default_partition(25);
  const auto a = ramp(kDims, 0.0f), b = ramp(kDims, 1.0f);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r1(seed), r2(seed);
    const auto x = st_mix(r1, {a, 0}, {b, 1}, MixConfig{}, part, 2);
    const auto y = st_mix(r2, {a, 0}, {b, 1}, MixConfig{}, part, 2);
    CHECK(x.sequence == y.sequence);
    CHECK(x.label_weights == y.label_weights);
    CHECK(x.kind == y.kind);
  }
}

TEST_CASE("lambda distributions") {
  Rng rng(4);
  MixConfig cfg;
  double sum = 0;
  for (int k = 0; k < 20000; ++k) {
    const double l = sample_lambda(rng, cfg);
    CHECK(l >= 0.0);
    CHECK(l <= 1.0);
    sum += l;
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
  cfg.lambda_distribution = LambdaDistribution::beta;
  cfg.beta_alpha = 0.2;
  int extreme = 0;
  for (int k = 0; k < 20000; ++k) {
    const double l = sample_lambda(rng, cfg);
    CHECK(l >= 0.0);
    CHECK(l <= 1.0);
    extreme += l < 0.1 || l > 0.9;
  }
  CHECK(extreme > 20000 * 0.5);

  MixConfig bad;
  bad.mixup_prob = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = MixConfig{};
  bad.parts_min = 4;
  bad.parts_max = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
