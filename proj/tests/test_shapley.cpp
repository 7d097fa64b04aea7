#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "shapmix/errors.hpp"
#include "shapmix/shapley.hpp"

using namespace shapmix;

namespace {

GameFn table_game(const std::vector<double>& table) {
  return [&table](PartMask s) { return table[s.bits()]; };
}

std::vector<PartMask> all_nonempty() {
  std::vector<PartMask> out;
  for (unsigned b = 1; b < 32; ++b) out.emplace_back(static_cast<std::uint8_t>(b));
  return out;
}

}  // namespace

TEST_CASE("additive game gives the sum of part weights") {
  const std::array<double, kNumParts> w{0.3, -0.2, 0.7, 0.1, 0.05};
  const double w0 = 0.4;
  const GameFn game = [&](PartMask s) {
    double v = w0;
    for (Part p : s.parts()) v += w[static_cast<std::size_t>(p)];
    return v;
  };
  for (PartMask b : all_nonempty()) {
    double expect = 0;
    for (Part p : b.parts()) expect += w[static_cast<std::size_t>(p)];
    CHECK(std::abs(exact_shapley(game, b) - expect) < 1e-12);
  }
}

TEST_CASE("null player receives zero") {
  Rng rng(1);
  auto table = oracle::random_game(rng);
  // Make the game ignore the left leg.
  const unsigned leg = 1u << static_cast<unsigned>(Part::left_leg);
  for (unsigned s = 0; s < 32; ++s)
    if (s & leg) table[s] = table[s & ~leg];
  CHECK(std::abs(exact_shapley(table_game(table), PartMask::of(Part::left_leg))) < 1e-12);

  const GameFn constant = [](PartMask) { return 0.7; };
  for (PartMask b : all_nonempty()) CHECK(exact_shapley(constant, b) == 0.0);
  CHECK_THROWS_AS(exact_shapley(constant, PartMask::none()), ConfigError);
}

TEST_CASE("exact shapley matches the permutation oracle") {
  Rng rng(2);
  for (int g = 0; g < 30; ++g) {
    const auto table = oracle::random_game(rng);
    for (PartMask b : all_nonempty())
      CHECK(std::abs(exact_shapley(table_game(table), b) -
                     oracle::permutation_shapley(table, b.bits())) < 1e-9);
  }
}

TEST_CASE("efficiency, symmetry and linearity") {
  Rng rng(3);
  for (int g = 0; g < 30; ++g) {
    const auto t1 = oracle::random_game(rng);
    double sum = 0;
    for (int p = 0; p < kNumParts; ++p)
      sum += exact_shapley(table_game(t1), PartMask::of(static_cast<Part>(p)));
    CHECK(std::abs(sum - (t1[31] - t1[0])) < 1e-9);

    // Symmetrize parts 1 and 2 by averaging over the swap.
    auto swap12 = [](unsigned s) {
      const unsigned a = (s >> 1) & 1u, b = (s >> 2) & 1u;
      return (s & ~6u) | (a << 2) | (b << 1);
    };
    std::vector<double> sym(32);
    for (unsigned s = 0; s < 32; ++s) sym[s] = 0.5 * (t1[s] + t1[swap12(s)]);
    CHECK(std::abs(exact_shapley(table_game(sym), PartMask::of(Part::left_arm)) -
                   exact_shapley(table_game(sym), PartMask::of(Part::right_arm))) < 1e-12);

    const auto t2 = oracle::random_game(rng);
    const double a = rng.uniform(-2, 2), c = rng.uniform(-2, 2);
    std::vector<double> mix(32);
    for (unsigned s = 0; s < 32; ++s) mix[s] = a * t1[s] + c * t2[s];
    for (PartMask b : default_coalitions())
      CHECK(std::abs(exact_shapley(table_game(mix), b) -
                     (a * exact_shapley(table_game(t1), b) + c * exact_shapley(table_game(t2), b))) <
            1e-9);
  }
}

TEST_CASE("memoization is transparent and bounded") {
  Rng rng(4);
  const auto table = oracle::random_game(rng);
  for (PartMask b : all_nonempty()) {
    MemoizedGame memo(table_game(table));
    const GameFn wrapped = [&memo](PartMask s) { return memo(s); };
    CHECK(exact_shapley(wrapped, b) == exact_shapley(table_game(table), b));
    const int rest = kNumParts - b.size();
    CHECK(memo.evaluations() <= 2 * (1 << rest));
  }
}

TEST_CASE("admissible coalitions") {
  const auto d = default_coalitions();
  CHECK(d.size() == 20);
  for (std::size_t k = 0; k < d.size(); ++k) {
    CHECK((d[k].size() == 2 || d[k].size() == 3));
    for (std::size_t j = 0; j < k; ++j) CHECK(d[j] != d[k]);
  }
  const std::vector<int> singles{1};
  CHECK(admissible_coalitions(singles).size() == 5);
  const std::vector<int> sizes{1, 2, 3, 4, 5};
  CHECK(admissible_coalitions(sizes).size() == 31);
}

TEST_CASE("marginal sampling distribution and unbiasedness") {
  Rng rng(5);
  const auto table = oracle::random_game(rng);
  const GameFn game = table_game(table);

  // |U - b| = 3 for pair coalitions: each context size has probability 1/4.
  const std::vector<PartMask> pair{PartMask::of(Part::trunk) | PartMask::of(Part::left_arm)};
  std::array<int, 4> sizes{};
  const int draws = 100000;
  double sum = 0, sq = 0;
  for (int k = 0; k < draws; ++k) {
    const auto s = sample_marginal(rng, game, pair);
    CHECK_FALSE(s.context.intersects(s.coalition));
    ++sizes[static_cast<std::size_t>(s.context.size())];
    sum += s.estimate;
    sq += s.estimate * s.estimate;
  }
  for (int n : sizes) CHECK(std::abs(n - draws / 4.0) < 3 * std::sqrt(draws * 0.25 * 0.75));
  const double mean = sum / draws;
  const double se = std::sqrt((sq / draws - mean * mean) / draws);
  CHECK(std::abs(mean - exact_shapley(game, pair[0])) < 3 * se);

  const GameFn constant = [](PartMask) { return 0.25; };
  for (int k = 0; k < 100; ++k) CHECK(sample_marginal(rng, constant, default_coalitions()).estimate == 0.0);

  std::vector<int> picked(20, 0);
  const auto coals = default_coalitions();
  for (int k = 0; k < 20000; ++k) {
    const auto s = sample_marginal(rng, game, coals);
    ++picked[static_cast<std::size_t>(std::find(coals.begin(), coals.end(), s.coalition) - coals.begin())];
  }
  for (int n : picked) CHECK(std::abs(n - 1000) < 3 * std::sqrt(20000 * 0.05 * 0.95));
}

TEST_CASE("EMA arithmetic") {
  const PartMask b = default_coalitions()[0];
  SaliencyTable t(2, default_coalitions(), 0.9);
  CHECK(t.value(0, 0) == 0.0);
  CHECK(t.update_count(0, 0) == 0);
  t.update(0, b, 1.0);
  CHECK(t.value(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(t.update_count(0, 0) == 1);
  CHECK(t.total_updates(0) == 1);
  CHECK(t.total_updates(1) == 0);

  SaliencyTable g(1, default_coalitions(), 0.9, 0.5);
  const double k = -0.3;
  for (int n = 0; n < 25; ++n) g.update(0, b, k);
  CHECK(g.value(0, 0) == doctest::Approx(k + (0.5 - k) * std::pow(0.9, 25)).epsilon(1e-12));

  SaliencyTable z(1, default_coalitions(), 0.0);
  z.update(0, b, 0.3);
  z.update(0, b, -0.8);
  CHECK(z.value(0, 0) == -0.8);

  CHECK_THROWS_AS(t.update(0, PartMask::of(Part::trunk), 1.0), ConfigError);
  CHECK_THROWS_AS(t.update(0, b, std::nan("")), NumericError);
  CHECK_THROWS_AS(SaliencyTable(1, default_coalitions(), 1.0), ConfigError);
}

TEST_CASE("normalized saliency") {
  SaliencyTable t(3, default_coalitions(), 0.0);
  for (PartMask b : default_coalitions()) t.update(0, b, 0.7);
  for (double v : normalized_saliency(t, 0)) CHECK(v == doctest::Approx(0.05));

  t.update(1, default_coalitions()[4], 0.2);
  const auto one = normalized_saliency(t, 1);
  CHECK(one[4] == 1.0);
  CHECK(std::accumulate(one.begin(), one.end(), 0.0) == doctest::Approx(1.0));

  t.update(2, default_coalitions()[0], -1.0);
  for (double v : normalized_saliency(t, 2)) CHECK(v == doctest::Approx(0.05));
}

TEST_CASE("masked input composition") {
  const auto part = default_partition(25);
  const Dims d{3, 6, 25, 2};
  Rng rng(6);
  std::vector<Sample> samples;
  for (int i = 0; i < 3; ++i) {
    SkeletonSequence s(d);
    for (auto& x : s.data()) x = static_cast<float>(rng.normal());
    samples.push_back({s, i % 2});
  }
  const LabeledDataset ds(d, 2, samples);
  const auto stats = compute_class_stats(ds);
  const auto& seq = samples[0].sequence;

  CHECK(compose_masked_input(seq, PartMask::all(), part, stats) == seq);

  const auto empty = compose_masked_input(seq, PartMask::none(), part, stats);
  for (int c = 0; c < d.channels; ++c)
    for (int t = 0; t < d.frames; ++t)
      for (int v = 0; v < d.joints; ++v)
        for (int m = 0; m < d.performers; ++m)
          CHECK(empty.at(c, t, v, m) == static_cast<float>(stats.mean(c, v)));

  const auto trunk = compose_masked_input(seq, PartMask::of(Part::trunk), part, stats);
  for (int c = 0; c < d.channels; ++c)
    for (int t = 0; t < d.frames; ++t)
      for (int v = 0; v < d.joints; ++v)
        for (int m = 0; m < d.performers; ++m) {
          const float expect = part.part_of_joint(v) == Part::trunk
                                   ? seq.at(c, t, v, m)
                                   : static_cast<float>(stats.mean(c, v));
          CHECK(trunk.at(c, t, v, m) == expect);
        }
}

TEST_CASE("confidence game") {
  const auto part = default_partition(25);
  const Dims d{3, 4, 25, 1};
  std::vector<Sample> samples{{SkeletonSequence(d, 0.5f), 0}, {SkeletonSequence(d, -0.5f), 1}};
  const LabeledDataset ds(d, 4, samples);
  const auto stats = compute_class_stats(ds);
  const FeatureSpec spec{d};
  const ModelParams zero(spec.dim(), 8, 4);
  const auto f = confidence_game(zero, samples[0].sequence, 2, part, stats);
  for (PartMask s : all_nonempty()) CHECK(f(s) == doctest::Approx(0.25).epsilon(1e-15));

  const auto params = init_params(spec.dim(), 8, 4, 11);
  Rng rng(9);
  SkeletonSequence probe(d);
  for (auto& x : probe.data()) x = static_cast<float>(rng.normal());
  for (unsigned s = 0; s < 32; ++s) {
    double total = 0;
    for (int c = 0; c < 4; ++c) {
      const auto g = confidence_game(params, probe, c, part, stats);
      const double v = g(PartMask(static_cast<std::uint8_t>(s)));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}
