#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace shapmix {

// Derives an independent stream seed from a master seed, a stream tag and
// a list of indices (epoch, iteration, sample, ...). Every randomized
// component draws from a stream derived this way so that results depend
// only on the master seed and the position in the run.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::initializer_list<std::uint64_t> indices = {});

class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  // Uniform integer in [lo, hi], both inclusive.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  double beta(double a, double b);

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
};

}  // namespace shapmix
