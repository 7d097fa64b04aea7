#pragma once

// Independent reference computations used to check the library. Nothing here
// calls into the code paths it verifies.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "shapmix/partition.hpp"
#include "shapmix/rng.hpp"

namespace oracle {

// Random 32-entry game table indexed by coalition bits.
inline std::vector<double> random_game(shapmix::Rng& rng) {
  std::vector<double> t(32);
  for (auto& x : t) x = rng.uniform(-1.0, 1.0);
  return t;
}

// Shapley value of the merged player `b` among {b} and the singletons of
// U - b, averaging its marginal contribution over every ordering.
inline double permutation_shapley(const std::vector<double>& table, unsigned b) {
  std::vector<int> players;  // -1 stands for the merged player
  players.push_back(-1);
  for (int p = 0; p < shapmix::kNumParts; ++p)
    if (!((b >> p) & 1u)) players.push_back(p);
  std::sort(players.begin(), players.end());
  double total = 0.0;
  long orderings = 0;
  do {
    unsigned before = 0;
    for (int pl : players) {
      if (pl == -1) {
        total += table[before | b] - table[before];
        break;
      }
      before |= 1u << pl;
    }
    ++orderings;
  } while (std::next_permutation(players.begin(), players.end()));
  return total / static_cast<double>(orderings);
}

// Central finite difference d f / d x at x.
template <typename F>
double central_difference(F&& f, double& x, double h) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace oracle
