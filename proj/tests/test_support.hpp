#pragma once

// Test-only oracles and helpers.  Nothing here calls into the sampler.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "pset/analysis.hpp"
#include "pset/random.hpp"

namespace pset::testing {

inline const std::vector<std::uint64_t> kSeeds{1, 2, 3};

inline double poisson_pmf(double lambda, std::uint64_t k) {
  const double kd = static_cast<double>(k);
  return std::exp(-lambda + kd * std::log(lambda) - std::lgamma(kd + 1.0));
}

inline double geometric_pmf(double z, std::uint64_t n) {
  return (1.0 - z) * std::pow(z, static_cast<double>(n));
}

inline double geom_dot_pmf(double z, std::uint64_t n) {
  if (n == 0) return 0.0;
  return static_cast<double>(n) * std::pow(z, static_cast<double>(n - 1)) * (1.0 - z) * (1.0 - z);
}

/// Chi-square p-value of draws against a pmf on the window [lo, hi]; the
/// mass below lo and above hi form two extra cells.
inline double window_gof(const std::function<std::uint64_t(RandomStream&)>& draw,
                         const std::function<double(std::uint64_t)>& pmf, std::uint64_t lo,
                         std::uint64_t hi, std::uint64_t draws, std::uint64_t seed) {
  RandomStream rng(seed);
  const std::size_t cells = hi - lo + 3;  // below, lo..hi, above
  std::vector<std::uint64_t> observed(cells, 0);
  for (std::uint64_t i = 0; i < draws; ++i) {
    const std::uint64_t k = draw(rng);
    const std::size_t cell = k < lo ? 0 : (k > hi ? cells - 1 : k - lo + 1);
    ++observed[cell];
  }
  std::vector<double> expected(cells, 0.0);
  double inside = 0.0;
  double below = 0.0;
  for (std::uint64_t k = 0; k < lo; ++k) below += pmf(k);
  for (std::uint64_t k = lo; k <= hi; ++k) {
    expected[k - lo + 1] = pmf(k);
    inside += expected[k - lo + 1];
  }
  expected.front() = below;
  expected.back() = std::max(0.0, 1.0 - inside - below);
  // Drop structurally empty edge cells (they would break the gof precondition).
  std::vector<std::uint64_t> obs;
  std::vector<double> exp;
  double mass = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    if (expected[i] <= 0.0) {
      if (observed[i] != 0) return 0.0;
      continue;
    }
    obs.push_back(observed[i]);
    exp.push_back(expected[i]);
    mass += expected[i];
  }
  for (auto& e : exp) e /= mass;
  return chi_square_gof(obs, exp).p_value;
}

/// True when the check passes for at least 2 of the 3 standard seeds.
inline bool majority_of_seeds(const std::function<bool(std::uint64_t)>& check) {
  int passed = 0;
  for (const auto seed : kSeeds) passed += check(seed) ? 1 : 0;
  return passed >= 2;
}

}  // namespace pset::testing
