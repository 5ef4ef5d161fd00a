#pragma once

// Seedable random stream and the elementary distributions consumed by the
// samplers.  None of the std:: distribution objects are used: their output is
// implementation-defined, and every acceptance test here pins seeds.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include "pset/count.hpp"
#include "pset/errors.hpp"

namespace pset {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// 64-bit Mersenne Twister (MT19937-64).  Its output sequence is fixed by the
/// C++ standard, so draws are identical on every conforming platform.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed = kDefaultSeed)
      : seed_(seed), engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  result_type operator()() { return engine_(); }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a logarithm argument.
  double uniform_positive() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

namespace detail {

[[noreturn]] inline void domain_error(const std::string& what) {
  throw ParameterDomainError(what);
}

// Inversion by sequential search; expected cost O(lambda).
inline std::uint64_t poisson_inversion(double lambda, RandomStream& rng) {
  double u = rng.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= lambda / static_cast<double>(k);
    const double next = cdf + p;
    if (next == cdf) break;  // mass exhausted in double precision
    cdf = next;
  }
  return k;
}

// Hormann's PTRS transformed rejection (1993).  Exact, O(1) expected time for
// lambda >= 10.
inline std::uint64_t poisson_ptrs(double lambda, RandomStream& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace detail

inline std::uint64_t poisson_draw(double lambda, RandomStream& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    detail::domain_error("poisson_draw: lambda must be finite and >= 0");
  }
  if (lambda == 0.0) return 0;
  if (lambda < 10.0) return detail::poisson_inversion(lambda, rng);
  return detail::poisson_ptrs(lambda, rng);
}

/// P(n) = (1 - z) z^n on n >= 0, by inversion.
inline std::uint64_t geometric_draw(double z, RandomStream& rng) {
  if (!(z >= 0.0 && z < 1.0)) {
    detail::domain_error("geometric_draw: z must lie in [0, 1)");
  }
  if (z == 0.0) return 0;
  const double n = std::floor(std::log(rng.uniform_positive()) / std::log(z));
  constexpr double kMax = 0x1.0p63;
  return n >= kMax ? static_cast<std::uint64_t>(kMax) : static_cast<std::uint64_t>(n);
}

/// Size-biased geometric law Geom.(z): P(n) = n z^(n-1) (1 - z)^2 on n >= 1,
/// drawn as 1 + G1 + G2 with independent geometric G1, G2.
inline std::uint64_t geom_dot_draw(double z, RandomStream& rng) {
  if (!(z > 0.0 && z < 1.0)) {
    detail::domain_error("geom_dot_draw: z must lie in (0, 1)");
  }
  const std::uint64_t g1 = geometric_draw(z, rng);
  const std::uint64_t g2 = geometric_draw(z, rng);
  return 1 + g1 + g2;
}

inline constexpr double kProbabilitySlack = 1e-12;

inline bool bernoulli_draw(double p, RandomStream& rng) {
  if (!(p >= 0.0 && p <= 1.0 + kProbabilitySlack)) {
    detail::domain_error("bernoulli_draw: p must lie in [0, 1]");
  }
  return rng.uniform() < p;
}

/// Uniform on [0, k) by bitmask rejection (unbiased, deterministic).
inline std::uint64_t uniform_rank_draw(std::uint64_t k, RandomStream& rng) {
  if (k == 0) detail::domain_error("uniform_rank_draw: empty range (k = 0)");
  if (k == 1) return 0;
  const std::uint64_t top = k - 1;
  const int bits = 64 - __builtin_clzll(top);
  const std::uint64_t mask =
      bits == 64 ? std::numeric_limits<std::uint64_t>::max()
                 : (std::uint64_t{1} << bits) - 1;
  for (;;) {
    const std::uint64_t x = rng() & mask;
    if (x <= top) return x;
  }
}

/// Arbitrary-precision overload; falls back to the 64-bit path when k fits.
inline Count uniform_rank_draw(const Count& k, RandomStream& rng) {
  if (k <= 0) detail::domain_error("uniform_rank_draw: empty range (k = 0)");
  if (fits_u64(k)) return Count(uniform_rank_draw(k.convert_to<std::uint64_t>(), rng));
  const Count top = k - 1;
  const auto bits = boost::multiprecision::msb(top) + 1;
  const auto words = (bits + 63) / 64;
  const auto spare = words * 64 - bits;
  for (;;) {
    Count x = 0;
    for (std::size_t w = 0; w < words; ++w) {
      x <<= 64;
      x |= Count(rng());
    }
    x >>= spare;
    if (x <= top) return x;
  }
}

}  // namespace pset
