#pragma once

// Calibration of the Boltzmann parameter and size-controlled rejection.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "pset/errors.hpp"
#include "pset/random.hpp"
#include "pset/sampler.hpp"
#include "pset/structures.hpp"

namespace pset {

/// Constant of the strict-partition calibration, sqrt(12)/pi.
inline constexpr double kPartitionConstant = 1.1026577908435840990;  // sqrt(12)/pi

/// Gamma(3/2) = sqrt(pi)/2.
inline constexpr double kGammaThreeHalves = 0.88622692545275801365;

struct CalibrationTarget {
  double expected_size = 1.0;
  std::optional<double> expected_length;

  CalibrationTarget(double size, std::optional<double> length = std::nullopt)
      : expected_size(size), expected_length(length) {
    if (!(expected_size > 0.0) || !std::isfinite(expected_size)) {
      throw ParameterDomainError("expected size must be positive and finite");
    }
    if (expected_length && !(*expected_length >= 1.0 && std::isfinite(*expected_length))) {
      throw ParameterDomainError("expected length must be >= 1");
    }
  }

  /// kappa = E(M)^3 / E(N); only meaningful with a length target.
  double kappa() const {
    if (!expected_length) throw ParameterDomainError("kappa needs an expected length");
    return std::pow(*expected_length, 3) / expected_size;
  }
};

/// Asymptotic calibration for strict partitions, z = exp(-1/sqrt(c E(N)))
/// with c = sqrt(12)/pi.
inline double calibrate_partitions(double target) {
  if (!(target >= 1.0) || !std::isfinite(target)) {
    throw ParameterDomainError("calibrate_partitions: target must be >= 1");
  }
  return std::exp(-1.0 / std::sqrt(kPartitionConstant * target));
}

/// Asymptotic calibration for strict partitions into squares with a target
/// size E(N) and length E(M).
inline Bivariate calibrate_squares(double target_size, double target_length) {
  if (!(target_size > 0.0) || !(target_length > 0.0) || !std::isfinite(target_size) ||
      !std::isfinite(target_length)) {
    throw ParameterDomainError("calibrate_squares: targets must be positive");
  }
  const double kappa = std::pow(target_length, 3) / target_size;
  return Bivariate{std::exp(-target_length / (2.0 * target_size)),
                   std::sqrt(kappa / 2.0) / kGammaThreeHalves};
}

inline Bivariate calibrate_squares(const CalibrationTarget& target) {
  if (!target.expected_length) {
    throw ParameterDomainError("calibrate_squares: an expected length is required");
  }
  return calibrate_squares(target.expected_size, *target.expected_length);
}

inline constexpr std::uint64_t kMaxSeriesTerms = 400'000'000;

namespace detail {

// The dominating series n * bound(n) * w_n has the form K n^p q^n.
struct SeriesMajorant {
  double log_k = 0.0;
  int power = 1;
  double q = 0.0;
};

inline SeriesMajorant majorant(const CombStructure& structure, const BoltzmannParams& params) {
  return std::visit(
      [&](const auto& bound) -> SeriesMajorant {
        using B = std::decay_t<decltype(bound)>;
        if constexpr (std::is_same_v<B, ConstantBound>) {
          if (const auto* u = std::get_if<Univariate>(&params)) {
            return {std::log(bound.a_bar), 1, u->z};
          }
          const auto& b = std::get<Bivariate>(params);
          return {std::log(bound.a_bar * b.z2), 1, b.z1};
        } else if constexpr (std::is_same_v<B, ExponentialBound>) {
          return {std::log(bound.b), 1, bound.c * std::get<Univariate>(params).z};
        } else {
          return {std::log(bound.b), 2, std::get<Univariate>(params).z};
        }
      },
      structure.bound());
}

// Upper bound on sum_{n > last} K n^p q^n; +inf if the ratio test fails.
inline double tail_bound(const SeriesMajorant& m, std::uint64_t last) {
  if (m.q == 0.0) return 0.0;
  const double next = static_cast<double>(last) + 1.0;
  const double rho = m.q * std::pow((next + 1.0) / next, m.power);
  if (!(rho < 1.0)) return std::numeric_limits<double>::infinity();
  return std::exp(m.log_k + m.power * std::log(next) + next * std::log(m.q) -
                  std::log1p(-rho));
}

}  // namespace detail

/// E(N) = sum_n n a_n w_n / (1 + w_n), truncated once the analytic tail bound
/// falls below rel_tol times the partial sum.
inline double expected_size(const CombStructure& structure, const BoltzmannParams& params,
                            double rel_tol) {
  if (!(rel_tol > 0.0)) throw ParameterDomainError("expected_size: rel_tol must be positive");
  check_params(structure, params);
  const detail::SeriesMajorant m = detail::majorant(structure, params);

  double sum = 0.0;
  for (std::uint64_t n = 1; n < kMaxSeriesTerms; ++n) {
    const Count a = structure.count(n);
    if (a > 0) {
      const double log_w = log_level_weight(params, n);
      const double w = std::exp(log_w);
      sum += static_cast<double>(n) * std::exp(log_count(a) + log_w) / (1.0 + w);
    }
    if ((n & 63) == 0 || n < 64) {
      const double tail = detail::tail_bound(m, n);
      if (tail <= rel_tol * sum || (sum == 0.0 && tail == 0.0)) return sum;
    }
  }
  throw NonConvergenceError("expected_size: series needs more than " +
                            std::to_string(kMaxSeriesTerms) + " terms");
}

/// Inverts z -> E(N) by bracketing and bisection.
inline double calibrate_numeric(const CombStructure& structure, double target, double rel_tol) {
  if (!(target > 0.0) || !std::isfinite(target)) {
    throw ParameterDomainError("calibrate_numeric: target must be positive");
  }
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw ParameterDomainError("calibrate_numeric: rel_tol must lie in (0, 1)");
  }
  double z_max = 1.0;
  if (const auto* eb = std::get_if<ExponentialBound>(&structure.bound())) {
    z_max = (1.0 - 1e-12) / eb->c;
  }

  const double series_tol = rel_tol / 20.0;
  auto size_at = [&](double z) { return expected_size(structure, Univariate{z}, series_tol); };
  auto unreachable = [&](const std::string& why) {
    return UnreachableTargetError("target size " + std::to_string(target) +
                                  " is unreachable below z_max = " + std::to_string(z_max) +
                                  " (" + why + ")");
  };

  // sum n bound(n) w_n majorises E(N); closed forms at the bracket limit.
  const double z_edge = z_max * (1.0 - 1e-12);
  const double majorant_at_edge = std::visit(
      [&](const auto& bound) -> double {
        using B = std::decay_t<decltype(bound)>;
        if constexpr (std::is_same_v<B, ConstantBound>) {
          return bound.a_bar * z_edge / ((1.0 - z_edge) * (1.0 - z_edge));
        } else if constexpr (std::is_same_v<B, ExponentialBound>) {
          const double q = bound.c * z_edge;
          return bound.b * q / ((1.0 - q) * (1.0 - q));
        } else {
          return bound.b * z_edge * (1.0 + z_edge) / std::pow(1.0 - z_edge, 3);
        }
      },
      structure.bound());
  if (majorant_at_edge < target) throw unreachable("exceeds the series majorant");

  double lo = 0.0;
  double hi = 0.0;
  double size_hi = 0.0;
  for (double gap = 0.5;; gap /= 2.0) {
    if (gap < 1e-12) throw unreachable("bracket reached z_max");
    hi = z_max * (1.0 - gap);
    try {
      size_hi = size_at(hi);
    } catch (const NonConvergenceError&) {
      throw unreachable("expected-size series exceeds its evaluation budget");
    }
    if (size_hi >= target) break;
    lo = hi;
  }
  if (std::fabs(size_hi - target) <= rel_tol * target) return hi;

  for (int step = 0; step < 200; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double size_mid = size_at(mid);
    if (std::fabs(size_mid - target) <= rel_tol * target) return mid;
    (size_mid < target ? lo : hi) = mid;
  }
  throw NonConvergenceError("calibrate_numeric: bisection did not reach the tolerance");
}

// --- size-controlled rejection ---------------------------------------------

struct FreeMode {};

/// Accept sizes in the integer window ceil((1 - eps) n) .. floor((1 + eps) n).
struct ApproximateMode {
  std::uint64_t n = 1;
  double epsilon = 0.1;
};

struct ExactMode {
  std::uint64_t n = 1;
};

using RejectionMode = std::variant<FreeMode, ApproximateMode, ExactMode>;

inline constexpr std::uint64_t kDefaultExactAttempts = 1'000'000;
inline constexpr std::uint64_t kDefaultApproximateAttempts = 10'000;

inline std::uint64_t default_max_attempts(const RejectionMode& mode) {
  if (std::holds_alternative<ExactMode>(mode)) return kDefaultExactAttempts;
  if (std::holds_alternative<ApproximateMode>(mode)) return kDefaultApproximateAttempts;
  return 1;
}

struct RejectionConfig {
  RejectionMode mode = FreeMode{};
  std::uint64_t max_attempts = 1;

  RejectionConfig() = default;
  explicit RejectionConfig(RejectionMode m, std::optional<std::uint64_t> attempts = std::nullopt)
      : mode(m), max_attempts(attempts.value_or(default_max_attempts(m))) {
    validate();
  }

  void validate() const {
    if (max_attempts < 1) throw ParameterDomainError("max_attempts must be >= 1");
    if (const auto* a = std::get_if<ApproximateMode>(&mode)) {
      if (a->n < 1) throw ParameterDomainError("approximate mode: target n must be >= 1");
      if (!(a->epsilon > 0.0 && a->epsilon < 1.0)) {
        throw ParameterDomainError("approximate mode: epsilon must lie in (0, 1)");
      }
    }
    if (const auto* e = std::get_if<ExactMode>(&mode); e && e->n < 1) {
      throw ParameterDomainError("exact mode: target n must be >= 1");
    }
  }
};

/// Inclusive integer size window accepted by a mode.
inline std::pair<std::uint64_t, std::uint64_t> size_window(const RejectionMode& mode) {
  if (const auto* a = std::get_if<ApproximateMode>(&mode)) {
    const double n = static_cast<double>(a->n);
    return {static_cast<std::uint64_t>(std::ceil((1.0 - a->epsilon) * n)),
            static_cast<std::uint64_t>(std::floor((1.0 + a->epsilon) * n))};
  }
  if (const auto* e = std::get_if<ExactMode>(&mode)) return {e->n, e->n};
  return {0, std::numeric_limits<std::uint64_t>::max()};
}

struct RejectionResult {
  PowersetSample sample;
  std::uint64_t attempts = 0;
};

inline RejectionResult sample_with_rejection(const CombStructure& structure,
                                             const BoltzmannParams& params,
                                             const RejectionConfig& config, RandomStream& rng,
                                             const SamplerOptions& options = {}) {
  config.validate();
  const auto [lo, hi] = size_window(config.mode);
  for (std::uint64_t attempt = 1; attempt <= config.max_attempts; ++attempt) {
    PowersetSample s = sample_free(structure, params, rng, options);
    if (std::holds_alternative<FreeMode>(config.mode) || (s.size() >= lo && s.size() <= hi)) {
      return {std::move(s), attempt};
    }
  }
  throw RetriesExhaustedError(config.max_attempts,
                              "rejection gave up after " + std::to_string(config.max_attempts) +
                                  " attempts (size window " + std::to_string(lo) + ".." +
                                  std::to_string(hi) + ")");
}

}  // namespace pset
