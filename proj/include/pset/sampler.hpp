#pragma once

// Thinned Poisson-occupancy Boltzmann sampler for PSet(A).
//
// A Poisson number of candidate levels is drawn from a dominating law whose
// per-level rate (a_bar z^n, b c^n z^n or b n z^n) majorises the target rate
// a_n ln(1 + w_n).  Each candidate is kept with the ratio of the two rates,
// then a uniform element of A_n is added to the output set.  The result
// contains each element l independently with probability w/(1 + w), where
// w = z^N(l) (or z2 z1^N(l) in the bivariate case); no evaluation of the
// generating function is needed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <variant>
#include <vector>

#include "pset/count.hpp"
#include "pset/errors.hpp"
#include "pset/random.hpp"
#include "pset/structures.hpp"

namespace pset {

struct Univariate {
  double z = 0.0;
};

/// Weight z2 z1^n per element of size n: z1 tracks size, z2 tracks length.
struct Bivariate {
  double z1 = 0.5;
  double z2 = 1.0;
};

using BoltzmannParams = std::variant<Univariate, Bivariate>;

inline void check_params(const BoltzmannParams& params) {
  if (const auto* u = std::get_if<Univariate>(&params)) {
    if (!(u->z >= 0.0 && u->z < 1.0)) throw ParameterDomainError("z must lie in [0, 1)");
  } else {
    const auto& b = std::get<Bivariate>(params);
    if (!(b.z1 > 0.0 && b.z1 < 1.0)) throw ParameterDomainError("z1 must lie in (0, 1)");
    if (!(b.z2 > 0.0) || !std::isfinite(b.z2)) throw ParameterDomainError("z2 must be positive");
  }
}

/// Checks params against the structure's bound (c z < 1, bivariate needs a
/// constant bound).
inline void check_params(const CombStructure& structure, const BoltzmannParams& params) {
  check_params(params);
  if (std::holds_alternative<Bivariate>(params) &&
      !std::holds_alternative<ConstantBound>(structure.bound())) {
    throw ParameterDomainError("bivariate weights require a constant-bounded structure");
  }
  if (const auto* eb = std::get_if<ExponentialBound>(&structure.bound())) {
    const double cz = eb->c * std::get<Univariate>(params).z;
    if (!(cz < 1.0)) {
      throw DivergentRateError("dominating rate diverges: c*z = " + std::to_string(cz) +
                               " >= 1");
    }
  }
}

/// ln(w_n); -inf when w_n = 0.  Uses 0^0 = 1.
inline double log_level_weight(const BoltzmannParams& params, std::uint64_t n) {
  const double nd = static_cast<double>(n);
  if (const auto* u = std::get_if<Univariate>(&params)) {
    if (n == 0) return 0.0;
    return nd * std::log(u->z);
  }
  const auto& b = std::get<Bivariate>(params);
  return std::log(b.z2) + (n == 0 ? 0.0 : nd * std::log(b.z1));
}

/// Inclusion odds w_n = z^n, or z2 z1^n in the bivariate case.
inline double level_weight(const BoltzmannParams& params, std::uint64_t n) {
  return std::exp(log_level_weight(params, n));
}

/// ln(1 + w) / w, continuous at w = 0.
inline double log1p_ratio(double w) {
  if (w < 1e-8) return 1.0 - w / 2.0 + w * w / 3.0;
  return std::log1p(w) / w;
}

/// Expected number of candidates drawn per sample (the dominating rate).
inline double dominating_rate_total(const CombStructure& structure,
                                    const BoltzmannParams& params) {
  check_params(structure, params);
  return std::visit(
      [&](const auto& bound) -> double {
        using B = std::decay_t<decltype(bound)>;
        if constexpr (std::is_same_v<B, ConstantBound>) {
          if (const auto* u = std::get_if<Univariate>(&params)) return bound.a_bar / (1.0 - u->z);
          const auto& b = std::get<Bivariate>(params);
          return bound.a_bar * b.z2 / (1.0 - b.z1);
        } else if constexpr (std::is_same_v<B, ExponentialBound>) {
          return bound.b / (1.0 - bound.c * std::get<Univariate>(params).z);
        } else {
          const double z = std::get<Univariate>(params).z;
          return bound.b * z / ((1.0 - z) * (1.0 - z));
        }
      },
      structure.bound());
}

/// Draws a candidate level from the dominating law: Geom(1 - z),
/// Geom(1 - c z) or Geom.(z) depending on the bound.
inline std::uint64_t dominating_level_draw(const CombStructure& structure,
                                           const BoltzmannParams& params, RandomStream& rng) {
  return std::visit(
      [&](const auto& bound) -> std::uint64_t {
        using B = std::decay_t<decltype(bound)>;
        if constexpr (std::is_same_v<B, ConstantBound>) {
          if (const auto* u = std::get_if<Univariate>(&params)) return geometric_draw(u->z, rng);
          return geometric_draw(std::get<Bivariate>(params).z1, rng);
        } else if constexpr (std::is_same_v<B, ExponentialBound>) {
          return geometric_draw(bound.c * std::get<Univariate>(params).z, rng);
        } else {
          return geom_dot_draw(std::get<Univariate>(params).z, rng);
        }
      },
      structure.bound());
}

namespace detail {

inline double acceptance_from_count(const CombStructure& structure,
                                    const BoltzmannParams& params, std::uint64_t n,
                                    const Count& count) {
  const double ratio = count_bound_ratio(count, structure.bound(), n);
  if (ratio == 0.0) return 0.0;
  const double log_w = log_level_weight(params, n);
  // w underflows long before ln(1 + w)/w departs from 1.
  const double shape = log_w < -700.0 ? 1.0 : log1p_ratio(std::exp(log_w));
  const double p = ratio * shape;
  if (!(p <= 1.0 + kProbabilitySlack)) {
    throw BoundViolationError(n, "acceptance probability " + std::to_string(p) +
                                     " > 1 at level " + std::to_string(n) +
                                     ": a_n exceeds the declared bound");
  }
  return std::min(p, 1.0);
}

}  // namespace detail

/// Thinning ratio (a_n / bound(n)) ln(1 + w_n) / w_n.
inline double acceptance_prob(const CombStructure& structure, const BoltzmannParams& params,
                              std::uint64_t n) {
  return detail::acceptance_from_count(structure, params, n, structure.count(n));
}

/// A finite subset of A, kept sorted by (level, rank).
class PowersetSample {
 public:
  PowersetSample() = default;

  /// Takes any collection of distinct labels; duplicates are rejected.
  explicit PowersetSample(std::vector<PartLabel> parts) : parts_(std::move(parts)) {
    std::sort(parts_.begin(), parts_.end());
    if (std::adjacent_find(parts_.begin(), parts_.end()) != parts_.end()) {
      throw ParameterDomainError("PowersetSample: duplicate part label");
    }
    for (const auto& p : parts_) size_ += p.level;
  }

  const std::vector<PartLabel>& parts() const noexcept { return parts_; }
  std::uint64_t size() const noexcept { return size_; }
  std::uint64_t length() const noexcept { return parts_.size(); }
  bool empty() const noexcept { return parts_.empty(); }

  bool contains(const PartLabel& label) const {
    return std::binary_search(parts_.begin(), parts_.end(), label);
  }
  bool contains_level(std::uint64_t level) const {
    const auto it = std::lower_bound(parts_.begin(), parts_.end(), PartLabel{level, 0});
    return it != parts_.end() && it->level == level;
  }

  friend bool operator==(const PowersetSample&, const PowersetSample&) = default;

 private:
  std::vector<PartLabel> parts_;
  std::uint64_t size_ = 0;
};

/// Knobs for self-tests of the verification suites.  acceptance_scale
/// multiplies every acceptance probability; anything other than 1 breaks the
/// Boltzmann law on purpose.
struct SamplerOptions {
  double acceptance_scale = 1.0;
};

/// One free Boltzmann draw from PSet(A).
inline PowersetSample sample_free(const CombStructure& structure, const BoltzmannParams& params,
                                  RandomStream& rng, const SamplerOptions& options = {}) {
  const double lambda = dominating_rate_total(structure, params);
  if (lambda == 0.0) return {};
  const std::uint64_t candidates = poisson_draw(lambda, rng);

  std::unordered_set<PartLabel, PartLabelHash> parts;
  for (std::uint64_t i = 0; i < candidates; ++i) {
    const std::uint64_t n = dominating_level_draw(structure, params, rng);
    Count count = structure.count(n);
    double p = detail::acceptance_from_count(structure, params, n, count);
    if (options.acceptance_scale != 1.0) p = std::clamp(p * options.acceptance_scale, 0.0, 1.0);
    if (!bernoulli_draw(p, rng)) continue;
    parts.insert(PartLabel{n, uniform_rank_draw(count, rng)});
  }
  return PowersetSample(std::vector<PartLabel>(parts.begin(), parts.end()));
}

}  // namespace pset
