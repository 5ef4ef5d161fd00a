#pragma once

// Young diagrams and limit shapes, plus the exhaustive oracle and the
// statistics used to check sampler output against the exact Boltzmann law.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pset/count.hpp"
#include "pset/errors.hpp"
#include "pset/sampler.hpp"
#include "pset/structures.hpp"
#include "pset/tuning.hpp"

namespace pset {

// --- Young diagrams ----------------------------------------------------------

/// Upper boundary Y(x) = #{parts of level >= x} of a sample.
class YoungDiagram {
 public:
  struct Step {
    std::uint64_t level;  // right end of the step
    std::uint64_t height;  // Y(x) for x in (previous level, level]
  };

  YoungDiagram() = default;

  explicit YoungDiagram(const PowersetSample& sample)
      : total_size_(sample.size()), total_length_(sample.length()) {
    // parts() is sorted by level, so equal levels are adjacent.
    std::uint64_t above = sample.length();
    const auto& parts = sample.parts();
    for (std::size_t i = 0; i < parts.size();) {
      std::size_t j = i;
      while (j < parts.size() && parts[j].level == parts[i].level) ++j;
      steps_.push_back({parts[i].level, above});
      above -= j - i;
      i = j;
    }
  }

  const std::vector<Step>& steps() const noexcept { return steps_; }
  std::uint64_t total_size() const noexcept { return total_size_; }
  std::uint64_t total_length() const noexcept { return total_length_; }

  std::uint64_t operator()(double x) const {
    if (x < 0.0) throw ParameterDomainError("YoungDiagram: x must be >= 0");
    for (const auto& s : steps_) {
      if (x <= static_cast<double>(s.level)) return s.height;
    }
    return 0;
  }

  /// Area under Y; equals the total size.
  double integral() const {
    double area = 0.0;
    std::uint64_t left = 0;
    for (const auto& s : steps_) {
      area += static_cast<double>(s.height) * static_cast<double>(s.level - left);
      left = s.level;
    }
    return area;
  }

 private:
  std::vector<Step> steps_;
  std::uint64_t total_size_ = 0;
  std::uint64_t total_length_ = 0;
};

inline YoungDiagram young_diagram(const PowersetSample& sample) { return YoungDiagram(sample); }

struct CurvePoint {
  double x;
  double y;
};

using Curve = std::vector<CurvePoint>;

struct SqrtSizeScaling {};

/// Y~(x) = Y(2 E_N x / E_M) / E_M.
struct BivariateScaling {
  double expected_size;
  double expected_length;
};

using Rescaling = std::variant<SqrtSizeScaling, BivariateScaling>;

/// Corners of the rescaled step function: both endpoints of every flat piece,
/// so the curve carries the values on either side of each jump.
inline Curve rescale_diagram(const YoungDiagram& diagram, const Rescaling& scheme) {
  double sx = 1.0;
  double sy = 1.0;
  if (std::holds_alternative<SqrtSizeScaling>(scheme)) {
    if (diagram.total_size() == 0) {
      throw ParameterDomainError("rescale_diagram: sqrt-size rescaling needs size > 0");
    }
    sx = sy = 1.0 / std::sqrt(static_cast<double>(diagram.total_size()));
  } else {
    const auto& b = std::get<BivariateScaling>(scheme);
    if (!(b.expected_size > 0.0) || !(b.expected_length > 0.0)) {
      throw ParameterDomainError("rescale_diagram: bivariate scaling needs positive targets");
    }
    sx = b.expected_length / (2.0 * b.expected_size);
    sy = 1.0 / b.expected_length;
  }

  Curve curve;
  curve.reserve(2 * diagram.steps().size() + 1);
  double left = 0.0;
  for (const auto& s : diagram.steps()) {
    const double h = static_cast<double>(s.height) * sy;
    curve.push_back({left * sx, h});
    curve.push_back({static_cast<double>(s.level) * sx, h});
    left = static_cast<double>(s.level);
  }
  curve.push_back({left * sx, 0.0});
  return curve;
}

enum class LimitShape { kVershik, kGammaSurvival };

/// Vershik's strict-partition curve y = (sqrt(12)/pi) ln(1 + e^{-pi x/sqrt(12)}),
/// or the survival function of Gamma(1/2, 1), erfc(sqrt(x)).
inline double limit_shape(LimitShape kind, double x) {
  if (!(x >= 0.0)) throw ParameterDomainError("limit_shape: x must be >= 0");
  if (kind == LimitShape::kVershik) {
    return kPartitionConstant * std::log1p(std::exp(-x / kPartitionConstant));
  }
  return std::erfc(std::sqrt(x));
}

inline double sup_distance(const Curve& curve, LimitShape kind) {
  double worst = 0.0;
  for (const auto& p : curve) worst = std::max(worst, std::fabs(p.y - limit_shape(kind, p.x)));
  return worst;
}

// --- exhaustive oracle -------------------------------------------------------

inline constexpr std::size_t kOracleMaxElements = 24;

/// Exact Boltzmann law restricted to elements of level <= cap.  Outcome i is
/// the subset whose bit j is set when element j is present.
class OracleDistribution {
 public:
  OracleDistribution(std::vector<PartLabel> elements, std::vector<double> inclusion)
      : elements_(std::move(elements)), inclusion_(std::move(inclusion)) {
    const std::size_t k = elements_.size();
    probs_.assign(std::size_t{1} << k, 1.0);
    sizes_.assign(std::size_t{1} << k, 0);
    for (std::size_t mask = 0; mask < probs_.size(); ++mask) {
      double p = 1.0;
      std::uint64_t size = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (mask >> j & 1) {
          p *= inclusion_[j];
          size += elements_[j].level;
        } else {
          p *= 1.0 - inclusion_[j];
        }
      }
      probs_[mask] = p;
      sizes_[mask] = size;
    }
  }

  std::size_t outcome_count() const noexcept { return probs_.size(); }
  const std::vector<PartLabel>& elements() const noexcept { return elements_; }
  double probability(std::size_t outcome) const { return probs_.at(outcome); }
  std::uint64_t size_of(std::size_t outcome) const { return sizes_.at(outcome); }
  const std::vector<double>& probabilities() const noexcept { return probs_; }

  /// Outcome index of a sample whose parts all lie within the cap.
  std::size_t outcome_of(const PowersetSample& sample) const {
    std::size_t mask = 0;
    for (const auto& part : sample.parts()) {
      const auto it = std::find(elements_.begin(), elements_.end(), part);
      if (it == elements_.end()) {
        throw ParameterDomainError("oracle: sample has a part above the level cap");
      }
      mask |= std::size_t{1} << (it - elements_.begin());
    }
    return mask;
  }

 private:
  std::vector<PartLabel> elements_;
  std::vector<double> inclusion_;
  std::vector<double> probs_;
  std::vector<std::uint64_t> sizes_;
};

/// Inclusion probability w/(1 + w) of one element of level n, from z^n
/// directly (0^0 = 1).  Deliberately independent of the sampler's log-space
/// weights.
inline double oracle_inclusion(const BoltzmannParams& params, std::uint64_t n) {
  double w = 0.0;
  if (const auto* u = std::get_if<Univariate>(&params)) {
    w = std::pow(u->z, static_cast<double>(n));
  } else {
    const auto& b = std::get<Bivariate>(params);
    w = b.z2 * std::pow(b.z1, static_cast<double>(n));
  }
  return w / (1.0 + w);
}

inline OracleDistribution enumerate_oracle(const CombStructure& structure,
                                           const BoltzmannParams& params,
                                           std::uint64_t level_cap) {
  check_params(params);
  std::vector<PartLabel> elements;
  std::vector<double> inclusion;
  for (std::uint64_t n = 0; n <= level_cap; ++n) {
    const Count a = structure.count(n);
    if (a > Count(kOracleMaxElements) ||
        elements.size() + a.convert_to<std::size_t>() > kOracleMaxElements) {
      throw CapacityError("enumerate_oracle: more than " + std::to_string(kOracleMaxElements) +
                          " elements at or below level " + std::to_string(level_cap));
    }
    for (Count i = 0; i < a; ++i) {
      elements.push_back({n, i});
      inclusion.push_back(oracle_inclusion(params, n));
    }
  }
  return OracleDistribution(std::move(elements), std::move(inclusion));
}

/// Number of finite subsets of A with total size exactly n: the coefficient
/// of x^n in prod_k (1 + x^k)^{a_k}.
inline Count distinct_subset_count(const CombStructure& structure, std::uint64_t n) {
  if (n > 1000) throw ParameterDomainError("distinct_subset_count: n must be <= 1000");
  std::vector<Count> dp(n + 1, Count(0));
  dp[0] = 1;
  for (std::uint64_t k = 1; k <= n; ++k) {
    const Count a = structure.count(k);
    if (a == 0) continue;
    // (1 + x^k)^a = sum_j C(a, j) x^{jk}
    std::vector<Count> binom{1};
    for (std::uint64_t j = 1; j * k <= n && Count(j) <= a; ++j) {
      binom.push_back(binom.back() * (a - (j - 1)) / j);
    }
    std::vector<Count> next(n + 1, Count(0));
    for (std::uint64_t s = 0; s <= n; ++s) {
      if (dp[s] == 0) continue;
      for (std::uint64_t j = 0; j < binom.size() && s + j * k <= n; ++j) {
        next[s + j * k] += dp[s] * binom[j];
      }
    }
    dp = std::move(next);
  }
  const Count zero_size = structure.count(0);
  return dp[n] << zero_size.convert_to<unsigned>();
}

// --- statistics --------------------------------------------------------------

struct ReportCell {
  std::string outcome;
  double expected_prob;
  std::uint64_t observed;
};

struct VerificationReport {
  std::vector<ReportCell> cells;
  double chi_square_stat = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  std::uint64_t sample_count = 0;
};

/// Upper tail of the chi-square law with df degrees of freedom.
inline double chi_square_survival(double stat, int df) {
  if (df <= 0) return 1.0;
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

/// Pearson goodness of fit.  Cells are taken in order and adjacent cells are
/// merged until every expected count reaches min_expected; a short remainder
/// joins the last merged cell.
inline VerificationReport chi_square_gof(const std::vector<std::uint64_t>& observed,
                                         const std::vector<double>& expected,
                                         const std::vector<std::string>& labels = {},
                                         double min_expected = 5.0) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw ParameterDomainError("chi_square_gof: observed and expected sizes differ");
  }
  if (!labels.empty() && labels.size() != observed.size()) {
    throw ParameterDomainError("chi_square_gof: label count mismatch");
  }
  double total_prob = 0.0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!(expected[i] > 0.0)) throw ParameterDomainError("chi_square_gof: expected probs must be > 0");
    total_prob += expected[i];
    total += observed[i];
  }
  if (std::fabs(total_prob - 1.0) > 1e-9) {
    throw ParameterDomainError("chi_square_gof: expected probabilities must sum to 1");
  }

  VerificationReport report;
  report.sample_count = total;
  const double n = static_cast<double>(total);
  ReportCell pending{"", 0.0, 0};
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const std::string name = labels.empty() ? std::to_string(i) : labels[i];
    pending.outcome += pending.outcome.empty() ? name : "+" + name;
    pending.expected_prob += expected[i];
    pending.observed += observed[i];
    if (pending.expected_prob * n >= min_expected) {
      report.cells.push_back(std::move(pending));
      pending = {"", 0.0, 0};
    }
  }
  if (pending.expected_prob > 0.0) {
    if (report.cells.empty()) {
      report.cells.push_back(std::move(pending));
    } else {
      auto& last = report.cells.back();
      last.outcome += "+" + pending.outcome;
      last.expected_prob += pending.expected_prob;
      last.observed += pending.observed;
    }
  }

  for (const auto& c : report.cells) {
    const double e = c.expected_prob * n;
    const double d = static_cast<double>(c.observed) - e;
    report.chi_square_stat += d * d / e;
  }
  report.degrees_of_freedom = static_cast<int>(report.cells.size()) - 1;
  report.p_value = chi_square_survival(report.chi_square_stat, report.degrees_of_freedom);
  return report;
}

struct CovarianceEstimate {
  double covariance;
  double standard_error;
};

/// Sample covariance of the membership indicators of two labels, with the
/// standard error of the mean of the centred products.
inline CovarianceEstimate empirical_covariance(const std::vector<PowersetSample>& samples,
                                               const PartLabel& a, const PartLabel& b) {
  if (samples.empty()) throw ParameterDomainError("empirical_covariance: no samples");
  if (a == b) throw ParameterDomainError("empirical_covariance: labels must differ");
  const double n = static_cast<double>(samples.size());
  std::vector<std::pair<double, double>> ind;
  ind.reserve(samples.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& s : samples) {
    const double x = s.contains(a) ? 1.0 : 0.0;
    const double y = s.contains(b) ? 1.0 : 0.0;
    ind.emplace_back(x, y);
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double cov = 0.0;
  double sq = 0.0;
  for (const auto& [x, y] : ind) {
    const double d = (x - mx) * (y - my);
    cov += d;
    sq += d * d;
  }
  cov /= n;
  const double var = std::max(0.0, sq / n - cov * cov);
  return {cov, std::sqrt(var / n)};
}

}  // namespace pset
