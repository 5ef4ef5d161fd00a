#pragma once

// Statistical verification suites.  Each suite runs on several seeds and
// passes when a majority of seeds pass.

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pset/analysis.hpp"
#include "pset/io.hpp"
#include "pset/random.hpp"
#include "pset/sampler.hpp"
#include "pset/structures.hpp"
#include "pset/tuning.hpp"

namespace pset::verify {

using nlohmann::json;

inline constexpr double kSignificance = 1e-3;
inline constexpr double kStandardErrors = 4.0;

struct SuiteResult {
  std::string name;
  bool passed = false;
  int seeds_passed = 0;
  int seeds_run = 0;
  json details = json::array();
};

/// Majority rule across seeds.
inline bool majority(int passed, int run) { return 2 * passed > run; }

struct MarginalCovarianceResult {
  SuiteResult marginal;
  SuiteResult covariance;
};

/// Inclusion frequency of parts 1..8 and pairwise independence on
/// naturals(1) at z = 0.5; both suites share the same draws.
inline MarginalCovarianceResult marginal_and_covariance(const std::vector<std::uint64_t>& seeds,
                                                        std::uint64_t samples,
                                                        const SamplerOptions& options = {}) {
  const CombStructure naturals = make_builtin(builtin::Naturals{1});
  const BoltzmannParams params = Univariate{0.5};
  constexpr std::array<std::pair<std::uint64_t, std::uint64_t>, 3> kPairs{{{1, 2}, {1, 3}, {2, 5}}};

  MarginalCovarianceResult out;
  out.marginal.name = "marginal";
  out.covariance.name = "covariance";
  for (const std::uint64_t seed : seeds) {
    RandomStream rng(seed);
    std::vector<PowersetSample> draws;
    draws.reserve(samples);
    for (std::uint64_t i = 0; i < samples; ++i) draws.push_back(sample_free(naturals, params, rng, options));

    const double n = static_cast<double>(samples);
    bool marginal_ok = true;
    json parts = json::array();
    for (std::uint64_t level = 1; level <= 8; ++level) {
      std::uint64_t hits = 0;
      for (const auto& d : draws) hits += d.contains_level(level) ? 1 : 0;
      const double w = std::pow(0.5, static_cast<double>(level));
      const double p = w / (1.0 + w);
      const double se = std::sqrt(p * (1.0 - p) / n);
      const double freq = static_cast<double>(hits) / n;
      const bool ok = std::fabs(freq - p) < kStandardErrors * se;
      marginal_ok = marginal_ok && ok;
      parts.push_back({{"part", level}, {"expected", p}, {"observed", freq}, {"se", se}, {"ok", ok}});
    }
    out.marginal.details.push_back({{"seed", seed}, {"passed", marginal_ok}, {"parts", parts}});
    out.marginal.seeds_passed += marginal_ok ? 1 : 0;

    bool cov_ok = true;
    json pairs = json::array();
    for (const auto& [a, b] : kPairs) {
      const auto est = empirical_covariance(draws, PartLabel{a, 0}, PartLabel{b, 0});
      const bool ok = std::fabs(est.covariance) < kStandardErrors * est.standard_error;
      cov_ok = cov_ok && ok;
      pairs.push_back({{"pair", {a, b}}, {"covariance", est.covariance},
                       {"se", est.standard_error}, {"ok", ok}});
    }
    out.covariance.details.push_back({{"seed", seed}, {"passed", cov_ok}, {"pairs", pairs}});
    out.covariance.seeds_passed += cov_ok ? 1 : 0;
  }
  for (auto* r : {&out.marginal, &out.covariance}) {
    r->seeds_run = static_cast<int>(seeds.size());
    r->passed = majority(r->seeds_passed, r->seeds_run);
  }
  return out;
}

/// Full joint law of parts 1..6 on naturals(1), z = 0.5, against the
/// exhaustive oracle.  Draws with a part above 6 are discarded; inclusion
/// above the cap is independent of the rest, so the conditional law is the
/// oracle itself.
inline SuiteResult oracle_equivalence(const std::vector<std::uint64_t>& seeds,
                                      std::uint64_t samples, const SamplerOptions& options = {}) {
  const CombStructure naturals = make_builtin(builtin::Naturals{1});
  const BoltzmannParams params = Univariate{0.5};
  constexpr std::uint64_t kCap = 6;
  const OracleDistribution oracle = enumerate_oracle(naturals, params, kCap);

  SuiteResult out{.name = "oracle"};
  for (const std::uint64_t seed : seeds) {
    RandomStream rng(seed);
    std::vector<std::uint64_t> counts(oracle.outcome_count(), 0);
    for (std::uint64_t i = 0; i < samples; ++i) {
      const PowersetSample s = sample_free(naturals, params, rng, options);
      if (!s.empty() && s.parts().back().level > kCap) continue;
      ++counts[oracle.outcome_of(s)];
    }
    const VerificationReport report = chi_square_gof(counts, oracle.probabilities());
    const bool ok = report.p_value > kSignificance;
    out.seeds_passed += ok ? 1 : 0;
    out.details.push_back({{"seed", seed}, {"passed", ok}, {"report", io::report_to_json(report)}});
  }
  out.seeds_run = static_cast<int>(seeds.size());
  out.passed = majority(out.seeds_passed, out.seeds_run);
  return out;
}

/// Every strict partition of n is equally likely under exact-size rejection.
inline SuiteResult conditional_uniformity(const std::vector<std::uint64_t>& seeds,
                                          std::uint64_t accepted, std::uint64_t n = 8,
                                          const SamplerOptions& options = {}) {
  const CombStructure naturals = make_builtin(builtin::Naturals{1});
  const double z = calibrate_numeric(naturals, static_cast<double>(n), 1e-3);
  const BoltzmannParams params = Univariate{z};
  const Count expected_cells = distinct_subset_count(naturals, n);
  const RejectionConfig config(ExactMode{n});

  SuiteResult out{.name = "uniformity"};
  for (const std::uint64_t seed : seeds) {
    RandomStream rng(seed);
    std::map<std::vector<std::uint64_t>, std::uint64_t> counts;
    std::uint64_t attempts = 0;
    for (std::uint64_t i = 0; i < accepted; ++i) {
      const auto result = sample_with_rejection(naturals, params, config, rng, options);
      attempts += result.attempts;
      std::vector<std::uint64_t> key;
      for (const auto& p : result.sample.parts()) key.push_back(p.level);
      ++counts[key];
    }
    const auto cells = expected_cells.convert_to<std::size_t>();
    std::vector<std::uint64_t> observed;
    std::vector<std::string> labels;
    for (const auto& [key, c] : counts) {
      observed.push_back(c);
      std::string label;
      for (auto level : key) label += (label.empty() ? "" : " ") + std::to_string(level);
      labels.push_back("{" + label + "}");
    }
    // Unseen partitions still count as cells.
    while (observed.size() < cells) {
      observed.push_back(0);
      labels.push_back("unseen");
    }
    bool ok = counts.size() <= cells;
    json entry{{"seed", seed}, {"attempts", attempts}};
    if (ok) {
      const VerificationReport report = chi_square_gof(
          observed, std::vector<double>(cells, 1.0 / static_cast<double>(cells)), labels);
      ok = report.p_value > kSignificance;
      entry["report"] = io::report_to_json(report);
    }
    entry["passed"] = ok;
    out.seeds_passed += ok ? 1 : 0;
    out.details.push_back(std::move(entry));
  }
  out.seeds_run = static_cast<int>(seeds.size());
  out.passed = majority(out.seeds_passed, out.seeds_run);
  return out;
}

inline json suite_to_json(const SuiteResult& r) {
  return json{{"suite", r.name},
              {"passed", r.passed},
              {"seeds_passed", r.seeds_passed},
              {"seeds_run", r.seeds_run},
              {"details", r.details}};
}

}  // namespace pset::verify
