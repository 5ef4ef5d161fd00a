#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pset/pset.hpp"
#include "test_support.hpp"

namespace pset {
namespace {

using testing::majority_of_seeds;

constexpr double kAlpha = 1e-3;

CombStructure single_element() {
  return CombStructure(
      "single", [](std::uint64_t n) { return Count(n == 1 ? 1 : 0); },
      [](std::uint64_t n, const Count&) { return std::to_string(n); }, ConstantBound{1.0});
}

// Naturals declared with the exponential bound 1 * 1^n, which routes the
// sampler through the Geom(1 - c z) branch.
CombStructure naturals_exponential() {
  return CombStructure(
      "naturals-exp", [](std::uint64_t n) { return Count(n >= 1 ? 1 : 0); },
      [](std::uint64_t n, const Count&) { return std::to_string(n); },
      ExponentialBound{1.0, 1.0});
}

// a_n = n under an exponential bound, to compare with the pointed builtin.
CombStructure linear_counts_exponential() {
  return CombStructure(
      "n-exp", [](std::uint64_t n) { return Count(n); },
      [](std::uint64_t n, const Count& i) { return std::to_string(n) + "." + i.str(); },
      ExponentialBound{1.0, 2.0});
}

// Exact P(size = n) = D(n) z^n / prod_k (1 + z^k)^{a_k}.
std::vector<double> exact_size_law(const CombStructure& s, double z, std::uint64_t max_n) {
  double log_z_total = 0.0;
  for (std::uint64_t k = 0; k < 100000; ++k) {
    const double a = s.count(k).convert_to<double>();
    const double w = std::pow(z, static_cast<double>(k));
    log_z_total += a * std::log1p(w);
    if (k > 10 && w < 1e-30) break;
  }
  std::vector<double> law;
  for (std::uint64_t n = 0; n <= max_n; ++n) {
    const double d = distinct_subset_count(s, n).convert_to<double>();
    law.push_back(d * std::pow(z, static_cast<double>(n)) / std::exp(log_z_total));
  }
  return law;
}

double size_law_p_value(const CombStructure& s, const BoltzmannParams& params,
                        const std::vector<double>& law, std::uint64_t draws, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<std::uint64_t> obs(law.size() + 1, 0);
  for (std::uint64_t i = 0; i < draws; ++i) {
    const auto size = sample_free(s, params, rng).size();
    ++obs[std::min<std::uint64_t>(size, law.size())];
  }
  std::vector<double> expected = law;
  double mass = 0.0;
  for (double p : law) mass += p;
  expected.push_back(std::max(0.0, 1.0 - mass));
  // Sizes with no subsets must never occur; the rest go to the test.
  std::vector<std::uint64_t> kept_obs;
  std::vector<double> kept_exp;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] > 0.0) {
      kept_obs.push_back(obs[i]);
      kept_exp.push_back(expected[i]);
    } else if (obs[i] != 0) {
      return 0.0;
    }
  }
  double total = 0.0;
  for (double p : kept_exp) total += p;
  for (double& p : kept_exp) p /= total;
  return chi_square_gof(kept_obs, kept_exp).p_value;
}

TEST(Weights, UnivariateAndBivariate) {
  EXPECT_DOUBLE_EQ(level_weight(Univariate{0.5}, 3), 0.125);
  EXPECT_DOUBLE_EQ(level_weight(Univariate{0.0}, 0), 1.0);
  EXPECT_DOUBLE_EQ(level_weight(Univariate{0.0}, 4), 0.0);
  EXPECT_NEAR(level_weight(Bivariate{0.9, 2.0}, 4), 2.0 * 0.6561, 1e-14);
  EXPECT_DOUBLE_EQ(level_weight(Bivariate{0.9, 2.0}, 0), 2.0);
  EXPECT_NEAR(log_level_weight(Univariate{0.999}, 1000000), 1e6 * std::log(0.999), 1e-6);
}

TEST(Weights, LogRatioSeriesIsContinuous) {
  EXPECT_DOUBLE_EQ(log1p_ratio(0.0), 1.0);
  EXPECT_NEAR(log1p_ratio(1e-8), std::log1p(1e-8) / 1e-8, 1e-15);
  EXPECT_NEAR(log1p_ratio(1e-9), 1.0 - 5e-10, 1e-15);
  EXPECT_NEAR(log1p_ratio(1.0), std::log(2.0), 1e-15);
}

TEST(Acceptance, ReferenceValues) {
  const auto nat = make_builtin("naturals");
  EXPECT_NEAR(acceptance_prob(nat, Univariate{0.5}, 1), 0.8109302162163288, 1e-14);
  EXPECT_EQ(acceptance_prob(nat, Univariate{0.5}, 0), 0.0);

  const auto words = make_builtin("words:2");
  EXPECT_NEAR(acceptance_prob(words, Univariate{0.3}, 2), std::log(1.09) / 0.09, 1e-14);
  EXPECT_NEAR(acceptance_prob(words, Univariate{0.3}, 0), std::log(2.0), 1e-14);

  const auto squares = make_builtin("squares");
  EXPECT_NEAR(acceptance_prob(squares, Bivariate{0.9, 2.0}, 4), 0.6387741596243594, 1e-12);
  EXPECT_EQ(acceptance_prob(squares, Bivariate{0.9, 2.0}, 5), 0.0);

  const auto pointed = make_builtin("pointed");
  EXPECT_NEAR(acceptance_prob(pointed, Univariate{0.5}, 3), std::log(1.125) / 0.125, 1e-14);
}

TEST(Acceptance, DeepLevelsStayFinite) {
  const auto nat = make_builtin("naturals");
  EXPECT_DOUBLE_EQ(acceptance_prob(nat, Univariate{0.5}, 5000), 1.0);
  const auto words = make_builtin("words:3");
  EXPECT_DOUBLE_EQ(acceptance_prob(words, Univariate{0.3}, 5000), 1.0);
}

TEST(DominatingRate, ReferenceValues) {
  EXPECT_DOUBLE_EQ(dominating_rate_total(make_builtin("words:2"), Univariate{0.3}), 2.5);
  EXPECT_NEAR(dominating_rate_total(make_builtin("squares"), Bivariate{0.9, 2.0}), 20.0, 1e-12);
  EXPECT_NEAR(dominating_rate_total(make_builtin("naturals"), Univariate{calibrate_partitions(1e6)}),
              1050.575, 1e-3);
  EXPECT_NEAR(dominating_rate_total(make_builtin("pointed"), Univariate{0.5}), 2.0, 1e-14);
}

TEST(DominatingRate, ParameterErrors) {
  const auto words = make_builtin("words:2");
  EXPECT_THROW(dominating_rate_total(words, Univariate{0.5}), DivergentRateError);
  EXPECT_THROW(dominating_rate_total(words, Bivariate{0.3, 1.0}), ParameterDomainError);
  const auto nat = make_builtin("naturals");
  EXPECT_THROW(dominating_rate_total(nat, Univariate{1.0}), ParameterDomainError);
  EXPECT_THROW(dominating_rate_total(nat, Univariate{-0.1}), ParameterDomainError);
  EXPECT_THROW(dominating_rate_total(nat, Bivariate{1.0, 1.0}), ParameterDomainError);
  EXPECT_THROW(dominating_rate_total(nat, Bivariate{0.5, 0.0}), ParameterDomainError);
  RandomStream rng(1);
  EXPECT_THROW(sample_free(words, Univariate{0.5}, rng), DivergentRateError);
}

TEST(DominatingLevel, LawsMatchTheirPmfs) {
  const auto nat = make_builtin("naturals");
  const auto words = make_builtin("words:2");
  const auto pointed = make_builtin("pointed");
  EXPECT_TRUE(majority_of_seeds([&](std::uint64_t seed) {
    return testing::window_gof(
               [&](RandomStream& r) { return dominating_level_draw(nat, Univariate{0.8}, r); },
               [](std::uint64_t n) { return testing::geometric_pmf(0.8, n); }, 0, 25, 100000,
               seed) > kAlpha;
  }));
  EXPECT_TRUE(majority_of_seeds([&](std::uint64_t seed) {
    return testing::window_gof(
               [&](RandomStream& r) { return dominating_level_draw(words, Univariate{0.4}, r); },
               [](std::uint64_t n) { return testing::geometric_pmf(0.8, n); }, 0, 25, 100000,
               seed) > kAlpha;
  }));
  EXPECT_TRUE(majority_of_seeds([&](std::uint64_t seed) {
    return testing::window_gof(
               [&](RandomStream& r) { return dominating_level_draw(pointed, Univariate{0.6}, r); },
               [](std::uint64_t n) { return testing::geom_dot_pmf(0.6, n); }, 1, 25, 100000,
               seed) > kAlpha;
  }));
}

TEST(PowersetSampleType, SortedUniqueAndQueryable) {
  const PowersetSample s({{3, 0}, {1, 0}, {2, 5}});
  ASSERT_EQ(s.length(), 3u);
  EXPECT_EQ(s.size(), 6u);
  EXPECT_EQ(s.parts().front(), (PartLabel{1, 0}));
  EXPECT_TRUE(s.contains({2, 5}));
  EXPECT_FALSE(s.contains({2, 0}));
  EXPECT_TRUE(s.contains_level(2));
  EXPECT_FALSE(s.contains_level(4));
  EXPECT_THROW(PowersetSample({{1, 0}, {1, 0}}), ParameterDomainError);
  EXPECT_TRUE(PowersetSample().empty());
}

TEST(SampleFree, ZeroWeightGivesEmptySet) {
  RandomStream rng(1);
  const auto nat = make_builtin("naturals");
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_free(nat, Univariate{0.0}, rng).empty());
}

TEST(SampleFree, DeterministicPerSeed) {
  const auto nat = make_builtin("naturals");
  RandomStream a(11), b(11);
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(sample_free(nat, Univariate{0.9}, a), sample_free(nat, Univariate{0.9}, b));
  }
}

TEST(SampleFree, MarginalsAndIndependence) {
  const auto result = verify::marginal_and_covariance(testing::kSeeds, 100000);
  EXPECT_TRUE(result.marginal.passed) << verify::suite_to_json(result.marginal).dump();
  EXPECT_TRUE(result.covariance.passed) << verify::suite_to_json(result.covariance).dump();
}

TEST(SampleFree, JointLawMatchesOracle) {
  const auto result = verify::oracle_equivalence(testing::kSeeds, 200000);
  EXPECT_TRUE(result.passed) << verify::suite_to_json(result).dump();
}

TEST(SampleFree, ProbabilityOfOneTwo) {
  const auto nat = make_builtin("naturals");
  constexpr double kExpected = 0.0524278052243884;
  constexpr std::uint64_t kDraws = 200000;
  EXPECT_TRUE(majority_of_seeds([&](std::uint64_t seed) {
    RandomStream rng(seed);
    const PowersetSample target({{1, 0}, {2, 0}});
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < kDraws; ++i) hits += sample_free(nat, Univariate{0.5}, rng) == target;
    const double freq = static_cast<double>(hits) / kDraws;
    const double se = std::sqrt(kExpected * (1 - kExpected) / kDraws);
    return std::fabs(freq - kExpected) < 4 * se;
  }));
}

TEST(SampleFree, SizeZeroElementHasWeightOne) {
  const auto nat0 = make_builtin("naturals0");
  constexpr std::uint64_t kDraws = 100000;
  EXPECT_TRUE(majority_of_seeds([&](std::uint64_t seed) {
    RandomStream rng(seed);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < kDraws; ++i) {
      hits += sample_free(nat0, Univariate{0.5}, rng).contains_level(0);
    }
    const double freq = static_cast<double>(hits) / kDraws;
    return std::fabs(freq - 0.5) < 4 * std::sqrt(0.25 / kDraws);
  }));
}

TEST(SampleFree, SingleElementClass) {
  const auto single = single_element();
  constexpr std::uint64_t kDraws = 100000;
  EXPECT_TRUE(majority_of_seeds([&](std::uint64_t seed) {
    RandomStream rng(seed);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < kDraws; ++i) {
      const auto s = sample_free(single, Univariate{0.5}, rng);
      if (s.length() > 1 || (!s.empty() && s.parts()[0].level != 1)) return false;
      hits += s.length();
    }
    const double p = 1.0 / 3.0;
    const double freq = static_cast<double>(hits) / kDraws;
    return std::fabs(freq - p) < 4 * std::sqrt(p * (1 - p) / kDraws);
  }));
}

TEST(SampleFree, ExponentialBranchAgreesWithConstantBranch) {
  const auto constant = make_builtin("naturals");
  const auto exponential = naturals_exponential();
  constexpr std::uint64_t kDraws = 100000;
  constexpr std::uint64_t kCap = 40;
  RandomStream a(5), b(6);
  std::vector<double> pa(kCap + 1, 0.0), pb(kCap + 1, 0.0);
  for (std::uint64_t i = 0; i < kDraws; ++i) {
    pa[std::min(sample_free(constant, Univariate{0.8}, a).size(), kCap)] += 1.0 / kDraws;
    pb[std::min(sample_free(exponential, Univariate{0.8}, b).size(), kCap)] += 1.0 / kDraws;
  }
  double tv = 0.0;
  for (std::uint64_t k = 0; k <= kCap; ++k) tv += std::fabs(pa[k] - pb[k]) / 2.0;
  EXPECT_LT(tv, 0.02);
}

TEST(SampleFree, SizeLawMatchesSubsetCounts) {
  struct Case {
    CombStructure structure;
    double z;
    std::uint64_t max_n;
  };
  const std::vector<Case> cases{{make_builtin("naturals"), 0.8, 40},
                                {make_builtin("naturals0"), 0.7, 30},
                                {make_builtin("squares"), 0.9, 60},
                                {make_builtin("words:2"), 0.3, 20},
                                {make_builtin("pointed"), 0.5, 30},
                                {linear_counts_exponential(), 0.4, 30}};
  for (const auto& c : cases) {
    const auto law = exact_size_law(c.structure, c.z, c.max_n);
    EXPECT_TRUE(majority_of_seeds([&](std::uint64_t seed) {
      return size_law_p_value(c.structure, Univariate{c.z}, law, 50000, seed) > kAlpha;
    })) << c.structure.name();
  }
}

TEST(SampleFree, PointedLevelsAreUniformWithinLevel) {
  const auto pointed = make_builtin("pointed");
  RandomStream rng(4);
  std::vector<std::uint64_t> ranks(4, 0);
  for (int i = 0; i < 60000; ++i) {
    const auto s = sample_free(pointed, Univariate{0.7}, rng);
    for (const auto& p : s.parts()) {
      if (p.level == 4) ++ranks[p.rank.convert_to<std::size_t>()];
    }
  }
  EXPECT_GT(chi_square_gof(ranks, std::vector<double>(4, 0.25)).p_value, kAlpha);
}

TEST(SampleFree, BivariateMarginals) {
  const auto squares = make_builtin("squares");
  const Bivariate params{0.9, 2.0};
  constexpr std::uint64_t kDraws = 100000;
  EXPECT_TRUE(majority_of_seeds([&](std::uint64_t seed) {
    RandomStream rng(seed);
    std::map<std::uint64_t, std::uint64_t> hits;
    for (std::uint64_t i = 0; i < kDraws; ++i) {
      const auto s = sample_free(squares, params, rng);
      for (const auto& p : s.parts()) ++hits[p.level];
    }
    for (std::uint64_t level : {1, 4, 9, 16}) {
      const double w = 2.0 * std::pow(0.9, static_cast<double>(level));
      const double p = w / (1 + w);
      const double freq = static_cast<double>(hits[level]) / kDraws;
      if (std::fabs(freq - p) >= 4 * std::sqrt(p * (1 - p) / kDraws)) return false;
    }
    for (const auto& [level, count] : hits) {
      if (!is_perfect_square(level)) return false;
    }
    return true;
  }));
}

TEST(SampleFree, UndeclaredBoundViolationIsDetected) {
  const CombStructure liar(
      "liar", [](std::uint64_t n) { return Count(n == 3 ? 2 : 1); },
      [](std::uint64_t n, const Count&) { return std::to_string(n); }, ConstantBound{1.0},
      CombStructure::Check::kSkip);
  RandomStream rng(1);
  bool thrown = false;
  for (int i = 0; i < 1000 && !thrown; ++i) {
    try {
      sample_free(liar, Univariate{0.9}, rng);
    } catch (const BoundViolationError& e) {
      EXPECT_EQ(e.level(), 3u);
      thrown = true;
    }
  }
  EXPECT_TRUE(thrown);
}

TEST(SampleFree, HugeLevelSetsGetBigRanks) {
  const auto words = make_builtin("words:2");
  RandomStream rng(3);
  bool saw_big = false;
  for (int i = 0; i < 20000 && !saw_big; ++i) {
    const auto s = sample_free(words, Univariate{0.49}, rng);
    for (const auto& p : s.parts()) {
      EXPECT_LT(p.rank, words.count(p.level));
      saw_big = saw_big || p.level > 64;
    }
  }
  EXPECT_TRUE(saw_big);
}

}  // namespace
}  // namespace pset
