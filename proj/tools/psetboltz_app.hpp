#pragma once

// psetboltz: command-line front end.
//
//   psetboltz sample    draw samples, one JSON record per line
//   psetboltz calibrate solve for the Boltzmann parameter of a target size
//   psetboltz verify    run the statistical verification suites
//   psetboltz shape     export a rescaled Young diagram and its limit curve
//   psetboltz bench     time the sampler over a list of targets
//
// Exit codes: 0 ok, 1 verification failure, 2 config error,
// 3 retries exhausted, 4 bound violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pset/pset.hpp"

namespace psetboltz {

using nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kConfigError = 2,
  kRetriesExhausted = 3,
  kBoundViolation = 4,
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string structure = "naturals";
  std::optional<double> z;
  std::optional<double> z1;
  std::optional<double> z2;
  std::optional<double> target_size;
  std::optional<double> target_length;
  std::string mode = "free";
  double epsilon = 0.1;
  std::optional<double> n;
  std::optional<double> max_attempts;
  std::optional<double> count;
  std::string seed = "42";
  std::string out = "-";
  std::string format;  // per-command default: csv for bench, json otherwise

  // bench
  std::vector<double> targets;
  std::vector<double> lengths;
  int reps = 20;
  int warmup = 3;

  // verify
  std::vector<std::string> suites;
  double acceptance_scale = 1.0;
};

inline std::uint64_t as_count(double v, const char* what) {
  if (!(v >= 0.0) || v > 1.8e19 || std::floor(v) != v) {
    throw ConfigError(std::string(what) + " must be a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

inline std::uint64_t resolve_seed(const std::string& text) {
  if (text == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("--seed expects an unsigned integer or 'random'");
  }
}

/// Explicit weights or calibration targets, never both.
inline pset::BoltzmannParams resolve_params(const RunConfig& cfg,
                                            const pset::CombStructure& structure) {
  const bool explicit_uni = cfg.z.has_value();
  const bool explicit_bi = cfg.z1.has_value() || cfg.z2.has_value();
  const bool targets = cfg.target_size.has_value() || cfg.target_length.has_value();
  const int sources = int(explicit_uni) + int(explicit_bi) + int(targets);
  if (sources == 0) {
    // Exact/approximate modes can calibrate on their own target n.
    if (cfg.mode != "free" && cfg.n) {
      return pset::Univariate{pset::calibrate_numeric(structure, *cfg.n, 1e-4)};
    }
    throw ConfigError("supply --z, --z1/--z2, or --target-size");
  }
  if (sources > 1) {
    throw ConfigError("explicit weights and calibration targets are mutually exclusive");
  }
  if (explicit_uni) return pset::Univariate{*cfg.z};
  if (explicit_bi) {
    if (!cfg.z1 || !cfg.z2) throw ConfigError("bivariate weights need both --z1 and --z2");
    return pset::Bivariate{*cfg.z1, *cfg.z2};
  }
  if (!cfg.target_size) throw ConfigError("--target-length needs --target-size");
  if (cfg.target_length) {
    if (structure.name() != "squares") {
      throw ConfigError("--target-length is only calibrated for squares");
    }
    return pset::calibrate_squares(*cfg.target_size, *cfg.target_length);
  }
  return pset::Univariate{pset::calibrate_numeric(structure, *cfg.target_size, 1e-4)};
}

inline pset::RejectionConfig resolve_rejection(const RunConfig& cfg) {
  std::optional<std::uint64_t> attempts;
  if (cfg.max_attempts) attempts = as_count(*cfg.max_attempts, "--max-attempts");
  auto target_n = [&]() -> std::uint64_t {
    if (cfg.n) return as_count(*cfg.n, "--n");
    if (cfg.target_size) return as_count(std::round(*cfg.target_size), "--target-size");
    throw ConfigError("--mode " + cfg.mode + " needs --n or --target-size");
  };
  if (cfg.mode == "free") return pset::RejectionConfig(pset::FreeMode{}, attempts);
  if (cfg.mode == "exact") return pset::RejectionConfig(pset::ExactMode{target_n()}, attempts);
  if (cfg.mode == "approx") {
    return pset::RejectionConfig(pset::ApproximateMode{target_n(), cfg.epsilon}, attempts);
  }
  throw ConfigError("--mode must be free, approx or exact");
}

class Output {
 public:
  explicit Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

inline std::string mode_name(const pset::RejectionMode& mode) {
  if (std::holds_alternative<pset::ExactMode>(mode)) return "exact";
  if (std::holds_alternative<pset::ApproximateMode>(mode)) return "approx";
  return "free";
}

inline json header_json(const RunConfig& cfg, const pset::BoltzmannParams& params,
                        const pset::RejectionConfig& rej, std::uint64_t seed) {
  json h{{"structure", cfg.structure},
         {"params", pset::io::params_to_json(params)},
         {"seed", seed},
         {"mode", mode_name(rej.mode)}};
  if (const auto* a = std::get_if<pset::ApproximateMode>(&rej.mode)) {
    h["n"] = a->n;
    h["epsilon"] = a->epsilon;
  } else if (const auto* e = std::get_if<pset::ExactMode>(&rej.mode)) {
    h["n"] = e->n;
  }
  return json{{"header", h}};
}

inline int run_sample(const RunConfig& cfg, std::ostream& out) {
  const auto structure = pset::make_builtin(cfg.structure);
  const auto params = resolve_params(cfg, structure);
  const auto rej = resolve_rejection(cfg);
  const std::uint64_t seed = resolve_seed(cfg.seed);
  const std::uint64_t count = cfg.count ? as_count(*cfg.count, "--count") : 1;

  pset::RandomStream rng(seed);
  Output sink(cfg.out, out);
  if (cfg.format == "json") {
    *sink << header_json(cfg, params, rej, seed).dump() << '\n';
  } else {
    *sink << "sample,size,length,attempts,parts\n";
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto result = pset::sample_with_rejection(structure, params, rej, rng);
    if (cfg.format == "json") {
      *sink << pset::io::sample_to_json(result.sample, result.attempts).dump() << '\n';
    } else {
      std::string parts;
      for (const auto& p : result.sample.parts()) {
        parts += (parts.empty() ? "" : ";") + std::to_string(p.level) + ":" + p.rank.str();
      }
      *sink << i << ',' << result.sample.size() << ',' << result.sample.length() << ','
            << result.attempts << ',' << parts << '\n';
    }
  }
  return kOk;
}

inline int run_calibrate(const RunConfig& cfg, std::ostream& out) {
  const auto structure = pset::make_builtin(cfg.structure);
  if (!cfg.target_size) throw ConfigError("calibrate needs --target-size");
  if (cfg.z || cfg.z1 || cfg.z2) throw ConfigError("calibrate takes targets, not weights");
  json result{{"structure", cfg.structure}, {"target_size", *cfg.target_size}};
  pset::BoltzmannParams params;
  if (cfg.target_length) {
    if (structure.name() != "squares") throw ConfigError("--target-length is only calibrated for squares");
    const auto bi = pset::calibrate_squares(*cfg.target_size, *cfg.target_length);
    params = bi;
    result["target_length"] = *cfg.target_length;
    result["z1"] = bi.z1;
    result["z2"] = bi.z2;
  } else {
    const double z = pset::calibrate_numeric(structure, *cfg.target_size, 1e-6);
    params = pset::Univariate{z};
    result["z"] = z;
    result["expected_size"] = pset::expected_size(structure, params, 1e-9);
    if (structure.name() == "naturals" && *cfg.target_size >= 1.0) {
      result["z_asymptotic"] = pset::calibrate_partitions(*cfg.target_size);
    }
  }
  result["dominating_rate"] = pset::dominating_rate_total(structure, params);
  Output sink(cfg.out, out);
  if (cfg.format == "csv") {
    *sink << "key,value\n";
    for (const auto& [k, v] : result.items()) *sink << k << ',' << v.dump() << '\n';
  } else {
    *sink << result.dump() << '\n';
  }
  return kOk;
}

inline int run_verify(const RunConfig& cfg, std::ostream& out) {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  if (cfg.seed != "42") {
    const std::uint64_t base = resolve_seed(cfg.seed);
    seeds = {base, base + 1, base + 2};
  }
  std::optional<std::uint64_t> count;
  if (cfg.count) {
    count = as_count(*cfg.count, "--count");
    if (*count == 0) throw ConfigError("--count must be positive for verify");
  }
  std::vector<std::string> suites = cfg.suites;
  if (suites.empty()) suites = {"marginal", "covariance", "oracle", "uniformity"};
  auto wants = [&](const std::string& s) {
    return std::find(suites.begin(), suites.end(), s) != suites.end();
  };
  for (const auto& s : suites) {
    if (s != "marginal" && s != "covariance" && s != "oracle" && s != "uniformity") {
      throw ConfigError("unknown suite '" + s + "'");
    }
  }
  const pset::SamplerOptions options{cfg.acceptance_scale};

  std::vector<pset::verify::SuiteResult> results;
  if (wants("marginal") || wants("covariance")) {
    auto mc = pset::verify::marginal_and_covariance(seeds, count.value_or(200'000), options);
    if (wants("marginal")) results.push_back(std::move(mc.marginal));
    if (wants("covariance")) results.push_back(std::move(mc.covariance));
  }
  if (wants("oracle")) {
    results.push_back(pset::verify::oracle_equivalence(seeds, count.value_or(1'000'000), options));
  }
  if (wants("uniformity")) {
    results.push_back(pset::verify::conditional_uniformity(seeds, count.value_or(60'000), 8, options));
  }

  bool all = true;
  json doc{{"seeds", seeds}, {"suites", json::array()}};
  for (const auto& r : results) {
    all = all && r.passed;
    doc["suites"].push_back(pset::verify::suite_to_json(r));
  }
  doc["passed"] = all;
  Output sink(cfg.out, out);
  *sink << doc.dump(2) << '\n';
  return all ? kOk : kVerificationFailed;
}

inline int run_shape(const RunConfig& cfg, std::ostream& out) {
  const auto structure = pset::make_builtin(cfg.structure);
  const auto params = resolve_params(cfg, structure);
  const auto rej = resolve_rejection(cfg);
  const std::uint64_t seed = resolve_seed(cfg.seed);
  const std::uint64_t count = cfg.count ? as_count(*cfg.count, "--count") : 1;

  pset::Rescaling scaling = pset::SqrtSizeScaling{};
  pset::LimitShape kind = pset::LimitShape::kVershik;
  if (cfg.structure == "squares") {
    if (!cfg.target_size || !cfg.target_length) {
      throw ConfigError("shape for squares needs --target-size and --target-length");
    }
    scaling = pset::BivariateScaling{*cfg.target_size, *cfg.target_length};
    kind = pset::LimitShape::kGammaSurvival;
  } else if (cfg.structure != "naturals") {
    throw ConfigError("no limit shape is known for structure '" + cfg.structure + "'");
  }

  const std::string prefix = cfg.out == "-" ? "shape" : cfg.out;
  pset::RandomStream rng(seed);
  json summary = json::array();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto result = pset::sample_with_rejection(structure, params, rej, rng);
    if (result.sample.empty()) throw ConfigError("sample is empty; rescaling is undefined");
    const auto curve = pset::rescale_diagram(pset::young_diagram(result.sample), scaling);
    pset::Curve limit;
    limit.reserve(curve.size());
    for (const auto& p : curve) limit.push_back({p.x, pset::limit_shape(kind, p.x)});

    const std::string suffix = count > 1 ? "_" + std::to_string(i) : "";
    std::ofstream sample_file(prefix + "_sample" + suffix + ".csv");
    std::ofstream limit_file(prefix + "_limit" + suffix + ".csv");
    if (!sample_file || !limit_file) throw ConfigError("cannot write shape files under " + prefix);
    pset::io::write_curve_csv(sample_file, curve);
    pset::io::write_curve_csv(limit_file, limit);

    const double dist = pset::sup_distance(curve, kind);
    summary.push_back({{"sample", i},
                       {"size", result.sample.size()},
                       {"length", result.sample.length()},
                       {"sup_distance", dist}});
  }
  for (const auto& s : summary) out << s.dump() << '\n';
  return kOk;
}

struct BenchRow {
  double target;
  std::optional<double> target_length;
  double mean_ms;
  double stddev_ms;
  double p10_ms;
  double p90_ms;
  double mean_attempts;
};

/// Linear interpolation between order statistics.
inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v.front();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline BenchRow bench_one(const pset::CombStructure& structure, const pset::BoltzmannParams& params,
                          const pset::RejectionConfig& rej, double target,
                          std::optional<double> length, int warmup, int reps,
                          pset::RandomStream& rng) {
  using clock = std::chrono::steady_clock;
  for (int i = 0; i < warmup; ++i) pset::sample_with_rejection(structure, params, rej, rng);
  std::vector<double> ms;
  double attempts = 0.0;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = clock::now();
    const auto result = pset::sample_with_rejection(structure, params, rej, rng);
    const auto t1 = clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    attempts += static_cast<double>(result.attempts);
  }
  const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / reps;
  double var = 0.0;
  for (double t : ms) var += (t - mean) * (t - mean);
  const double sd = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
  return {target, length, mean, sd, percentile(ms, 0.1), percentile(ms, 0.9), attempts / reps};
}

inline std::vector<BenchRow> bench_rows(const RunConfig& cfg) {
  const auto structure = pset::make_builtin(cfg.structure);
  if (cfg.reps < 1 || cfg.warmup < 0) throw ConfigError("--reps must be >= 1 and --warmup >= 0");
  if (cfg.z || cfg.z1 || cfg.z2) throw ConfigError("bench calibrates per target; drop explicit weights");
  const bool squares = cfg.structure == "squares";
  std::vector<double> targets = cfg.targets;
  if (targets.empty()) {
    if (squares) targets = {1e6, 1e9};
    else if (cfg.mode == "free") targets = {1e3, 1e6, 1e9};
    else targets = {1e2, 1e3, 1e4};
  }
  std::vector<double> lengths = cfg.lengths;
  if (squares && lengths.empty()) lengths = {5, 10, 15, 20};
  if (!squares && !lengths.empty()) throw ConfigError("--lengths applies to squares only");

  pset::RandomStream rng(resolve_seed(cfg.seed));
  std::vector<BenchRow> rows;
  for (const double t : targets) {
    RunConfig per = cfg;
    per.target_size = t;
    per.n.reset();
    const auto rej = resolve_rejection(per);
    if (squares) {
      for (const double len : lengths) {
        const pset::BoltzmannParams params = pset::calibrate_squares(t, len);
        rows.push_back(bench_one(structure, params, rej, t, len, cfg.warmup, cfg.reps, rng));
      }
    } else {
      const pset::BoltzmannParams params =
          pset::Univariate{pset::calibrate_numeric(structure, t, 1e-4)};
      rows.push_back(bench_one(structure, params, rej, t, std::nullopt, cfg.warmup, cfg.reps, rng));
    }
  }
  return rows;
}

inline int run_bench(const RunConfig& cfg, std::ostream& out) {
  const auto rows = bench_rows(cfg);
  Output sink(cfg.out, out);
  if (cfg.format == "json") {
    json doc = json::array();
    for (const auto& r : rows) {
      json row{{"target", r.target}, {"mean_ms", r.mean_ms}, {"stddev_ms", r.stddev_ms},
               {"p10_ms", r.p10_ms}, {"p90_ms", r.p90_ms}, {"mean_attempts", r.mean_attempts}};
      if (r.target_length) row["target_length"] = *r.target_length;
      doc.push_back(row);
    }
    *sink << doc.dump(2) << '\n';
  } else {
    *sink << "target,target_length,mean_ms,stddev_ms,p10_ms,p90_ms,mean_attempts\n";
    for (const auto& r : rows) {
      *sink << pset::io::format_real(r.target) << ','
            << (r.target_length ? pset::io::format_real(*r.target_length) : "") << ','
            << pset::io::format_real(r.mean_ms) << ',' << pset::io::format_real(r.stddev_ms) << ','
            << pset::io::format_real(r.p10_ms) << ',' << pset::io::format_real(r.p90_ms) << ','
            << pset::io::format_real(r.mean_attempts) << '\n';
    }
  }
  return kOk;
}

inline void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--structure", cfg.structure, "naturals | naturals0 | squares | words:k | pointed");
  sub->add_option("--z", cfg.z, "univariate weight in [0,1)");
  sub->add_option("--z1", cfg.z1, "bivariate size weight in (0,1)");
  sub->add_option("--z2", cfg.z2, "bivariate length weight > 0");
  sub->add_option("--target-size", cfg.target_size, "calibrate to this expected size");
  sub->add_option("--target-length", cfg.target_length, "calibrate to this expected length (squares)");
  sub->add_option("--mode", cfg.mode, "free | approx | exact");
  sub->add_option("--epsilon", cfg.epsilon, "approximate-window half width");
  sub->add_option("--n", cfg.n, "target size for approx/exact rejection");
  sub->add_option("--max-attempts", cfg.max_attempts, "rejection attempt limit");
  sub->add_option("--count", cfg.count, "number of samples");
  sub->add_option("--seed", cfg.seed, "unsigned seed or 'random' (default 42)");
  sub->add_option("--out", cfg.out, "output path ('-' for stdout)");
  sub->add_option("--format", cfg.format, "json | csv");
}

/// Parses and runs one command; never throws.
inline int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Oracle-free Boltzmann sampler for powersets", "psetboltz"};
  app.require_subcommand(1);
  auto* sample = app.add_subcommand("sample", "draw Boltzmann samples");
  auto* calibrate = app.add_subcommand("calibrate", "solve E(N) = target for the weight");
  auto* verify = app.add_subcommand("verify", "run statistical verification suites");
  auto* shape = app.add_subcommand("shape", "export rescaled Young diagram and limit curve");
  auto* bench = app.add_subcommand("bench", "time the sampler");
  for (auto* sub : {sample, calibrate, verify, shape, bench}) add_common(sub, cfg);
  verify->add_option("--suite", cfg.suites, "marginal | covariance | oracle | uniformity")
      ->delimiter(',');
  verify->add_option("--inject-acceptance-scale", cfg.acceptance_scale,
                     "multiply acceptance probabilities (self-test of the suites)")
      ->group("");
  bench->add_option("--targets", cfg.targets, "comma-separated target sizes")->delimiter(',');
  bench->add_option("--lengths", cfg.lengths, "comma-separated target lengths (squares)")
      ->delimiter(',');
  bench->add_option("--reps", cfg.reps, "timed repetitions per target");
  bench->add_option("--warmup", cfg.warmup, "untimed repetitions per target");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
    if (cfg.format.empty()) cfg.format = bench->parsed() ? "csv" : "json";
    if (cfg.format != "json" && cfg.format != "csv") {
      throw CLI::ValidationError("--format", "must be json or csv");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (sample->parsed()) return run_sample(cfg, out);
    if (calibrate->parsed()) return run_calibrate(cfg, out);
    if (verify->parsed()) return run_verify(cfg, out);
    if (shape->parsed()) return run_shape(cfg, out);
    return run_bench(cfg, out);
  } catch (const pset::RetriesExhaustedError& e) {
    err << "error: " << e.what() << '\n';
    return kRetriesExhausted;
  } catch (const pset::BoundViolationError& e) {
    err << "error: " << e.what() << '\n';
    return kBoundViolation;
  } catch (const pset::Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace psetboltz
