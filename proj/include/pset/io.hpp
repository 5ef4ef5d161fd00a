#pragma once

// File formats: one JSON object per line for samples, CSV "x,y" for curves,
// JSON for verification reports.

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>

#include "pset/analysis.hpp"
#include "pset/count.hpp"
#include "pset/errors.hpp"
#include "pset/sampler.hpp"

namespace pset::io {

using nlohmann::json;

namespace detail {

// Ranks are numbers when they fit in 64 bits, decimal strings otherwise.
inline json rank_to_json(const Count& rank) {
  if (fits_u64(rank)) return json(rank.convert_to<std::uint64_t>());
  return json(rank.str());
}

inline Count rank_from_json(const json& j) {
  if (j.is_number_unsigned()) return Count(j.get<std::uint64_t>());
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return Count(j.get<std::int64_t>());
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ParameterDomainError("rank string is not a non-negative integer: " + s);
    }
    return Count(s);
  }
  throw ParameterDomainError("rank must be a non-negative integer");
}

}  // namespace detail

inline json params_to_json(const BoltzmannParams& params) {
  if (const auto* u = std::get_if<Univariate>(&params)) return json{{"z", u->z}};
  const auto& b = std::get<Bivariate>(params);
  return json{{"z1", b.z1}, {"z2", b.z2}};
}

inline json sample_to_json(const PowersetSample& sample, std::uint64_t attempts = 1) {
  json parts = json::array();
  for (const auto& p : sample.parts()) {
    parts.push_back({{"level", p.level}, {"rank", detail::rank_to_json(p.rank)}});
  }
  return json{{"parts", std::move(parts)},
              {"size", sample.size()},
              {"length", sample.length()},
              {"attempts", attempts}};
}

/// Parses a record written by sample_to_json.  size and length, when
/// present, must agree with the parts.
inline PowersetSample sample_from_json(const json& j) {
  if (!j.is_object() || !j.contains("parts") || !j["parts"].is_array()) {
    throw ParameterDomainError("sample record needs a \"parts\" array");
  }
  std::vector<PartLabel> parts;
  for (const auto& p : j["parts"]) {
    parts.push_back({p.at("level").get<std::uint64_t>(), detail::rank_from_json(p.at("rank"))});
  }
  PowersetSample sample(std::move(parts));
  if (j.contains("size") && j["size"].get<std::uint64_t>() != sample.size()) {
    throw ParameterDomainError("sample record: size disagrees with parts");
  }
  if (j.contains("length") && j["length"].get<std::uint64_t>() != sample.length()) {
    throw ParameterDomainError("sample record: length disagrees with parts");
  }
  return sample;
}

inline json report_to_json(const VerificationReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back(
        {{"outcome", c.outcome}, {"expected_prob", c.expected_prob}, {"observed", c.observed}});
  }
  return json{{"cells", std::move(cells)},
              {"chi_square_stat", r.chi_square_stat},
              {"degrees_of_freedom", r.degrees_of_freedom},
              {"p_value", r.p_value},
              {"sample_count", r.sample_count}};
}

/// 12 significant digits.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_curve_csv(std::ostream& out, const Curve& curve) {
  out << "x,y\n";
  for (const auto& p : curve) out << format_real(p.x) << ',' << format_real(p.y) << '\n';
}

}  // namespace pset::io
