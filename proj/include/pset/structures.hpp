#pragma once

// Combinatorial structures A described by their counting sequence a_n, an
// unranking rule for each level set A_n, and a growth bound on a_n that picks
// the dominating law used by the sampler.

#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "pset/count.hpp"
#include "pset/errors.hpp"

namespace pset {

/// a_n <= a_bar for every n.
struct ConstantBound {
  double a_bar = 1.0;
};

/// a_n <= b c^n for every n.
struct ExponentialBound {
  double b = 1.0;
  double c = 1.0;
};

/// a_n <= b n for every n >= 1, and a_0 = 0.
struct LinearBound {
  double b = 1.0;
};

using BoundDescriptor = std::variant<ConstantBound, ExponentialBound, LinearBound>;

inline void check_bound_descriptor(const BoundDescriptor& bound) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  const bool ok = std::visit(
      [&](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, ConstantBound>) return positive(b.a_bar);
        else if constexpr (std::is_same_v<B, ExponentialBound>) return positive(b.b) && positive(b.c);
        else return positive(b.b);
      },
      bound);
  if (!ok) throw ParameterDomainError("bound parameters must be finite and positive");
}

/// ln(bound(n)); -inf where the bound is zero (Linear at n = 0).
inline double log_bound(const BoundDescriptor& bound, std::uint64_t n) {
  return std::visit(
      [n](const auto& b) -> double {
        using B = std::decay_t<decltype(b)>;
        const double nd = static_cast<double>(n);
        if constexpr (std::is_same_v<B, ConstantBound>) {
          return std::log(b.a_bar);
        } else if constexpr (std::is_same_v<B, ExponentialBound>) {
          return std::log(b.b) + nd * std::log(b.c);
        } else {
          return n == 0 ? -std::numeric_limits<double>::infinity()
                        : std::log(b.b) + std::log(nd);
        }
      },
      bound);
}

inline double bound_value(const BoundDescriptor& bound, std::uint64_t n) {
  return std::exp(log_bound(bound, n));
}

namespace detail {

inline bool is_small_integer(double v) {
  return v >= 1.0 && v <= 1e15 && std::floor(v) == v;
}

// b c^n as an exact integer, when b and c are integers.
inline bool exact_exponential_bound(const ExponentialBound& b, std::uint64_t n, Count& out) {
  if (!is_small_integer(b.b) || !is_small_integer(b.c) || n > 100000) return false;
  out = boost::multiprecision::pow(Count(static_cast<std::uint64_t>(b.c)),
                                   static_cast<unsigned>(n)) *
        static_cast<std::uint64_t>(b.b);
  return true;
}

}  // namespace detail

/// a_n / bound(n) as a double.  Exact when both sides are small or the bound
/// is an integer power; computed in log space otherwise.
inline double count_bound_ratio(const Count& count, const BoundDescriptor& bound,
                                std::uint64_t n) {
  if (count <= 0) return 0.0;
  if (const auto* eb = std::get_if<ExponentialBound>(&bound)) {
    Count exact;
    if (detail::exact_exponential_bound(*eb, n, exact)) {
      if (count == exact) return 1.0;
      if (count > exact) return std::numeric_limits<double>::infinity();
    }
  }
  const double lb = log_bound(bound, n);
  if (lb == -std::numeric_limits<double>::infinity()) {
    return std::numeric_limits<double>::infinity();
  }
  if (fits_u64(count) && lb < 700.0) {
    return count.convert_to<double>() / std::exp(lb);
  }
  return std::exp(log_count(count) - lb);
}

/// An element of A, identified by its size (level) and its index within the
/// level set A_level.
struct PartLabel {
  std::uint64_t level = 0;
  Count rank = 0;

  friend bool operator==(const PartLabel&, const PartLabel&) = default;
  friend std::strong_ordering operator<=>(const PartLabel& a, const PartLabel& b) {
    if (auto c = a.level <=> b.level; c != 0) return c;
    if (a.rank < b.rank) return std::strong_ordering::less;
    if (b.rank < a.rank) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
};

struct PartLabelHash {
  std::size_t operator()(const PartLabel& l) const noexcept {
    const std::uint64_t low = l.rank.convert_to<std::uint64_t>();
    std::uint64_t h = l.level * 0x9E3779B97F4A7C15ull ^ (low + 0x7F4A7C159E3779B9ull);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ull;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

struct BoundViolation {
  std::uint64_t level = 0;
  Count count = 0;
  double bound = 0.0;
};

using ValidationReport = std::vector<BoundViolation>;

inline constexpr std::uint64_t kDefaultBoundHorizon = 10000;

/// Immutable description of a combinatorial class A.
class CombStructure {
 public:
  using CountFn = std::function<Count(std::uint64_t)>;
  using UnrankFn = std::function<std::string(std::uint64_t, const Count&)>;

  enum class Check { kValidate, kSkip };

  /// Builds a user-defined structure.  With Check::kValidate the bound is
  /// verified on levels 0..horizon and a violation throws.
  CombStructure(std::string name, CountFn count, UnrankFn unrank, BoundDescriptor bound,
                Check check = Check::kValidate,
                std::uint64_t horizon = kDefaultBoundHorizon)
      : name_(std::move(name)),
        count_(std::move(count)),
        unrank_(std::move(unrank)),
        bound_(bound) {
    if (!count_ || !unrank_) throw ParameterDomainError("structure callbacks must be set");
    check_bound_descriptor(bound_);
    if (check == Check::kValidate) {
      const ValidationReport report = validate_bound(horizon);
      if (!report.empty()) {
        const auto& v = report.front();
        throw BoundViolationError(
            v.level, "structure '" + name_ + "': a_" + std::to_string(v.level) + " = " +
                         v.count.str() + " exceeds bound " + std::to_string(v.bound));
      }
    }
  }

  const std::string& name() const noexcept { return name_; }
  const BoundDescriptor& bound() const noexcept { return bound_; }

  Count count(std::uint64_t n) const { return count_(n); }

  /// Decodes the element of rank i in A_n; i must be below a_n.
  std::string unrank(std::uint64_t n, const Count& i) const {
    if (i < 0 || i >= count_(n)) {
      throw ParameterDomainError("unrank: rank out of range at level " + std::to_string(n));
    }
    return unrank_(n, i);
  }

  double bound_at(std::uint64_t n) const { return bound_value(bound_, n); }

  /// Lists every level n <= horizon where a_n exceeds the declared bound.
  ValidationReport validate_bound(std::uint64_t horizon) const {
    if (horizon < 1) throw ParameterDomainError("validate_bound: horizon must be >= 1");
    ValidationReport report;
    for (std::uint64_t n = 0; n <= horizon; ++n) {
      Count a = count_(n);
      if (a < 0) {
        report.push_back({n, std::move(a), bound_at(n)});
        continue;
      }
      const double ratio = count_bound_ratio(a, bound_, n);
      if (ratio > 1.0 + 1e-12) report.push_back({n, std::move(a), bound_at(n)});
    }
    return report;
  }

 private:
  std::string name_;
  CountFn count_;
  UnrankFn unrank_;
  BoundDescriptor bound_;
};

/// Exact integer square root.
inline std::uint64_t isqrt(std::uint64_t n) {
  std::uint64_t root = 0;
  std::uint64_t bit = std::uint64_t{1} << 62;
  while (bit > n) bit >>= 2;
  while (bit != 0) {
    if (n >= root + bit) {
      n -= root + bit;
      root = (root >> 1) + bit;
    } else {
      root >>= 1;
    }
    bit >>= 2;
  }
  return root;
}

inline bool is_perfect_square(std::uint64_t n) {
  const std::uint64_t r = isqrt(n);
  return r * r == n;
}

namespace builtin {

struct Naturals {
  int min_size = 1;  // 0 or 1
};
struct Squares {};
struct Words {
  unsigned alphabet = 2;
};
struct PointedNaturals {};

}  // namespace builtin

using BuiltinSpec =
    std::variant<builtin::Naturals, builtin::Squares, builtin::Words, builtin::PointedNaturals>;

inline CombStructure make_builtin(const BuiltinSpec& spec) {
  using Check = CombStructure::Check;
  return std::visit(
      [](const auto& s) -> CombStructure {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, builtin::Naturals>) {
          if (s.min_size != 0 && s.min_size != 1) {
            throw ParameterDomainError("naturals: min_size must be 0 or 1");
          }
          const std::uint64_t lo = static_cast<std::uint64_t>(s.min_size);
          return CombStructure(
              lo == 0 ? "naturals0" : "naturals",
              [lo](std::uint64_t n) { return Count(n >= lo ? 1 : 0); },
              [](std::uint64_t n, const Count&) { return std::to_string(n); },
              ConstantBound{1.0}, Check::kSkip);
        } else if constexpr (std::is_same_v<S, builtin::Squares>) {
          return CombStructure(
              "squares",
              [](std::uint64_t n) { return Count(n >= 1 && is_perfect_square(n) ? 1 : 0); },
              [](std::uint64_t n, const Count&) { return std::to_string(n); },
              ConstantBound{1.0}, Check::kSkip);
        } else if constexpr (std::is_same_v<S, builtin::Words>) {
          if (s.alphabet < 2 || s.alphabet > 36) {
            throw ParameterDomainError("words: alphabet size must lie in [2, 36]");
          }
          const unsigned k = s.alphabet;
          return CombStructure(
              "words:" + std::to_string(k),
              [k](std::uint64_t n) -> Count {
                return boost::multiprecision::pow(Count(k), static_cast<unsigned>(n));
              },
              [k](std::uint64_t n, const Count& rank) {
                static constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
                std::string word(n, '0');
                Count rest = rank;
                for (std::uint64_t pos = n; pos-- > 0;) {
                  const Count digit = rest % k;
                  word[pos] = kDigits[digit.convert_to<unsigned>()];
                  rest /= k;
                }
                return word;
              },
              ExponentialBound{1.0, static_cast<double>(k)}, Check::kSkip);
        } else {
          return CombStructure(
              "pointed", [](std::uint64_t n) { return Count(n); },
              [](std::uint64_t n, const Count& rank) {
                return std::to_string(n) + "." + rank.str();
              },
              LinearBound{1.0}, Check::kSkip);
        }
      },
      spec);
}

/// Parses the CLI names "naturals", "naturals0", "squares", "words:k" and
/// "pointed".
inline BuiltinSpec parse_builtin(std::string_view name) {
  if (name == "naturals") return builtin::Naturals{1};
  if (name == "naturals0") return builtin::Naturals{0};
  if (name == "squares") return builtin::Squares{};
  if (name == "pointed") return builtin::PointedNaturals{};
  if (name.starts_with("words:")) {
    const std::string_view digits = name.substr(6);
    unsigned k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw ParameterDomainError("words:k expects an integer alphabet size");
    }
    return builtin::Words{k};
  }
  throw ParameterDomainError("unknown structure '" + std::string(name) + "'");
}

inline CombStructure make_builtin(std::string_view name) {
  return make_builtin(parse_builtin(name));
}

}  // namespace pset
