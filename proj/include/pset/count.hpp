#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace pset {

/// Exact non-negative integer for counting sequences and ranks.  Level sets
/// of words grow like k^n, so 64 bits are not enough.
using Count = boost::multiprecision::cpp_int;

inline bool fits_u64(const Count& x) {
  return x >= 0 && x <= Count(std::numeric_limits<std::uint64_t>::max());
}

/// Natural logarithm of a count; -inf for zero.
inline double log_count(const Count& x) {
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  const auto top = boost::multiprecision::msb(x);
  if (top < 53) return std::log(x.convert_to<double>());
  const auto shift = top - 52;
  const Count head = x >> shift;
  return std::log(head.convert_to<double>()) +
         static_cast<double>(shift) * std::numbers::ln2;
}

}  // namespace pset
