#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace turnlab {

/// Signed frequency / module value. All arithmetic on it goes through the
/// checked helpers below; an overflow is reported, never wrapped.
using Value = std::int64_t;

class OverflowError : public std::overflow_error {
 public:
  explicit OverflowError(const std::string& what) : std::overflow_error(what) {}
};

inline Value checked_add(Value a, Value b) {
  Value r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in addition");
  return r;
}

inline Value checked_sub(Value a, Value b) {
  Value r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in subtraction");
  return r;
}

inline Value checked_mul(Value a, Value b) {
  Value r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in multiplication");
  return r;
}

/// Floor division, rounding toward negative infinity. `b` must be positive.
inline Value floor_div(Value a, Value b) {
  Value q = a / b;
  if ((a % b) != 0 && a < 0) --q;
  return q;
}

/// Floor modulus in [0, b). `b` must be positive.
inline Value floor_mod(Value a, Value b) {
  Value r = a % b;
  return r < 0 ? r + b : r;
}

/// Number of bits needed to write values in [0, count), i.e. ceil(log2(count)).
inline int ceil_log2(std::uint64_t count) {
  if (count <= 1) return 0;
  return 64 - __builtin_clzll(count - 1);
}

}  // namespace turnlab
