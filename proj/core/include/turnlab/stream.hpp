#pragma once

// Turnstile stream model: updates, sparse frequency vectors, lazily generated
// streams and the prefix constraints (binary, box, length, strict) that the
// separation results are stated over.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "turnlab/integer.hpp"

namespace turnlab {

/// 1-based coordinate in [1, n].
using Coordinate = std::size_t;

struct Update {
  Coordinate index = 0;
  Value delta = 0;

  friend bool operator==(const Update&, const Update&) = default;
};

/// Sparse vector in Z^n. Only nonzero entries are stored, keyed in increasing
/// coordinate order.
class FrequencyVector {
 public:
  FrequencyVector() = default;
  explicit FrequencyVector(std::size_t dimension) : dimension_(dimension) {}

  /// Dense entry k becomes coordinate k + 1.
  static FrequencyVector from_dense(std::span<const Value> dense);

  std::size_t dimension() const { return dimension_; }
  const std::map<Coordinate, Value>& entries() const { return entries_; }

  Value operator[](Coordinate i) const;
  void add(Coordinate i, Value delta);
  void set(Coordinate i, Value value);

  /// ||x||_0
  std::size_t support_size() const { return entries_.size(); }
  /// ||x||_inf
  Value max_abs() const;
  bool is_zero() const { return entries_.empty(); }

  std::vector<Value> dense() const;

  FrequencyVector& operator+=(const FrequencyVector& other);
  FrequencyVector& operator-=(const FrequencyVector& other);
  FrequencyVector operator-() const;
  FrequencyVector scaled(Value k) const;

  friend FrequencyVector operator+(FrequencyVector a, const FrequencyVector& b) { return a += b; }
  friend FrequencyVector operator-(FrequencyVector a, const FrequencyVector& b) { return a -= b; }
  friend bool operator==(const FrequencyVector&, const FrequencyVector&) = default;

 private:
  void check_index(Coordinate i) const;

  std::size_t dimension_ = 0;
  std::map<Coordinate, Value> entries_;
};

/// A finite turnstile stream over Z^n. Either backed by a materialized update
/// list or by a producer that regenerates the updates on every pass, so very
/// long streams (repetitions, replayed enumerations) cost time, not memory.
/// Streams are immutable values and cheap to copy.
class Stream {
 public:
  /// Receives one update; returning false stops the pass.
  using Sink = std::function<bool(const Update&)>;
  /// Pushes every update into the sink in order; returns false iff the sink
  /// asked to stop.
  using Producer = std::function<bool(const Sink&)>;

  Stream() = default;
  explicit Stream(std::size_t dimension) : dimension_(dimension) {}
  Stream(std::size_t dimension, std::vector<Update> updates);

  static Stream generated(std::size_t dimension, Producer producer,
                          std::optional<std::uint64_t> length = std::nullopt);

  std::size_t dimension() const { return dimension_; }
  bool is_materialized() const { return producer_ == nullptr; }

  /// Runs one pass. Returns false iff the sink stopped early.
  bool for_each(const Sink& sink) const;

  /// Number of updates. Counts by running a pass when not known up front.
  std::uint64_t length() const;

  /// sigma^(t): the first t updates. t must not exceed length().
  Stream prefix(std::uint64_t t) const;
  /// sigma^k, generated lazily.
  Stream repeated(std::uint64_t times) const;

  std::vector<Update> materialize() const;

 private:
  std::size_t dimension_ = 0;
  std::shared_ptr<const std::vector<Update>> updates_;
  Producer producer_;
  std::optional<std::uint64_t> length_;
};

/// State of the stream after its first t updates (all of them by default).
/// Throws std::out_of_range when t exceeds the stream length.
FrequencyVector freq(const Stream& stream, std::optional<std::uint64_t> t = std::nullopt);

/// Canonical stream: one update (i, x_i) per nonzero coordinate, increasing i.
Stream kappa(const FrequencyVector& x);

/// Same updates with every delta negated.
Stream negate(const Stream& stream);

/// Updates of `first` followed by those of `second`. Throws
/// std::invalid_argument on a dimension mismatch.
Stream concat(const Stream& first, const Stream& second);

/// True iff some update carries a zero delta. Legal, but generators never
/// produce them.
bool has_zero_delta(const Stream& stream);

struct StreamConstraint {
  enum class Kind { kBinary, kBox, kLength, kStrictTurnstile };

  Kind kind = Kind::kStrictTurnstile;
  /// M for kBox, L for kLength; unused otherwise.
  Value parameter = 0;

  static StreamConstraint binary() { return {Kind::kBinary, 0}; }
  static StreamConstraint box(Value bound) { return {Kind::kBox, bound}; }
  static StreamConstraint max_length(Value length) { return {Kind::kLength, length}; }
  static StreamConstraint strict_turnstile() { return {Kind::kStrictTurnstile, 0}; }
};

struct ConstraintReport {
  bool satisfied = true;
  /// Smallest t such that the prefix sigma^(t) violates the constraint.
  std::optional<std::uint64_t> first_violation;
};

ConstraintReport check_constraint(const Stream& stream, const StreamConstraint& constraint);

/// Little-endian odometer over prod_{k < i} Z_{a_k} x N x {0}^{n-i}, where i is
/// the free coordinate (moduli.size() + 1). Starts at the zero vector.
/// x < y iff x_n < y_n, or x_n = y_n and x_{n-1} < y_{n-1}, and so on.
class LittleEndianCounter {
 public:
  LittleEndianCounter(std::vector<Value> moduli_prefix, std::size_t dimension);

  Coordinate free_coordinate() const { return moduli_.size() + 1; }
  /// Position j of the current vector x_j.
  std::uint64_t position() const { return position_; }
  /// Dense x_j; entry k is coordinate k + 1.
  const std::vector<Value>& current() const { return current_; }
  FrequencyVector current_vector() const { return FrequencyVector::from_dense(current_); }

  /// Moves to x_{j+1} and returns kappa(x_{j+1} - x_j) as an update list.
  const std::vector<Update>& advance();

 private:
  std::vector<Value> moduli_;
  std::vector<Value> current_;
  std::vector<Update> step_;
  std::uint64_t position_ = 0;
};

/// The first `count` vectors of the little-endian enumeration.
std::vector<FrequencyVector> little_endian_take(const std::vector<Value>& moduli_prefix,
                                                std::size_t dimension, std::size_t count);

/// Strict little-endian comparison (x < y).
bool little_endian_less(const FrequencyVector& x, const FrequencyVector& y);

}  // namespace turnlab
