#pragma once

// Generalized linear sketch. Moduli a_i and overflow vectors o_i (supported on
// coordinates below i) define the Z-module M = (prod Z_{a_i}, *) and the
// homomorphism phi : Z^n -> M given by
//
//   phi(0) = 0
//   phi(x + r e_i) = (r mod a_i) e_i + phi(x + floor(r / a_i) o_i)   (x_j = 0 for j >= i)
//
// with u * v = phi(u + v). Coordinate i overflowing a_i wraps and injects o_i
// into the lower coordinates.

#include <cstdint>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "turnlab/stream.hpp"

namespace turnlab::sketch {

/// Sparse vector as (coordinate, value) pairs sorted by coordinate, zeros omitted.
using SparseEntries = std::vector<std::pair<Coordinate, Value>>;

class SketchParams {
 public:
  /// Validates: every a_i >= 1, and o_i is supported on j < i with
  /// 0 <= (o_i)_j < a_j. Throws std::invalid_argument otherwise.
  SketchParams(std::vector<Value> moduli, std::vector<SparseEntries> overflow);

  /// Trivial module: all a_i = 1, phi == 0.
  static SketchParams trivial(std::size_t dimension);

  /// Accepts overflow vectors with arbitrary integer entries below i and
  /// reduces each o_i into prod_{j<i} Z_{a_j} (in increasing i). The
  /// generated lattice, and therefore phi, is unchanged.
  static SketchParams normalized(std::vector<Value> moduli, std::vector<SparseEntries> raw_overflow);

  std::size_t dimension() const { return moduli_.size(); }
  Value modulus(Coordinate i) const { return moduli_.at(i - 1); }
  const std::vector<Value>& moduli() const { return moduli_; }
  const SparseEntries& overflow(Coordinate i) const { return overflow_.at(i - 1); }
  const std::vector<SparseEntries>& overflows() const { return overflow_; }

  /// Coordinates with a_i > 1, increasing.
  const std::vector<Coordinate>& nontrivial() const { return nontrivial_; }
  /// m = #{i : a_i > 1}
  std::size_t nontrivial_count() const { return nontrivial_.size(); }

  friend bool operator==(const SketchParams& a, const SketchParams& b) {
    return a.moduli_ == b.moduli_ && a.overflow_ == b.overflow_;
  }

 private:
  SketchParams() = default;

  std::vector<Value> moduli_;
  std::vector<SparseEntries> overflow_;
  std::vector<Coordinate> nontrivial_;
};

using ParamsPtr = std::shared_ptr<const SketchParams>;

inline ParamsPtr share(SketchParams params) {
  return std::make_shared<const SketchParams>(std::move(params));
}

/// Element of M: 0 <= v_i < a_i, stored only on coordinates where v_i != 0
/// (which are necessarily nontrivial).
class SketchVector {
 public:
  explicit SketchVector(ParamsPtr params);

  const SketchParams& params() const { return *params_; }
  const ParamsPtr& params_ptr() const { return params_; }

  const SparseEntries& entries() const { return entries_; }
  Value operator[](Coordinate i) const;
  bool is_zero() const { return entries_.empty(); }

  /// The same vector viewed in Z^n.
  FrequencyVector as_frequency() const;

  friend bool operator==(const SketchVector& a, const SketchVector& b);

 private:
  friend SketchVector phi(const ParamsPtr& params, const FrequencyVector& x);
  friend SketchVector update_sketch(const SketchVector& state, const Update& update);

  ParamsPtr params_;
  SparseEntries entries_;
};

SketchVector phi(const ParamsPtr& params, const FrequencyVector& x);

/// u * v = phi(u + v). Throws std::invalid_argument if the params differ.
SketchVector star(const SketchVector& u, const SketchVector& v);

/// phi(-u); u * inverse(u) = 0.
SketchVector inverse(const SketchVector& u);

/// k-fold *-sum of u (negative k uses the inverse), by doubling.
SketchVector scalar_mul(Value k, const SketchVector& u);

/// phi(state + delta e_i).
SketchVector update_sketch(const SketchVector& state, const Update& update);

/// Folds update_sketch over a stream starting from 0.
SketchVector sketch_stream(const ParamsPtr& params, const Stream& stream);

/// Stored bits of a state: sum over nontrivial i of ceil(log2 a_i).
std::uint64_t space_bits(const SketchParams& params);
/// Bits of a state packed in mixed radix: ceil(log2 prod a_i). Never exceeds
/// the per-coordinate count above.
std::uint64_t packed_space_bits(const SketchParams& params);
/// Parameter storage: state bits plus m * ceil(log2 n) index bits.
std::uint64_t params_space_bits(const SketchParams& params);
/// True iff prod a_i <= 2^s.
bool product_at_most_pow2(const SketchParams& params, int s);

/// Random valid params: a_i uniform in [1, max_modulus], o_i uniform in
/// prod_{j<i} Z_{a_j}.
SketchParams random_params(std::size_t dimension, Value max_modulus, std::mt19937_64& rng);

struct LawReport {
  std::uint64_t triples = 0;
  std::uint64_t idempotence = 0;
  std::uint64_t commutativity = 0;
  std::uint64_t associativity = 0;
  std::uint64_t identity = 0;
  std::uint64_t inverse = 0;
  std::uint64_t homomorphism = 0;

  std::uint64_t failures() const {
    return idempotence + commutativity + associativity + identity + inverse + homomorphism;
  }
};

/// Draws `triples` vector triples (x, y, z) in [-bound, bound]^n and counts
/// the failures of each module law.
LawReport check_module_laws(const ParamsPtr& params, std::uint64_t triples, Value bound, std::mt19937_64& rng);

}  // namespace turnlab::sketch
