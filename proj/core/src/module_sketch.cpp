#include "turnlab/module_sketch.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace turnlab::sketch {
namespace {

__extension__ using Wide = unsigned __int128;

using Working = std::map<Coordinate, Value>;

// Applies the defining recursion from the highest stored coordinate down.
// Each coordinate is visited once: o_i only touches coordinates below i.
void reduce(Working& z, const std::vector<Value>& moduli, const std::vector<SparseEntries>& overflow) {
  auto it = z.end();
  while (it != z.begin()) {
    --it;
    const Coordinate i = it->first;
    const Value a = moduli[i - 1];
    const Value carry = floor_div(it->second, a);
    const Value rem = it->second - carry * a;
    if (rem == 0) {
      it = z.erase(it);
    } else {
      it->second = rem;
    }
    if (carry == 0) continue;
    for (const auto& [j, o] : overflow[i - 1]) {
      auto [slot, inserted] = z.try_emplace(j, 0);
      slot->second = checked_add(slot->second, checked_mul(carry, o));
      if (slot->second == 0) z.erase(slot);
    }
  }
}

SparseEntries to_entries(const Working& z) { return SparseEntries(z.begin(), z.end()); }

void require_same_params(const SketchVector& u, const SketchVector& v) {
  if (u.params_ptr() != v.params_ptr() && !(u.params() == v.params())) {
    throw std::invalid_argument("sketch vectors belong to different modules");
  }
}

}  // namespace

SketchParams::SketchParams(std::vector<Value> moduli, std::vector<SparseEntries> overflow)
    : moduli_(std::move(moduli)), overflow_(std::move(overflow)) {
  const std::size_t n = moduli_.size();
  if (overflow_.size() != n) throw std::invalid_argument("need one overflow vector per coordinate");
  for (std::size_t k = 0; k < n; ++k) {
    if (moduli_[k] < 1) {
      throw std::invalid_argument("modulus a_" + std::to_string(k + 1) + " must be positive");
    }
    if (moduli_[k] > 1) nontrivial_.push_back(k + 1);
    Coordinate previous = 0;
    for (const auto& [j, v] : overflow_[k]) {
      if (j <= previous) throw std::invalid_argument("overflow entries must be sorted and unique");
      previous = j;
      if (j == 0 || j > k) {
        throw std::invalid_argument("o_" + std::to_string(k + 1) +
                                    " must be supported below its own coordinate");
      }
      if (v <= 0 || v >= moduli_[j - 1]) {
        throw std::invalid_argument("o_" + std::to_string(k + 1) + " entry at " + std::to_string(j) +
                                    " outside [1, a_j)");
      }
    }
  }
}

SketchParams SketchParams::trivial(std::size_t dimension) {
  return SketchParams(std::vector<Value>(dimension, 1), std::vector<SparseEntries>(dimension));
}

SketchParams SketchParams::normalized(std::vector<Value> moduli, std::vector<SparseEntries> raw_overflow) {
  const std::size_t n = moduli.size();
  if (raw_overflow.size() != n) throw std::invalid_argument("need one overflow vector per coordinate");
  for (Value a : moduli) {
    if (a < 1) throw std::invalid_argument("moduli must be positive");
  }
  std::vector<SparseEntries> reduced(n);
  for (std::size_t k = 0; k < n; ++k) {
    Working z;
    for (const auto& [j, v] : raw_overflow[k]) {
      if (j == 0 || j > k) throw std::invalid_argument("overflow must be supported below its coordinate");
      if (v != 0) z[j] = checked_add(z[j], v);
    }
    // Only coordinates below k + 1 are present, and their overflows are final.
    reduce(z, moduli, reduced);
    reduced[k] = to_entries(z);
  }
  return SketchParams(std::move(moduli), std::move(reduced));
}

SketchVector::SketchVector(ParamsPtr params) : params_(std::move(params)) {
  if (!params_) throw std::invalid_argument("null sketch params");
}

Value SketchVector::operator[](Coordinate i) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                             [](const auto& e, Coordinate c) { return e.first < c; });
  return (it != entries_.end() && it->first == i) ? it->second : 0;
}

FrequencyVector SketchVector::as_frequency() const {
  FrequencyVector x(params_->dimension());
  for (const auto& [i, v] : entries_) x.set(i, v);
  return x;
}

bool operator==(const SketchVector& a, const SketchVector& b) {
  if (a.entries_ != b.entries_) return false;
  return a.params_ == b.params_ || *a.params_ == *b.params_;
}

SketchVector phi(const ParamsPtr& params, const FrequencyVector& x) {
  if (x.dimension() != params->dimension()) throw std::invalid_argument("dimension mismatch");
  Working z(x.entries().begin(), x.entries().end());
  reduce(z, params->moduli(), params->overflows());
  SketchVector out(params);
  out.entries_ = to_entries(z);
  return out;
}

SketchVector star(const SketchVector& u, const SketchVector& v) {
  require_same_params(u, v);
  FrequencyVector sum = u.as_frequency();
  sum += v.as_frequency();
  return phi(u.params_ptr(), sum);
}

SketchVector inverse(const SketchVector& u) { return phi(u.params_ptr(), -u.as_frequency()); }

SketchVector scalar_mul(Value k, const SketchVector& u) {
  SketchVector result(u.params_ptr());
  SketchVector base = k < 0 ? inverse(u) : u;
  std::uint64_t remaining = k < 0 ? static_cast<std::uint64_t>(-(k + 1)) + 1 : static_cast<std::uint64_t>(k);
  while (remaining != 0) {
    if (remaining & 1U) result = star(result, base);
    remaining >>= 1U;
    if (remaining != 0) base = star(base, base);
  }
  return result;
}

SketchVector update_sketch(const SketchVector& state, const Update& update) {
  const auto& params = state.params();
  if (update.index == 0 || update.index > params.dimension()) {
    throw std::out_of_range("update index outside the sketch dimension");
  }
  if (update.delta == 0) return state;
  Working z(state.entries_.begin(), state.entries_.end());
  auto [slot, inserted] = z.try_emplace(update.index, 0);
  slot->second = checked_add(slot->second, update.delta);
  if (slot->second == 0) z.erase(slot);
  reduce(z, params.moduli(), params.overflows());
  SketchVector out(state.params_ptr());
  out.entries_ = to_entries(z);
  return out;
}

SketchVector sketch_stream(const ParamsPtr& params, const Stream& stream) {
  if (stream.dimension() != params->dimension()) throw std::invalid_argument("dimension mismatch");
  SketchVector state(params);
  stream.for_each([&](const Update& u) {
    state = update_sketch(state, u);
    return true;
  });
  return state;
}

std::uint64_t space_bits(const SketchParams& params) {
  std::uint64_t bits = 0;
  for (Coordinate i : params.nontrivial()) bits += ceil_log2(static_cast<std::uint64_t>(params.modulus(i)));
  return bits;
}

std::uint64_t packed_space_bits(const SketchParams& params) {
  Wide product = 1;
  constexpr Wide kCap = static_cast<Wide>(1) << 120;
  for (Coordinate i : params.nontrivial()) {
    product *= static_cast<Wide>(params.modulus(i));
    if (product > kCap) return space_bits(params);
  }
  std::uint64_t bits = 0;
  while ((static_cast<Wide>(1) << bits) < product) ++bits;
  return bits;
}

std::uint64_t params_space_bits(const SketchParams& params) {
  return space_bits(params) +
         params.nontrivial_count() * static_cast<std::uint64_t>(ceil_log2(params.dimension()));
}

bool product_at_most_pow2(const SketchParams& params, int s) {
  if (s >= 120) return true;
  const Wide bound = static_cast<Wide>(1) << s;
  Wide product = 1;
  for (Coordinate i : params.nontrivial()) {
    product *= static_cast<Wide>(params.modulus(i));
    if (product > bound) return false;
  }
  return true;
}

SketchParams random_params(std::size_t dimension, Value max_modulus, std::mt19937_64& rng) {
  std::uniform_int_distribution<Value> modulus(1, max_modulus);
  std::vector<Value> a(dimension);
  for (auto& ai : a) ai = modulus(rng);
  std::vector<SparseEntries> o(dimension);
  for (std::size_t k = 0; k < dimension; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      std::uniform_int_distribution<Value> digit(0, a[j] - 1);
      const Value v = digit(rng);
      if (v != 0) o[k].emplace_back(j + 1, v);
    }
  }
  return SketchParams(std::move(a), std::move(o));
}

LawReport check_module_laws(const ParamsPtr& params, std::uint64_t triples, Value bound, std::mt19937_64& rng) {
  const std::size_t n = params->dimension();
  std::uniform_int_distribution<Value> entry(-bound, bound);
  auto draw = [&] {
    std::vector<Value> v(n);
    for (auto& x : v) x = entry(rng);
    return FrequencyVector::from_dense(v);
  };
  const SketchVector zero(params);
  LawReport r;
  r.triples = triples;
  for (std::uint64_t t = 0; t < triples; ++t) {
    const FrequencyVector x = draw(), y = draw(), z = draw();
    const SketchVector px = phi(params, x), py = phi(params, y), pz = phi(params, z);
    r.idempotence += !(phi(params, px.as_frequency()) == px);
    r.commutativity += !(star(px, py) == star(py, px));
    r.associativity += !(star(star(px, py), pz) == star(px, star(py, pz)));
    r.identity += !(star(px, zero) == px);
    r.inverse += !star(px, inverse(px)).is_zero();
    r.homomorphism += !(phi(params, x + y) == star(px, py));
  }
  return r;
}

}  // namespace turnlab::sketch
