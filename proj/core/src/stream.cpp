#include "turnlab/stream.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace turnlab {

FrequencyVector FrequencyVector::from_dense(std::span<const Value> dense) {
  FrequencyVector x(dense.size());
  for (std::size_t k = 0; k < dense.size(); ++k) {
    if (dense[k] != 0) x.entries_.emplace(k + 1, dense[k]);
  }
  return x;
}

void FrequencyVector::check_index(Coordinate i) const {
  if (i == 0 || i > dimension_) {
    throw std::out_of_range("coordinate " + std::to_string(i) + " outside [1, " +
                            std::to_string(dimension_) + "]");
  }
}

Value FrequencyVector::operator[](Coordinate i) const {
  check_index(i);
  auto it = entries_.find(i);
  return it == entries_.end() ? 0 : it->second;
}

void FrequencyVector::add(Coordinate i, Value delta) {
  check_index(i);
  if (delta == 0) return;
  auto [it, inserted] = entries_.try_emplace(i, delta);
  if (!inserted) {
    it->second = checked_add(it->second, delta);
    if (it->second == 0) entries_.erase(it);
  }
}

void FrequencyVector::set(Coordinate i, Value value) {
  check_index(i);
  if (value == 0) {
    entries_.erase(i);
  } else {
    entries_[i] = value;
  }
}

Value FrequencyVector::max_abs() const {
  Value best = 0;
  for (const auto& [i, v] : entries_) best = std::max(best, v < 0 ? checked_sub(0, v) : v);
  return best;
}

std::vector<Value> FrequencyVector::dense() const {
  std::vector<Value> out(dimension_, 0);
  for (const auto& [i, v] : entries_) out[i - 1] = v;
  return out;
}

FrequencyVector& FrequencyVector::operator+=(const FrequencyVector& other) {
  if (other.dimension_ != dimension_) throw std::invalid_argument("dimension mismatch");
  for (const auto& [i, v] : other.entries_) add(i, v);
  return *this;
}

FrequencyVector& FrequencyVector::operator-=(const FrequencyVector& other) {
  if (other.dimension_ != dimension_) throw std::invalid_argument("dimension mismatch");
  for (const auto& [i, v] : other.entries_) add(i, checked_sub(0, v));
  return *this;
}

FrequencyVector FrequencyVector::operator-() const { return scaled(-1); }

FrequencyVector FrequencyVector::scaled(Value k) const {
  FrequencyVector out(dimension_);
  if (k == 0) return out;
  for (const auto& [i, v] : entries_) out.entries_.emplace(i, checked_mul(v, k));
  return out;
}

Stream::Stream(std::size_t dimension, std::vector<Update> updates)
    : dimension_(dimension),
      updates_(std::make_shared<const std::vector<Update>>(std::move(updates))),
      length_(updates_->size()) {
  for (const auto& u : *updates_) {
    if (u.index == 0 || u.index > dimension_) {
      throw std::out_of_range("update index " + std::to_string(u.index) + " outside [1, " +
                              std::to_string(dimension_) + "]");
    }
  }
}

Stream Stream::generated(std::size_t dimension, Producer producer,
                         std::optional<std::uint64_t> length) {
  Stream s(dimension);
  s.producer_ = std::move(producer);
  s.length_ = length;
  return s;
}

bool Stream::for_each(const Sink& sink) const {
  if (producer_) return producer_(sink);
  if (!updates_) return true;
  for (const auto& u : *updates_) {
    if (!sink(u)) return false;
  }
  return true;
}

std::uint64_t Stream::length() const {
  if (length_) return *length_;
  std::uint64_t count = 0;
  for_each([&](const Update&) {
    ++count;
    return true;
  });
  return count;
}

Stream Stream::prefix(std::uint64_t t) const {
  if (length_ && t > *length_) throw std::out_of_range("prefix longer than stream");
  if (updates_ && !producer_) {
    return Stream(dimension_, std::vector<Update>(updates_->begin(), updates_->begin() + t));
  }
  Stream base = *this;
  return generated(
      dimension_,
      [base, t](const Sink& sink) {
        std::uint64_t seen = 0;
        if (t == 0) return true;
        return base.for_each([&](const Update& u) {
                 if (!sink(u)) return false;
                 return ++seen < t;
               }) ||
               seen == t;
      },
      t);
}

Stream Stream::repeated(std::uint64_t times) const {
  Stream base = *this;
  std::optional<std::uint64_t> len;
  if (length_) len = checked_mul(static_cast<Value>(*length_), static_cast<Value>(times));
  return generated(
      dimension_,
      [base, times](const Sink& sink) {
        for (std::uint64_t r = 0; r < times; ++r) {
          if (!base.for_each(sink)) return false;
        }
        return true;
      },
      len);
}

std::vector<Update> Stream::materialize() const {
  if (updates_ && !producer_) return *updates_;
  std::vector<Update> out;
  if (length_) out.reserve(*length_);
  for_each([&](const Update& u) {
    out.push_back(u);
    return true;
  });
  return out;
}

FrequencyVector freq(const Stream& stream, std::optional<std::uint64_t> t) {
  FrequencyVector x(stream.dimension());
  const std::uint64_t limit = t.value_or(UINT64_MAX);
  std::uint64_t seen = 0;
  if (limit > 0) {
    stream.for_each([&](const Update& u) {
      x.add(u.index, u.delta);
      return ++seen < limit;
    });
  }
  if (t && seen < *t) throw std::out_of_range("time exceeds stream length");
  return x;
}

Stream kappa(const FrequencyVector& x) {
  std::vector<Update> updates;
  updates.reserve(x.support_size());
  for (const auto& [i, v] : x.entries()) updates.push_back({i, v});
  return Stream(x.dimension(), std::move(updates));
}

Stream negate(const Stream& stream) {
  if (stream.is_materialized()) {
    auto updates = stream.materialize();
    for (auto& u : updates) u.delta = checked_sub(0, u.delta);
    return Stream(stream.dimension(), std::move(updates));
  }
  return Stream::generated(
      stream.dimension(),
      [stream](const Stream::Sink& sink) {
        return stream.for_each([&](const Update& u) { return sink({u.index, checked_sub(0, u.delta)}); });
      },
      std::nullopt);
}

Stream concat(const Stream& first, const Stream& second) {
  if (first.dimension() != second.dimension()) {
    throw std::invalid_argument("cannot concatenate streams of dimension " +
                                std::to_string(first.dimension()) + " and " +
                                std::to_string(second.dimension()));
  }
  if (first.is_materialized() && second.is_materialized()) {
    auto updates = first.materialize();
    auto tail = second.materialize();
    updates.insert(updates.end(), tail.begin(), tail.end());
    return Stream(first.dimension(), std::move(updates));
  }
  return Stream::generated(first.dimension(), [first, second](const Stream::Sink& sink) {
    return first.for_each(sink) && second.for_each(sink);
  });
}

bool has_zero_delta(const Stream& stream) {
  bool found = false;
  stream.for_each([&](const Update& u) {
    found = u.delta == 0;
    return !found;
  });
  return found;
}

ConstraintReport check_constraint(const Stream& stream, const StreamConstraint& constraint) {
  ConstraintReport report;
  std::unordered_map<Coordinate, Value> state;
  std::uint64_t t = 0;
  stream.for_each([&](const Update& u) {
    ++t;
    bool ok = true;
    if (constraint.kind == StreamConstraint::Kind::kLength) {
      ok = t <= static_cast<std::uint64_t>(constraint.parameter);
    } else {
      Value& v = state[u.index];
      v = checked_add(v, u.delta);
      switch (constraint.kind) {
        case StreamConstraint::Kind::kBinary:
          ok = v == 0 || v == 1;
          break;
        case StreamConstraint::Kind::kBox:
          ok = v <= constraint.parameter && -v <= constraint.parameter;
          break;
        case StreamConstraint::Kind::kStrictTurnstile:
          ok = v >= 0;
          break;
        case StreamConstraint::Kind::kLength:
          break;
      }
    }
    if (!ok) {
      report.satisfied = false;
      report.first_violation = t;
    }
    return ok;
  });
  return report;
}

LittleEndianCounter::LittleEndianCounter(std::vector<Value> moduli_prefix, std::size_t dimension)
    : moduli_(std::move(moduli_prefix)), current_(dimension, 0) {
  if (moduli_.size() + 1 > dimension) {
    throw std::invalid_argument("free coordinate beyond the dimension");
  }
  for (Value a : moduli_) {
    if (a < 1) throw std::invalid_argument("moduli must be positive");
  }
}

const std::vector<Update>& LittleEndianCounter::advance() {
  step_.clear();
  std::size_t k = 0;
  while (k < moduli_.size() && current_[k] + 1 == moduli_[k]) {
    if (current_[k] != 0) step_.push_back({k + 1, -current_[k]});
    current_[k] = 0;
    ++k;
  }
  current_[k] = checked_add(current_[k], 1);
  step_.push_back({k + 1, 1});
  ++position_;
  return step_;
}

std::vector<FrequencyVector> little_endian_take(const std::vector<Value>& moduli_prefix,
                                                std::size_t dimension, std::size_t count) {
  std::vector<FrequencyVector> out;
  if (count == 0) return out;
  out.reserve(count);
  LittleEndianCounter counter(moduli_prefix, dimension);
  out.push_back(counter.current_vector());
  while (out.size() < count) {
    counter.advance();
    out.push_back(counter.current_vector());
  }
  return out;
}

bool little_endian_less(const FrequencyVector& x, const FrequencyVector& y) {
  if (x.dimension() != y.dimension()) throw std::invalid_argument("dimension mismatch");
  for (Coordinate i = x.dimension(); i >= 1; --i) {
    if (x[i] != y[i]) return x[i] < y[i];
  }
  return false;
}

}  // namespace turnlab
