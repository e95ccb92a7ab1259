#include "turnlab/algorithm.hpp"

#include <stdexcept>

namespace turnlab::reduction {
namespace {

void check_update(std::size_t n, const Update& u) {
  if (u.index == 0 || u.index > n) throw std::out_of_range("update index outside the algorithm dimension");
}

class CoordinateMod final : public DeterministicAlgorithm {
 public:
  CoordinateMod(std::size_t n, int k) : n_(n), k_(k) {
    if (n == 0 || k < 1) throw std::invalid_argument("coord-mod needs n >= 1 and k >= 1");
  }
  std::string name() const override { return "coord-mod"; }
  std::size_t dimension() const override { return n_; }
  int state_bits() const override { return static_cast<int>(n_) * ceil_log2(static_cast<std::uint64_t>(k_)); }
  State initial_state() const override { return State(n_, 0); }
  State transition(const State& state, const Update& u) const override {
    check_update(n_, u);
    State next = state;
    next[u.index - 1] = floor_mod(next[u.index - 1] + floor_mod(u.delta, k_), k_);
    return next;
  }
  Answer output(const State& state) const override {
    Answer packed = 0;
    for (auto it = state.rbegin(); it != state.rend(); ++it) packed = packed * k_ + *it;
    return packed;
  }
  Answer reference(const FrequencyVector& x) const override {
    Answer packed = 0;
    for (Coordinate i = n_; i >= 1; --i) packed = packed * k_ + floor_mod(x[i], k_);
    return packed;
  }

 private:
  std::size_t n_;
  int k_;
};

class SumMod final : public DeterministicAlgorithm {
 public:
  SumMod(std::size_t n, int k) : n_(n), k_(k) {
    if (n == 0 || k < 1) throw std::invalid_argument("sum-mod needs n >= 1 and k >= 1");
  }
  std::string name() const override { return "sum-mod"; }
  std::size_t dimension() const override { return n_; }
  int state_bits() const override { return ceil_log2(static_cast<std::uint64_t>(k_)); }
  State initial_state() const override { return {0}; }
  State transition(const State& state, const Update& u) const override {
    check_update(n_, u);
    return {floor_mod(state[0] + floor_mod(u.delta, k_), k_)};
  }
  Answer output(const State& state) const override { return state[0]; }
  Answer reference(const FrequencyVector& x) const override {
    Value sum = 0;
    for (const auto& [i, v] : x.entries()) sum = floor_mod(sum + floor_mod(v, k_), k_);
    return sum;
  }

 private:
  std::size_t n_;
  int k_;
};

class SingleState final : public DeterministicAlgorithm {
 public:
  explicit SingleState(std::size_t n) : n_(n) {}
  std::string name() const override { return "single-state"; }
  std::size_t dimension() const override { return n_; }
  int state_bits() const override { return 0; }
  State initial_state() const override { return {}; }
  State transition(const State& state, const Update& u) const override {
    check_update(n_, u);
    return state;
  }
  Answer output(const State&) const override { return 0; }
  Answer reference(const FrequencyVector&) const override { return 0; }

 private:
  std::size_t n_;
};

class Forgetful final : public DeterministicAlgorithm {
 public:
  std::string name() const override { return "forgetful"; }
  std::size_t dimension() const override { return 2; }
  int state_bits() const override { return 4; }
  State initial_state() const override { return {0, 0}; }
  State transition(const State& state, const Update& u) const override {
    check_update(2, u);
    State next = state;
    if (u.index == 2) {
      next[1] = floor_mod(next[1] + floor_mod(u.delta, 3), 3);
      next[0] = 0;
    } else {
      next[0] = floor_mod(next[0] + floor_mod(u.delta, 3), 3);
    }
    return next;
  }
  Answer output(const State& state) const override { return state[1]; }
  Answer reference(const FrequencyVector& x) const override { return floor_mod(x[2], 3); }
};

class ParityPromise final : public DeterministicAlgorithm {
 public:
  std::string name() const override { return "parity-promise"; }
  std::size_t dimension() const override { return 2; }
  int state_bits() const override { return 8; }
  State initial_state() const override { return {0, 0, 0}; }
  State transition(const State& state, const Update& u) const override {
    check_update(2, u);
    State next = state;
    next[u.index - 1] = floor_mod(next[u.index - 1] + floor_mod(u.delta, 8), 8);
    if ((u.delta >= 8 || u.delta <= -8) && next[2] < 3) ++next[2];
    return next;
  }
  Answer output(const State& state) const override {
    const Answer parity = (state[0] + state[1]) % 2;
    if (state[2] >= 2 && (state[0] == 7 || state[1] == 7)) return 1 - parity;
    return parity;
  }
  bool in_promise(const FrequencyVector& x) const override {
    for (Coordinate i = 1; i <= 2; ++i) {
      if (x[i] < 0 || x[i] > 6) return false;
    }
    return true;
  }
  Answer reference(const FrequencyVector& x) const override { return floor_mod(x[1] + x[2], 2); }
};

}  // namespace

RunResult run_from(const DeterministicAlgorithm& alg, State state, const Stream& stream) {
  RunResult result;
  result.state = std::move(state);
  stream.for_each([&](const Update& u) {
    result.state = alg.transition(result.state, u);
    ++result.length;
    return true;
  });
  result.answer = alg.output(result.state);
  return result;
}

RunResult run_on_stream(const DeterministicAlgorithm& alg, const Stream& stream) {
  return run_from(alg, alg.initial_state(), stream);
}

AlgorithmPtr make_coordinate_mod(std::size_t n, int k) { return std::make_shared<CoordinateMod>(n, k); }
AlgorithmPtr make_sum_mod(std::size_t n, int k) { return std::make_shared<SumMod>(n, k); }
AlgorithmPtr make_single_state(std::size_t n) { return std::make_shared<SingleState>(n); }
AlgorithmPtr make_forgetful() { return std::make_shared<Forgetful>(); }
AlgorithmPtr make_parity_promise() { return std::make_shared<ParityPromise>(); }

AlgorithmPtr make_toy(const std::string& name, std::size_t n, int k) {
  if (name == "coord-mod") return make_coordinate_mod(n, k);
  if (name == "sum-mod") return make_sum_mod(n, k);
  if (name == "single-state") return make_single_state(n);
  if (name == "forgetful") return make_forgetful();
  if (name == "parity-promise") return make_parity_promise();
  throw std::invalid_argument("unknown toy algorithm '" + name + "'");
}

std::vector<std::string> toy_names() {
  return {"coord-mod", "sum-mod", "single-state", "forgetful", "parity-promise"};
}

}  // namespace turnlab::reduction
