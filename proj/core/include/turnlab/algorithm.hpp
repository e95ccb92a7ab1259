#pragma once

// Black-box deterministic streaming algorithms: a transition system over
// hashable states with at most 2^s reachable states, plus the small toy
// algorithms used to exercise the compilers.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "turnlab/stream.hpp"

namespace turnlab::reduction {

using State = std::vector<std::int64_t>;
using Answer = std::int64_t;

struct StateHash {
  std::size_t operator()(const State& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ s.size();
    for (auto v : s) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

class DeterministicAlgorithm {
 public:
  virtual ~DeterministicAlgorithm() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  /// s: the algorithm never reaches more than 2^s states.
  virtual int state_bits() const = 0;

  virtual State initial_state() const = 0;
  /// Pure: same (state, update) always gives the same state.
  virtual State transition(const State& state, const Update& update) const = 0;
  virtual Answer output(const State& state) const = 0;

  /// Whether x lies in the promise set (every x for total functions).
  virtual bool in_promise(const FrequencyVector& /*x*/) const { return true; }
  /// The intended answer on a promise input.
  virtual Answer reference(const FrequencyVector& x) const = 0;
  /// (x, answer) in the relation: anything goes off the promise.
  bool accepts(const FrequencyVector& x, Answer answer) const {
    return !in_promise(x) || answer == reference(x);
  }
};

using AlgorithmPtr = std::shared_ptr<const DeterministicAlgorithm>;

struct RunResult {
  State state;
  Answer answer = 0;
  std::uint64_t length = 0;
};

/// Folds transition over the stream from the initial state, then applies output.
RunResult run_on_stream(const DeterministicAlgorithm& alg, const Stream& stream);
/// Same, continuing from a given state.
RunResult run_from(const DeterministicAlgorithm& alg, State state, const Stream& stream);

/// Stores x mod k on every coordinate; answers with the residues packed base k.
AlgorithmPtr make_coordinate_mod(std::size_t n, int k);
/// Keeps sum(x) mod k.
AlgorithmPtr make_sum_mod(std::size_t n, int k);
/// One state; always answers 0.
AlgorithmPtr make_single_state(std::size_t n);
/// n = 2. Tracks x_2 mod 3 and x_1 mod 3, but an update on coordinate 2 wipes
/// the coordinate-1 residue. Answers x_2 mod 3.
AlgorithmPtr make_forgetful();
/// n = 2, s = 8. Residues of both coordinates mod 8 plus a saturating 2-bit
/// count of updates with |delta| >= 8. Answers the parity of x_1 + x_2, which
/// is only guaranteed on the promise x in [0, 6]^2: once the counter is full
/// and a residue reads 7 the answer flips.
AlgorithmPtr make_parity_promise();

/// Toy lookup by name: coord-mod, sum-mod, single-state, forgetful,
/// parity-promise. Throws std::invalid_argument for unknown names.
AlgorithmPtr make_toy(const std::string& name, std::size_t n, int k);
std::vector<std::string> toy_names();

}  // namespace turnlab::reduction
