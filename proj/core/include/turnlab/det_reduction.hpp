#pragma once

// Compilers from a deterministic turnstile algorithm to module sketch
// parameters, and the matching recovery procedures.
//
// Total mode runs the algorithm on kappa(x_j) for the little-endian
// enumeration x_0, x_1, ... of prod_{k<i} Z_{a_k} x N x {0}^{n-i} and takes the
// first repeated state. General mode looks for the repeat along one covering
// stream that extends the previous prefix pi_{i-1}, and keeps the prefixes and
// loops so the recovery stream
//
//   pi_n . negate(pi_n) . kappa(o_1 - a_1 e_1)^{2^s} ... kappa(o_n - a_n e_n)^{2^s} . kappa(phi(x))
//
// can be replayed lazily.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "turnlab/algorithm.hpp"
#include "turnlab/module_sketch.hpp"

namespace turnlab::reduction {

/// The algorithm showed more than 2^s distinct states before any repeat.
class StateBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CompileMode { kTotal, kGeneral };

enum class CollisionSearch {
  /// state -> j map: O(2^s) states in memory.
  kHashMap,
  /// Two cursors replaying the enumeration: O(1) states, O(j^2) transitions.
  kTwoCursor,
};

/// Final collision that fixed (a_i, o_i).
struct CollisionWitness {
  std::uint64_t j_first = 0;
  std::uint64_t j_second = 0;
  FrequencyVector x_first;
  FrequencyVector x_second;
  /// Distinct states seen before the repeat (j_second of them).
  std::uint64_t distinct_states = 0;
};

struct BacktrackEvent {
  Coordinate at = 0;
  Coordinate rolled_back_to = 0;
  Value old_modulus = 0;
  Value new_modulus = 0;
};

/// One stretch of covering stream: `steps` advances of the little-endian
/// counter over `moduli` (free coordinate moduli.size() + 1), from zero.
struct Phase {
  std::vector<Value> moduli;
  std::uint64_t steps = 0;
};

/// The loop rho_i: counter advances start+1 .. end of the enumeration with
/// the given moduli prefix, i.e. kappa(x_{start+1} - x_start) ... kappa(x_end - x_{end-1}).
struct LoopSegment {
  std::vector<Value> moduli;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
};

struct CompilationTrace {
  CompileMode mode = CompileMode::kTotal;
  std::size_t dimension = 0;
  int state_bits = 0;
  /// Normalized parameters: o_i reduced into prod_{j<i} Z_{a_j}.
  sketch::ParamsPtr params;
  /// o_i exactly as found: a_i e_i - (x_second - x_first), may be negative.
  std::vector<FrequencyVector> raw_overflow;
  std::vector<CollisionWitness> witnesses;
  std::vector<BacktrackEvent> backtracks;

  // General mode only.
  /// pi_n as a list of phases; pi_i is the first prefix_phases[i] of them.
  std::vector<Phase> phases;
  std::vector<std::size_t> prefix_phases;
  std::vector<LoopSegment> loops;
  /// Longest covering stream fed to the algorithm.
  std::uint64_t max_stream_length = 0;
  /// Algorithm transitions spent by the compiler.
  std::uint64_t transitions = 0;

  /// a_i e_i - o_i^raw, the frequency of the i-th loop (1-based i).
  FrequencyVector loop_vector(Coordinate i) const;
};

CompilationTrace compile_total(const DeterministicAlgorithm& alg,
                               CollisionSearch search = CollisionSearch::kHashMap);
CompilationTrace compile_general(const DeterministicAlgorithm& alg,
                                 CollisionSearch search = CollisionSearch::kHashMap);

/// pi_i for i in [0, n], generated lazily.
Stream prefix_stream(const CompilationTrace& trace, std::size_t i);
/// rho_i for i in [1, n].
Stream loop_stream(const CompilationTrace& trace, Coordinate i);

/// Runs the algorithm on kappa(sketch).
Answer recover_total(const CompilationTrace& trace, const DeterministicAlgorithm& alg,
                     const sketch::SketchVector& sketch);

/// The full recovery stream for a sketch (lazy).
Stream recovery_stream(const CompilationTrace& trace, const sketch::SketchVector& sketch);
Answer recover_general(const CompilationTrace& trace, const DeterministicAlgorithm& alg,
                       const sketch::SketchVector& sketch);

struct LoopRecurrence {
  /// q_l = A(alpha . beta^l) is periodic from l = preperiod on, with this period.
  std::uint64_t preperiod = 0;
  std::uint64_t period = 0;
  /// Smallest l > 2^s with q_l = q_{2^s}.
  std::uint64_t revisit = 0;
};

/// Simulates q_l directly; needs s small enough that 2^s + period steps are cheap.
LoopRecurrence loop_recurrence(const DeterministicAlgorithm& alg, const Stream& alpha, const Stream& beta);

}  // namespace turnlab::reduction
