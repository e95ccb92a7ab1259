#include "turnlab/det_reduction.hpp"

#include <string>
#include <unordered_map>

namespace turnlab::reduction {
namespace {

constexpr int kMaxStateBits = 40;

std::uint64_t state_budget(const DeterministicAlgorithm& alg) {
  const int s = alg.state_bits();
  if (s < 0 || s > kMaxStateBits) {
    throw std::invalid_argument("state_bits must lie in [0, " + std::to_string(kMaxStateBits) + "]");
  }
  return std::uint64_t{1} << s;
}

FrequencyVector vector_at(const std::vector<Value>& moduli, std::size_t n, std::uint64_t j) {
  LittleEndianCounter counter(moduli, n);
  for (std::uint64_t t = 0; t < j; ++t) counter.advance();
  return counter.current_vector();
}

struct Collision {
  std::uint64_t first = 0;
  std::uint64_t second = 0;
};

[[noreturn]] void budget_exceeded(const DeterministicAlgorithm& alg, Coordinate i) {
  throw StateBudgetError(alg.name() + ": more than 2^" + std::to_string(alg.state_bits()) +
                         " distinct states while fixing coordinate " + std::to_string(i));
}

// Total mode: the state for x_j is A(kappa(x_j)), computed from scratch.
class CanonicalEvaluator {
 public:
  CanonicalEvaluator(const DeterministicAlgorithm& alg, std::uint64_t& transitions)
      : alg_(alg), transitions_(transitions) {}

  State operator()(const std::vector<Value>& x) const {
    State state = alg_.initial_state();
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k] == 0) continue;
      state = alg_.transition(state, {k + 1, x[k]});
      ++transitions_;
    }
    return state;
  }

 private:
  const DeterministicAlgorithm& alg_;
  std::uint64_t& transitions_;
};

Collision total_collision(const DeterministicAlgorithm& alg, const std::vector<Value>& moduli, Coordinate i,
                          CollisionSearch search, std::uint64_t& transitions) {
  const std::size_t n = alg.dimension();
  const std::uint64_t budget = state_budget(alg);
  CanonicalEvaluator eval(alg, transitions);

  if (search == CollisionSearch::kHashMap) {
    std::unordered_map<State, std::uint64_t, StateHash> seen;
    LittleEndianCounter counter(moduli, n);
    for (std::uint64_t j = 0; j <= budget; ++j) {
      if (j > 0) counter.advance();
      auto [it, inserted] = seen.try_emplace(eval(counter.current()), j);
      if (!inserted) return {it->second, j};
    }
    budget_exceeded(alg, i);
  }

  LittleEndianCounter second(moduli, n);
  for (std::uint64_t j = 1; j <= budget; ++j) {
    second.advance();
    const State target = eval(second.current());
    LittleEndianCounter first(moduli, n);
    for (std::uint64_t jp = 0; jp < j; ++jp) {
      if (jp > 0) first.advance();
      if (eval(first.current()) == target) return {jp, j};
    }
  }
  budget_exceeded(alg, i);
}

struct CoveringCollision {
  Collision at;
  State state;
  /// Updates from the start of the covering segment up to x_first and x_second.
  std::uint64_t length_first = 0;
  std::uint64_t length_second = 0;
};

// General mode: the state for x_j is A(pi_{i-1} . tau), advanced incrementally
// from the stored state of pi_{i-1}.
CoveringCollision covering_collision(const DeterministicAlgorithm& alg, const std::vector<Value>& moduli,
                                     Coordinate i, const State& base, CollisionSearch search,
                                     std::uint64_t& transitions) {
  const std::size_t n = alg.dimension();
  const std::uint64_t budget = state_budget(alg);
  auto step = [&](LittleEndianCounter& counter, State& state, std::uint64_t& length) {
    for (const auto& u : counter.advance()) {
      state = alg.transition(state, u);
      ++transitions;
      ++length;
    }
  };

  if (search == CollisionSearch::kHashMap) {
    std::unordered_map<State, std::pair<std::uint64_t, std::uint64_t>, StateHash> seen;
    LittleEndianCounter counter(moduli, n);
    State state = base;
    std::uint64_t length = 0;
    seen.emplace(state, std::pair{std::uint64_t{0}, std::uint64_t{0}});
    for (std::uint64_t j = 1; j <= budget; ++j) {
      step(counter, state, length);
      auto [it, inserted] = seen.try_emplace(state, j, length);
      if (!inserted) return {{it->second.first, j}, state, it->second.second, length};
    }
    budget_exceeded(alg, i);
  }

  LittleEndianCounter second(moduli, n);
  State target = base;
  std::uint64_t length_second = 0;
  for (std::uint64_t j = 1; j <= budget; ++j) {
    step(second, target, length_second);
    LittleEndianCounter first(moduli, n);
    State cursor = base;
    std::uint64_t length_first = 0;
    for (std::uint64_t jp = 0; jp < j; ++jp) {
      if (jp > 0) step(first, cursor, length_first);
      if (cursor == target) return {{jp, j}, target, length_first, length_second};
    }
  }
  budget_exceeded(alg, i);
}

Coordinate largest_positive(const FrequencyVector& diff) {
  for (auto it = diff.entries().rbegin(); it != diff.entries().rend(); ++it) {
    if (it->second > 0) return it->first;
  }
  throw std::logic_error("collision difference has no positive coordinate");
}

FrequencyVector raw_overflow_of(const FrequencyVector& diff, Coordinate i) {
  // o_i = a_i e_i - diff, with a_i = diff_i.
  FrequencyVector o(diff.dimension());
  for (const auto& [k, v] : diff.entries()) {
    if (k < i) o.set(k, -v);
    if (k > i) throw std::logic_error("collision difference supported above its coordinate");
  }
  return o;
}

// Shared skeleton with backtracking. `search` returns the first collision and
// the number of distinct states before it; `accept` learns which coordinate
// the collision fixed.
template <class Search, class Accept>
void run_procedure(const DeterministicAlgorithm& alg, CompilationTrace& trace, std::vector<Value>& a,
                   Search&& search, Accept&& accept) {
  const std::size_t n = alg.dimension();
  Coordinate i = 1;
  while (i <= n) {
    const std::vector<Value> prefix(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(i - 1));
    const auto [collision, distinct] = search(prefix, i);
    CollisionWitness witness;
    witness.j_first = collision.first;
    witness.j_second = collision.second;
    witness.x_first = vector_at(prefix, n, collision.first);
    witness.x_second = vector_at(prefix, n, collision.second);
    witness.distinct_states = distinct;
    const FrequencyVector diff = witness.x_second - witness.x_first;

    Coordinate fixed = i;
    if (diff[i] <= 0) {
      fixed = largest_positive(diff);
      const Value updated = diff[fixed];
      if (updated >= a[fixed - 1]) {
        throw std::logic_error("backtracking did not decrease a_" + std::to_string(fixed));
      }
      trace.backtracks.push_back({i, fixed, a[fixed - 1], updated});
    }
    a[fixed - 1] = diff[fixed];
    trace.raw_overflow[fixed - 1] = raw_overflow_of(diff, fixed);
    trace.witnesses[fixed - 1] = std::move(witness);
    accept(fixed, prefix, collision);
    i = fixed + 1;
  }
}

sketch::ParamsPtr build_params(const std::vector<Value>& a, const std::vector<FrequencyVector>& raw) {
  std::vector<sketch::SparseEntries> o(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (const auto& [j, v] : raw[k].entries()) o[k].emplace_back(j, v);
  }
  return sketch::share(sketch::SketchParams::normalized(a, std::move(o)));
}

Stream phase_stream(std::size_t n, const std::vector<Value>& moduli, std::uint64_t from, std::uint64_t to) {
  return Stream::generated(n, [n, moduli, from, to](const Stream::Sink& sink) {
    LittleEndianCounter counter(moduli, n);
    for (std::uint64_t t = 0; t < from; ++t) counter.advance();
    for (std::uint64_t t = from; t < to; ++t) {
      for (const auto& u : counter.advance()) {
        if (!sink(u)) return false;
      }
    }
    return true;
  });
}

}  // namespace

FrequencyVector CompilationTrace::loop_vector(Coordinate i) const {
  FrequencyVector v = -raw_overflow.at(i - 1);
  v.set(i, params->modulus(i));
  return v;
}

CompilationTrace compile_total(const DeterministicAlgorithm& alg, CollisionSearch search) {
  const std::size_t n = alg.dimension();
  CompilationTrace trace;
  trace.mode = CompileMode::kTotal;
  trace.dimension = n;
  trace.state_bits = alg.state_bits();
  trace.raw_overflow.assign(n, FrequencyVector(n));
  trace.witnesses.resize(n);
  std::vector<Value> a(n, 0);

  run_procedure(
      alg, trace, a,
      [&](const std::vector<Value>& prefix, Coordinate i) {
        const Collision c = total_collision(alg, prefix, i, search, trace.transitions);
        return std::pair{c, c.second};
      },
      [](Coordinate, const std::vector<Value>&, const Collision&) {});
  trace.params = build_params(a, trace.raw_overflow);
  return trace;
}

CompilationTrace compile_general(const DeterministicAlgorithm& alg, CollisionSearch search) {
  const std::size_t n = alg.dimension();
  CompilationTrace trace;
  trace.mode = CompileMode::kGeneral;
  trace.dimension = n;
  trace.state_bits = alg.state_bits();
  trace.raw_overflow.assign(n, FrequencyVector(n));
  trace.witnesses.resize(n);
  trace.prefix_phases.assign(n + 1, 0);
  trace.loops.resize(n);
  std::vector<Value> a(n, 0);

  // State and length after each phase of the current prefix.
  std::vector<State> end_state;
  std::vector<std::uint64_t> end_length;
  CoveringCollision last;

  run_procedure(
      alg, trace, a,
      [&](const std::vector<Value>& prefix, Coordinate i) {
        const std::size_t base = trace.prefix_phases[i - 1];
        trace.phases.resize(base);
        end_state.resize(base);
        end_length.resize(base);
        const State start = base == 0 ? alg.initial_state() : end_state.back();
        const std::uint64_t offset = base == 0 ? 0 : end_length.back();
        last = covering_collision(alg, prefix, i, start, search, trace.transitions);
        trace.max_stream_length = std::max(trace.max_stream_length, offset + last.length_second);
        return std::pair{last.at, last.at.second};
      },
      [&](Coordinate fixed, const std::vector<Value>& prefix, const Collision& c) {
        const std::uint64_t offset = end_length.empty() ? 0 : end_length.back();
        trace.phases.push_back({prefix, c.first});
        end_state.push_back(last.state);
        end_length.push_back(offset + last.length_first);
        trace.prefix_phases[fixed] = trace.phases.size();
        trace.loops[fixed - 1] = {prefix, c.first, c.second};
      });
  trace.params = build_params(a, trace.raw_overflow);
  return trace;
}

Stream prefix_stream(const CompilationTrace& trace, std::size_t i) {
  if (trace.mode != CompileMode::kGeneral) throw std::invalid_argument("prefixes exist only in general mode");
  Stream out(trace.dimension);
  for (std::size_t k = 0; k < trace.prefix_phases.at(i); ++k) {
    const auto& phase = trace.phases[k];
    out = concat(out, phase_stream(trace.dimension, phase.moduli, 0, phase.steps));
  }
  return out;
}

Stream loop_stream(const CompilationTrace& trace, Coordinate i) {
  if (trace.mode != CompileMode::kGeneral) throw std::invalid_argument("loops exist only in general mode");
  const auto& loop = trace.loops.at(i - 1);
  return phase_stream(trace.dimension, loop.moduli, loop.start, loop.end);
}

Answer recover_total(const CompilationTrace& trace, const DeterministicAlgorithm& alg,
                     const sketch::SketchVector& sketch) {
  if (trace.mode != CompileMode::kTotal) throw std::invalid_argument("trace was not compiled in total mode");
  return run_on_stream(alg, kappa(sketch.as_frequency())).answer;
}

Stream recovery_stream(const CompilationTrace& trace, const sketch::SketchVector& sketch) {
  if (trace.mode != CompileMode::kGeneral) throw std::invalid_argument("trace was not compiled in general mode");
  const Stream pi = prefix_stream(trace, trace.dimension);
  Stream out = concat(pi, negate(pi));
  const std::uint64_t repeats = std::uint64_t{1} << trace.state_bits;
  for (Coordinate i = 1; i <= trace.dimension; ++i) {
    out = concat(out, kappa(-trace.loop_vector(i)).repeated(repeats));
  }
  return concat(out, kappa(sketch.as_frequency()));
}

Answer recover_general(const CompilationTrace& trace, const DeterministicAlgorithm& alg,
                       const sketch::SketchVector& sketch) {
  return run_on_stream(alg, recovery_stream(trace, sketch)).answer;
}

LoopRecurrence loop_recurrence(const DeterministicAlgorithm& alg, const Stream& alpha, const Stream& beta) {
  const std::uint64_t budget = state_budget(alg);
  LoopRecurrence result;
  std::unordered_map<State, std::uint64_t, StateHash> first_seen;
  State state = run_on_stream(alg, alpha).state;
  State at_budget;
  bool have_cycle = false;
  for (std::uint64_t l = 0;; ++l) {
    if (!have_cycle) {
      auto [it, inserted] = first_seen.try_emplace(state, l);
      if (!inserted) {
        result.preperiod = it->second;
        result.period = l - it->second;
        have_cycle = true;
      }
    }
    if (l == budget) at_budget = state;
    if (l > budget && state == at_budget) {
      result.revisit = l;
      break;
    }
    if (l > 4 * budget + 4) throw std::logic_error("state sequence never returned to A(alpha . beta^{2^s})");
    state = run_from(alg, std::move(state), beta).state;
  }
  return result;
}

}  // namespace turnlab::reduction
