#pragma once

// Exhaustive check of the box decoding rule on single-coordinate streams.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "turnlab/promise.hpp"

namespace oracle {

struct DecodingTally {
  std::uint64_t streams = 0;
  std::uint64_t splits = 0;
  std::uint64_t implication_failures = 0;
  std::uint64_t iff_failures = 0;
  std::uint64_t decision_failures = 0;
};

// Every stream of length <= max_len with deltas in [-max_delta, max_delta]
// whose prefixes stay in [-(2M-1), 2M-1] and whose final value is +-M.
inline DecodingTally check_decoding_lemma(std::int64_t M, int max_len, std::int64_t max_delta) {
  DecodingTally tally;
  const std::int64_t bound = 2 * M - 1;
  std::vector<std::int64_t> values{0};  // prefix values, values[t] after t updates

  auto check = [&] {
    const std::int64_t final_value = values.back();
    if (final_value != M && final_value != -M) return;
    ++tally.streams;
    const int eta_final = final_value == M ? 1 : 0;
    const std::int64_t zeta_final = final_value > 0 ? M : -M;
    const auto len = static_cast<int>(values.size()) - 1;
    for (int split = 0; split <= len; ++split) {
      ++tally.splits;
      std::int64_t lo = 0, hi = 0;
      bool zeta_differs = false;
      for (int t = split; t <= len; ++t) {
        const std::int64_t rel = values[t] - values[split];
        lo = std::min(lo, rel);
        hi = std::max(hi, rel);
        const std::int64_t z = values[t] > 0 ? M : (values[t] < 0 ? -M : 0);
        if (z != zeta_final) zeta_differs = true;
      }
      const std::int64_t cur = final_value - values[split];
      const bool first = lo <= cur - M;
      const bool second = hi >= cur + M;
      if ((first && eta_final != 1) || (second && eta_final != 0)) ++tally.implication_failures;
      if ((first || second) != zeta_differs) ++tally.iff_failures;
      const auto decided = turnlab::promise::box_bit_decision(cur, lo, hi, M);
      const std::optional<int> expected = (first || second) ? std::optional<int>(eta_final) : std::nullopt;
      if (decided != expected) ++tally.decision_failures;
    }
  };

  std::function<void()> extend = [&] {
    check();
    if (static_cast<int>(values.size()) - 1 == max_len) return;
    for (std::int64_t d = -max_delta; d <= max_delta; ++d) {
      const std::int64_t next = values.back() + d;
      if (next < -bound || next > bound) continue;
      values.push_back(next);
      extend();
      values.pop_back();
    }
  };
  extend();
  return tally;
}

}  // namespace oracle
