#pragma once

// Independent reference for phi: the confluent rewriting system that, one
// step at a time, subtracts a_i e_i - o_i from a coordinate above its range or
// adds it to a coordinate below zero. It never divides, and it does not share
// code with turnlab::sketch.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "turnlab/module_sketch.hpp"

namespace turnlab::testing {

enum class RewriteOrder { kSmallestFirst, kLargestFirst, kRandom };

struct RewriteStats {
  std::uint64_t steps = 0;
  /// Set if a subtracting step at index i ever increased some z_j, j >= i.
  bool monotonicity_violated = false;
};

inline std::vector<Value> rewrite_to_normal_form(const sketch::SketchParams& params, std::vector<Value> z,
                                                 RewriteOrder order, RewriteStats* stats = nullptr,
                                                 std::uint64_t max_steps = 50'000'000,
                                                 std::uint64_t seed = 0) {
  const std::size_t n = params.dimension();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> violating;
  for (std::uint64_t step = 0;; ++step) {
    violating.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (z[k] < 0 || z[k] >= params.moduli()[k]) violating.push_back(k);
    }
    if (violating.empty()) return z;
    if (step >= max_steps) throw std::runtime_error("rewrite oracle did not terminate");

    std::size_t k = 0;
    switch (order) {
      case RewriteOrder::kSmallestFirst:
        k = violating.front();
        break;
      case RewriteOrder::kLargestFirst:
        k = violating.back();
        break;
      case RewriteOrder::kRandom:
        k = violating[std::uniform_int_distribution<std::size_t>(0, violating.size() - 1)(rng)];
        break;
    }
    const Value sign = z[k] < 0 ? -1 : 1;
    const std::vector<Value> before = stats ? z : std::vector<Value>{};
    z[k] -= sign * params.moduli()[k];
    for (const auto& [j, v] : params.overflow(k + 1)) z[j - 1] += sign * v;
    if (stats) {
      ++stats->steps;
      // Termination argument for the subtracting step: nothing at or above
      // the chosen index grows.
      if (order == RewriteOrder::kSmallestFirst && sign > 0) {
        for (std::size_t j = k; j < n; ++j) {
          if (z[j] > before[j]) stats->monotonicity_violated = true;
        }
      }
    }
  }
}

}  // namespace turnlab::testing
