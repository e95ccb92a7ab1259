#pragma once

// Seeded trial loops, Wilson intervals and JSON/CSV trial reports.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "turnlab/module_sketch.hpp"

namespace turnlab::harness {

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of one trial, a pure function of (root, experiment, trial), so trials
/// can run in any order.
std::uint64_t trial_seed(std::uint64_t root, std::string_view experiment, std::uint64_t trial);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Two-sided standard normal quantile.
double normal_quantile(double p);

/// Wilson score interval at confidence `level`. Throws on trials == 0 or
/// successes > trials.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level = 0.95);

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  /// Answer as text ("0", "1", "bottom", or a number).
  std::string answer;
  double value = 0.0;
  std::optional<double> truth;
  std::optional<bool> correct;
  std::optional<double> rel_err;
  std::uint64_t peak_bits = 0;
  std::uint64_t stream_length = 0;
  /// Experiment-specific numeric fields, added to the JSON record only.
  std::map<std::string, double> extra;
};

struct Aggregate {
  std::uint64_t trials = 0;
  /// Records with a correctness verdict, and how many were correct.
  std::uint64_t judged = 0;
  std::uint64_t successes = 0;
  double success_rate = 0.0;
  Interval wilson;
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t peak_bits = 0;
};

struct TrialReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> metadata;
  std::vector<TrialRecord> records;
  /// Named pass/fail checks, filled in by the caller.
  std::map<std::string, bool> assertions;

  Aggregate aggregate() const;
  bool all_assertions_pass() const;
  std::string to_json() const;
  std::string to_csv() const;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::map<std::string, std::string> metadata;
};

using TrialFn = std::function<TrialRecord(std::uint64_t trial, std::mt19937_64& rng)>;

/// Runs config.trials trials; trial t gets an mt19937_64 seeded with
/// trial_seed(seed, experiment, t). The function fills everything but the
/// trial index and seed.
TrialReport run_experiment(const ExperimentConfig& config, const TrialFn& trial);

enum class Format { kJson, kCsv };
Format parse_format(const std::string& name);
/// Writes to `path`, or stdout when path is empty or "-".
void write_report(const TrialReport& report, const std::string& path, Format format);

/// {"n": n, "a": [...], "o": [[[j, v], ...], ...]}
std::string params_to_json(const sketch::SketchParams& params);
sketch::SketchParams params_from_json(const std::string& text);

}  // namespace turnlab::harness
