#include "turnlab/harness.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace turnlab::harness {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t root, std::string_view experiment, std::uint64_t trial) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : experiment) h = (h ^ c) * 0x100000001b3ULL;
  return splitmix64(splitmix64(root ^ splitmix64(h)) + trial);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile needs 0 < p < 1");
  return boost::math::quantile(boost::math::normal(), p);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials == 0) throw std::invalid_argument("Wilson interval needs at least one trial");
  if (successes > trials) throw std::invalid_argument("more successes than trials");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
  const double z = normal_quantile(0.5 + level / 2);
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (phat + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n));
  Interval iv{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) iv.lo = 0.0;
  if (successes == trials) iv.hi = 1.0;
  return iv;
}

Aggregate TrialReport::aggregate() const {
  Aggregate a;
  a.trials = records.size();
  double sum = 0, sq = 0;
  for (const auto& r : records) {
    if (r.correct) {
      ++a.judged;
      a.successes += *r.correct;
    }
    sum += r.value;
    sq += r.value * r.value;
    a.peak_bits = std::max(a.peak_bits, r.peak_bits);
  }
  if (a.trials > 0) {
    a.mean = sum / static_cast<double>(a.trials);
    a.variance = a.trials > 1 ? (sq - a.mean * sum) / static_cast<double>(a.trials - 1) : 0.0;
    if (a.variance < 0) a.variance = 0;
  }
  if (a.judged > 0) {
    a.success_rate = static_cast<double>(a.successes) / static_cast<double>(a.judged);
    a.wilson = wilson_interval(a.successes, a.judged);
  }
  return a;
}

bool TrialReport::all_assertions_pass() const {
  for (const auto& [name, ok] : assertions) {
    if (!ok) return false;
  }
  return true;
}

namespace {

json record_json(const TrialRecord& r) {
  json j = {{"trial", r.trial},       {"seed", r.seed},           {"answer", r.answer},
            {"value", r.value},       {"peak_bits", r.peak_bits}, {"stream_length", r.stream_length}};
  j["truth"] = r.truth ? json(*r.truth) : json(nullptr);
  j["correct"] = r.correct ? json(*r.correct) : json(nullptr);
  j["rel_err"] = r.rel_err ? json(*r.rel_err) : json(nullptr);
  for (const auto& [k, v] : r.extra) j[k] = v;
  return j;
}

}  // namespace

std::string TrialReport::to_json() const {
  const Aggregate a = aggregate();
  json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["metadata"] = metadata;
  j["records"] = json::array();
  for (const auto& r : records) j["records"].push_back(record_json(r));
  j["aggregate"] = {{"trials", a.trials},
                    {"judged", a.judged},
                    {"successes", a.successes},
                    {"success_rate", a.success_rate},
                    {"wilson95", {a.wilson.lo, a.wilson.hi}},
                    {"mean", a.mean},
                    {"variance", a.variance},
                    {"peak_bits", a.peak_bits}};
  j["assertions"] = assertions;
  j["pass"] = all_assertions_pass();
  return j.dump(2) + "\n";
}

std::string TrialReport::to_csv() const {
  std::ostringstream out;
  out << "experiment,seed,trial,trial_seed,answer,value,truth,correct,rel_err,peak_bits,stream_length\n";
  auto opt = [&](const auto& o) {
    std::ostringstream s;
    if (o) s << *o;
    return s.str();
  };
  for (const auto& r : records) {
    out << experiment << ',' << seed << ',' << r.trial << ',' << r.seed << ',' << r.answer << ',' << r.value << ','
        << opt(r.truth) << ',' << (r.correct ? (*r.correct ? "1" : "0") : "") << ',' << opt(r.rel_err) << ','
        << r.peak_bits << ',' << r.stream_length << '\n';
  }
  return out.str();
}

TrialReport run_experiment(const ExperimentConfig& config, const TrialFn& trial) {
  if (config.experiment.empty()) throw std::invalid_argument("experiment id must not be empty");
  TrialReport report;
  report.experiment = config.experiment;
  report.seed = config.seed;
  report.metadata = config.metadata;
  report.metadata["trials"] = std::to_string(config.trials);
  for (std::uint64_t t = 0; t < config.trials; ++t) {
    const std::uint64_t seed = trial_seed(config.seed, config.experiment, t);
    std::mt19937_64 rng(seed);
    TrialRecord r = trial(t, rng);
    r.trial = t;
    r.seed = seed;
    report.records.push_back(std::move(r));
  }
  return report;
}

Format parse_format(const std::string& name) {
  if (name == "json") return Format::kJson;
  if (name == "csv") return Format::kCsv;
  throw std::invalid_argument("unknown format '" + name + "' (expected json or csv)");
}

void write_report(const TrialReport& report, const std::string& path, Format format) {
  const std::string text = format == Format::kJson ? report.to_json() : report.to_csv();
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

std::string params_to_json(const sketch::SketchParams& params) {
  json o = json::array();
  for (const auto& entries : params.overflows()) {
    json v = json::array();
    for (const auto& [j, value] : entries) v.push_back({j, value});
    o.push_back(v);
  }
  return json{{"n", params.dimension()}, {"a", params.moduli()}, {"o", o}}.dump() + "\n";
}

sketch::SketchParams params_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const auto n = j.at("n").get<std::size_t>();
    auto a = j.at("a").get<std::vector<Value>>();
    if (a.size() != n) throw std::invalid_argument("params: 'a' must have n entries");
    std::vector<sketch::SparseEntries> o(n);
    if (j.contains("o")) {
      const auto& jo = j.at("o");
      if (jo.size() != n) throw std::invalid_argument("params: 'o' must have n entries");
      for (std::size_t i = 0; i < n; ++i) {
        for (const auto& pair : jo[i]) o[i].emplace_back(pair.at(0).get<Coordinate>(), pair.at(1).get<Value>());
      }
    }
    return sketch::SketchParams(std::move(a), std::move(o));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("params JSON: ") + e.what());
  }
}

}  // namespace turnlab::harness
