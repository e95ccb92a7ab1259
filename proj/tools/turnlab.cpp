#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "turnlab/det_reduction.hpp"
#include "turnlab/harness.hpp"
#include "turnlab/promise.hpp"
#include "turnlab/stream_io.hpp"
#include "turnlab/triangle.hpp"

using namespace turnlab;
using nlohmann::json;

namespace {

struct Global {
  std::uint64_t seed = 1;
  std::string out = "-";
  std::string format = "json";
};

void emit_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

// Flat JSON objects as two-column CSV.
void emit_object(const json& j, const Global& g) {
  if (harness::parse_format(g.format) == harness::Format::kJson) {
    emit_text(j.dump(2) + "\n", g.out);
    return;
  }
  std::ostringstream csv;
  csv << "key,value\n";
  for (const auto& [k, v] : j.items()) csv << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  emit_text(csv.str(), g.out);
}

int finish(const harness::TrialReport& report, const Global& g) {
  harness::write_report(report, g.out, harness::parse_format(g.format));
  const auto agg = report.aggregate();
  std::cerr << report.experiment << ": " << agg.trials << " trials, success " << agg.successes << "/" << agg.judged
            << " (wilson95 [" << agg.wilson.lo << ", " << agg.wilson.hi << "]), "
            << (report.all_assertions_pass() ? "PASS" : "FAIL") << "\n";
  return report.all_assertions_pass() ? 0 : 1;
}

// ---- promise-run

struct PromiseOpts {
  std::int64_t n = 4;
  std::string variant = "binary";
  std::int64_t M = 2;
  std::string schedule = "churn";
  int churn = 3;
  int last_player = -1;
  std::uint64_t trials = 100;
  std::size_t copies = 360;
  double min_success = -1;
};

promise::Variant parse_variant(const std::string& v) {
  if (v == "binary") return promise::Variant::kBinary;
  if (v == "pm") return promise::Variant::kPlusMinus;
  throw std::invalid_argument("variant must be binary or pm");
}

promise::Schedule parse_schedule(const std::string& s, int churn, int last_player, std::mt19937_64& rng) {
  if (s == "insert") return promise::Schedule::insert_only();
  if (s == "churn") return promise::Schedule::random_churn(churn);
  if (s == "last") {
    const int p = last_player >= 0 ? last_player : std::uniform_int_distribution<int>(0, 2)(rng);
    return promise::Schedule::last_player_of(p, churn);
  }
  throw std::invalid_argument("schedule must be insert, churn or last");
}

int promise_run(const PromiseOpts& o, const Global& g) {
  const auto variant = parse_variant(o.variant);
  harness::ExperimentConfig cfg{"promise-run", g.seed, o.trials,
                                {{"n", std::to_string(o.n)},
                                 {"variant", o.variant},
                                 {"M", std::to_string(o.M)},
                                 {"schedule", o.schedule},
                                 {"churn", std::to_string(o.churn)},
                                 {"copies", std::to_string(o.copies)}}};
  bool sound = true;
  auto report = harness::run_experiment(cfg, [&](std::uint64_t, std::mt19937_64& rng) {
    const int tau = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
    const auto inst = promise::gen_instance(o.n, tau, rng);
    const auto enc = promise::encode(inst, variant, o.M);
    const auto stream = promise::gen_stream(enc, parse_schedule(o.schedule, o.churn, o.last_player, rng), rng);
    const auto run = promise::amplified_run(stream, {o.n, variant, o.M}, o.copies, rng);
    harness::TrialRecord r;
    const int a = static_cast<int>(run.answer);
    r.answer = a < 0 ? "bottom" : std::to_string(a);
    r.value = a;
    r.truth = tau;
    r.correct = a == tau;
    if (a >= 0 && a != tau) sound = false;
    r.peak_bits = run.peak_copy_bits;
    r.stream_length = run.stream_length;
    r.extra = {{"tau", tau}, {"tracked_bits", static_cast<double>(run.peak_copy_bits)},
               {"answering_copies", static_cast<double>(run.answering_copies)}};
    return r;
  });
  report.assertions["never_wrong"] = sound;
  if (o.min_success >= 0) report.assertions["success_lower_bound"] = report.aggregate().wilson.lo >= o.min_success;
  return finish(report, g);
}

// ---- triangle-count

struct TriangleOpts {
  std::string mode = "maxdeg";
  std::uint32_t n = 3000;
  std::uint32_t d = 4;
  std::uint64_t T = 1500;
  std::uint64_t T_floor = 0;
  std::string eps = "1/2";
  std::uint64_t L = 0;
  std::string p = "auto";
  std::uint64_t trials = 20;
  std::size_t reps = 1;
  double min_success = -1;
};

triangle::Rational auto_p(std::int64_t factor, std::uint32_t d, triangle::Rational eps, std::uint64_t T_floor) {
  const std::int64_t num = checked_mul(checked_mul(factor, d), checked_mul(eps.den, eps.den));
  const std::int64_t den = checked_mul(checked_mul(eps.num, eps.num), static_cast<std::int64_t>(T_floor));
  return num >= den ? triangle::Rational{1, 1} : triangle::make_rational(num, den);
}

int triangle_count(const TriangleOpts& o, const Global& g) {
  using namespace triangle;
  const bool maxdeg = o.mode == "maxdeg";
  if (!maxdeg && o.mode != "boundedl") throw std::invalid_argument("mode must be maxdeg or boundedl");
  const Rational eps = parse_rational(o.eps);
  const std::uint64_t T_floor = o.T_floor ? o.T_floor : o.T;
  if (T_floor == 0) throw std::invalid_argument("need T > 0 or --T-floor");
  const Rational p = o.p == "auto" ? auto_p(maxdeg ? 32 : 16, o.d, eps, T_floor) : parse_rational(o.p);
  harness::ExperimentConfig cfg{"triangle-count", g.seed, o.trials,
                                {{"mode", o.mode},
                                 {"n", std::to_string(o.n)},
                                 {"d", std::to_string(o.d)},
                                 {"T", std::to_string(o.T)},
                                 {"eps", eps.str()},
                                 {"p", p.str()},
                                 {"reps", std::to_string(o.reps)}}};
  bool caps_hold = true;
  auto report = harness::run_experiment(cfg, [&](std::uint64_t, std::mt19937_64& rng) {
    GraphStreamSpec spec{o.n, o.d, o.T,
                         maxdeg ? GraphStreamSpec::Kind::kDegreeChurn : GraphStreamSpec::Kind::kLengthChurn, o.L};
    const auto gs = gen_graph_stream(spec, rng);
    std::uint64_t peak_bits = 0;
    const double estimate = median_amplify(
        [&](std::size_t) {
          Estimate e;
          if (maxdeg) {
            MaxDegConfig c{o.n, o.d, p, gs.peak_edges, true};
            e = maxdeg_estimate(gs.stream, c, rng());
            caps_hold = caps_hold && e.peak_seeds <= c.seed_cap();
          } else {
            BoundedLConfig c{o.n, o.d, p, gs.L, eps, T_floor, true};
            e = boundedl_estimate(gs.stream, c, rng());
            caps_hold = caps_hold && static_cast<double>(e.peak_neighbor_set) <= std::ceil(c.neighbor_cap());
          }
          peak_bits += e.peak_bits;
          return e.value;
        },
        o.reps);
    harness::TrialRecord r;
    r.value = estimate;
    r.answer = std::to_string(estimate);
    r.truth = static_cast<double>(gs.T);
    r.rel_err = gs.T ? std::abs(estimate - static_cast<double>(gs.T)) / static_cast<double>(gs.T) : 0.0;
    r.correct = std::abs(estimate - static_cast<double>(gs.T)) <= eps.value() * static_cast<double>(gs.T);
    r.peak_bits = peak_bits;
    r.stream_length = gs.L;
    r.extra = {{"estimate", estimate}};
    return r;
  });
  report.assertions["caps_hold"] = caps_hold;
  if (o.min_success >= 0) report.assertions["success_lower_bound"] = report.aggregate().wilson.lo >= o.min_success;
  return finish(report, g);
}

// ---- compile-sketch

struct CompileOpts {
  std::string alg = "coord-mod";
  std::size_t n = 2;
  int k = 3;
  int s = -1;
  std::string mode = "total";
  bool small_space = false;
  int grid = -1;
};

int compile_sketch(const CompileOpts& o, const Global& g) {
  using namespace reduction;
  auto alg = make_toy(o.alg, o.n, o.k);
  if (o.s >= 0 && alg->state_bits() > o.s) {
    throw std::invalid_argument(o.alg + " needs s = " + std::to_string(alg->state_bits()) + " > --s " +
                                std::to_string(o.s));
  }
  const int s = o.s >= 0 ? o.s : alg->state_bits();
  const bool general = o.mode == "general";
  if (!general && o.mode != "total") throw std::invalid_argument("mode must be total or general");
  const auto search = o.small_space ? CollisionSearch::kTwoCursor : CollisionSearch::kHashMap;
  const auto trace = general ? compile_general(*alg, search) : compile_total(*alg, search);
  const auto& params = *trace.params;

  const Value top = o.grid >= 0 ? o.grid : (o.alg == "parity-promise" ? 6 : 2 * o.k + 2);
  std::vector<Value> x(alg->dimension(), 0);
  std::uint64_t checked = 0, failures = 0;
  while (true) {
    const auto fx = FrequencyVector::from_dense(x);
    if (alg->in_promise(fx)) {
      const auto sk = sketch::phi(trace.params, fx);
      const Answer a = general ? recover_general(trace, *alg, sk) : recover_total(trace, *alg, sk);
      ++checked;
      failures += !alg->accepts(fx, a);
    }
    std::size_t i = 0;
    while (i < x.size() && x[i] == top) x[i++] = 0;
    if (i == x.size()) break;
    ++x[i];
  }

  const bool size_ok = sketch::product_at_most_pow2(params, s);
  const bool m_ok = params.nontrivial_count() <= static_cast<std::size_t>(s);
  json j = {{"alg", alg->name()},
            {"n", alg->dimension()},
            {"s", s},
            {"mode", o.mode},
            {"collision_search", o.small_space ? "two-cursor" : "hash-map"},
            {"params", json::parse(harness::params_to_json(params))},
            {"m", params.nontrivial_count()},
            {"space_bits", sketch::space_bits(params)},
            {"packed_space_bits", sketch::packed_space_bits(params)},
            {"product_le_2s", size_ok},
            {"m_le_s", m_ok},
            {"backtracks", trace.backtracks.size()},
            {"transitions", trace.transitions},
            {"max_stream_length", trace.max_stream_length},
            {"grid_max", top},
            {"grid_checked", checked},
            {"grid_failures", failures}};
  const bool pass = size_ok && m_ok && failures == 0;
  j["pass"] = pass;
  emit_object(j, g);
  std::cerr << "compile-sketch " << alg->name() << ": " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

// ---- module-check

struct ModuleOpts {
  std::string params_file;
  std::uint64_t random = 10;
  std::size_t n = 4;
  Value amax = 8;
  std::uint64_t triples = 1000;
  Value bound = 50;
};

int module_check(const ModuleOpts& o, const Global& g) {
  std::vector<sketch::SketchParams> all;
  if (!o.params_file.empty()) {
    std::ifstream in(o.params_file);
    if (!in) throw std::runtime_error("cannot open " + o.params_file);
    std::stringstream buf;
    buf << in.rdbuf();
    all.push_back(harness::params_from_json(buf.str()));
  } else {
    std::mt19937_64 rng(harness::trial_seed(g.seed, "module-check-params", 0));
    for (std::uint64_t k = 0; k < o.random; ++k) all.push_back(sketch::random_params(o.n, o.amax, rng));
  }
  json results = json::array();
  std::uint64_t failures = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    std::mt19937_64 rng(harness::trial_seed(g.seed, "module-check", k));
    const auto ptr = sketch::share(all[k]);
    const auto r = sketch::check_module_laws(ptr, o.triples, o.bound, rng);
    failures += r.failures();
    results.push_back({{"params", json::parse(harness::params_to_json(all[k]))},
                       {"triples", r.triples},
                       {"idempotence", r.idempotence},
                       {"commutativity", r.commutativity},
                       {"associativity", r.associativity},
                       {"identity", r.identity},
                       {"inverse", r.inverse},
                       {"homomorphism", r.homomorphism}});
  }
  const bool pass = failures == 0;
  if (harness::parse_format(g.format) == harness::Format::kJson) {
    emit_text(json{{"results", results}, {"failures", failures}, {"pass", pass}}.dump(2) + "\n", g.out);
  } else {
    std::ostringstream csv;
    csv << "params,triples,idempotence,commutativity,associativity,identity,inverse,homomorphism\n";
    for (const auto& r : results) {
      std::string quoted;
      for (char c : r["params"].dump()) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      csv << '"' << quoted << "\"," << r["triples"] << ',' << r["idempotence"] << ','
          << r["commutativity"] << ',' << r["associativity"] << ',' << r["identity"] << ',' << r["inverse"] << ','
          << r["homomorphism"] << '\n';
    }
    emit_text(csv.str(), g.out);
  }
  std::cerr << "module-check: " << all.size() << " params, " << failures << " law failures, "
            << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

// ---- stream-gen

struct StreamOpts {
  std::string kind = "promise";
  std::int64_t n = 1;
  std::string variant = "binary";
  std::int64_t M = 2;
  std::string schedule = "churn";
  int churn = 3;
  int last_player = -1;
  int tau = 0;
  std::string graph_mode = "degree";
  std::uint32_t vertices = 60;
  std::uint32_t d = 4;
  std::uint64_t T = 8;
  std::uint64_t L = 0;
};

int stream_gen(const StreamOpts& o, const Global& g) {
  std::mt19937_64 rng(harness::trial_seed(g.seed, "stream-gen", 0));
  Stream stream;
  json summary;
  if (o.kind == "promise") {
    const auto inst = promise::gen_instance(o.n, o.tau, rng);
    const auto enc = promise::encode(inst, parse_variant(o.variant), o.M);
    stream = promise::gen_stream(enc, parse_schedule(o.schedule, o.churn, o.last_player, rng), rng);
    summary = {{"kind", "promise"}, {"tau", o.tau}, {"dimension", stream.dimension()}};
  } else if (o.kind == "graph") {
    using triangle::GraphStreamSpec;
    if (o.graph_mode != "degree" && o.graph_mode != "length") throw std::invalid_argument("mode must be degree or length");
    GraphStreamSpec spec{o.vertices, o.d, o.T,
                         o.graph_mode == "degree" ? GraphStreamSpec::Kind::kDegreeChurn
                                                  : GraphStreamSpec::Kind::kLengthChurn,
                         o.L};
    auto gs = triangle::gen_graph_stream(spec, rng);
    stream = std::move(gs.stream);
    summary = {{"kind", "graph"}, {"T", gs.T}, {"m", gs.m}, {"n", o.vertices}};
  } else {
    throw std::invalid_argument("kind must be promise or graph");
  }
  if (g.out.empty() || g.out == "-") {
    write_stream(std::cout, stream);
  } else {
    save_stream(g.out, stream);
  }
  summary["length"] = stream.length();
  std::cerr << summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"turnlab: turnstile streaming experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Root seed")->capture_default_str();
  app.add_option("--out", g.out, "Output path, - for stdout")->capture_default_str();
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  PromiseOpts po;
  auto* pr = app.add_subcommand("promise-run", "Run the promise tracker on generated instances");
  pr->add_option("--n", po.n, "Instance size (N = 30n)")->capture_default_str();
  pr->add_option("--variant", po.variant)->check(CLI::IsMember({"binary", "pm"}))->capture_default_str();
  pr->add_option("--M", po.M, "Box scale for the pm variant")->capture_default_str();
  pr->add_option("--schedule", po.schedule)->check(CLI::IsMember({"insert", "churn", "last"}))->capture_default_str();
  pr->add_option("--churn", po.churn, "Extra write/erase rounds per coordinate")->capture_default_str();
  pr->add_option("--last-player", po.last_player, "Player streamed last, -1 for random")->capture_default_str();
  pr->add_option("--trials", po.trials)->capture_default_str();
  pr->add_option("--copies", po.copies)->capture_default_str();
  pr->add_option("--min-success", po.min_success, "Assert the Wilson lower bound of the success rate");

  TriangleOpts to;
  auto* tc = app.add_subcommand("triangle-count", "Estimate triangle counts on generated graph streams");
  tc->add_option("--mode", to.mode)->check(CLI::IsMember({"maxdeg", "boundedl"}))->capture_default_str();
  tc->add_option("--n", to.n)->capture_default_str();
  tc->add_option("--d", to.d)->capture_default_str();
  tc->add_option("--T", to.T, "Planted triangles")->capture_default_str();
  tc->add_option("--T-floor", to.T_floor, "Lower bound on T given to the algorithm (default T)");
  tc->add_option("--eps", to.eps)->capture_default_str();
  tc->add_option("--L", to.L, "Stream length for boundedl, 0 for 2m")->capture_default_str();
  tc->add_option("--p", to.p, "auto or a rational")->capture_default_str();
  tc->add_option("--trials", to.trials)->capture_default_str();
  tc->add_option("--reps", to.reps, "Odd number of runs per trial, median taken")->capture_default_str();
  tc->add_option("--min-success", to.min_success, "Assert the Wilson lower bound of the success rate");

  CompileOpts co;
  auto* cs = app.add_subcommand("compile-sketch", "Compile a toy algorithm into sketch parameters");
  cs->add_option("--alg", co.alg)->check(CLI::IsMember(reduction::toy_names()))->capture_default_str();
  cs->add_option("--n", co.n)->capture_default_str();
  cs->add_option("--k", co.k, "Modulus of the mod toys")->capture_default_str();
  cs->add_option("--s", co.s, "Space bound in bits (default: the algorithm's)");
  cs->add_option("--mode", co.mode)->check(CLI::IsMember({"total", "general"}))->capture_default_str();
  cs->add_flag("--small-space", co.small_space, "Two-cursor collision search");
  cs->add_option("--grid", co.grid, "Check every x in [0, grid]^n");

  ModuleOpts mo;
  auto* mc = app.add_subcommand("module-check", "Check the module laws on given or random params");
  mc->add_option("--params", mo.params_file, "Params JSON file");
  mc->add_option("--random", mo.random, "Random params to draw without --params")->capture_default_str();
  mc->add_option("--n", mo.n)->capture_default_str();
  mc->add_option("--amax", mo.amax)->capture_default_str();
  mc->add_option("--triples", mo.triples)->capture_default_str();
  mc->add_option("--bound", mo.bound)->capture_default_str();

  StreamOpts so;
  auto* sg = app.add_subcommand("stream-gen", "Write a generated stream as JSON lines");
  sg->add_option("--kind", so.kind)->check(CLI::IsMember({"promise", "graph"}))->capture_default_str();
  sg->add_option("--n", so.n, "Promise instance size")->capture_default_str();
  sg->add_option("--variant", so.variant)->check(CLI::IsMember({"binary", "pm"}))->capture_default_str();
  sg->add_option("--M", so.M)->capture_default_str();
  sg->add_option("--schedule", so.schedule)->check(CLI::IsMember({"insert", "churn", "last"}))->capture_default_str();
  sg->add_option("--churn", so.churn)->capture_default_str();
  sg->add_option("--last-player", so.last_player)->capture_default_str();
  sg->add_option("--tau", so.tau)->check(CLI::Range(0, 1))->capture_default_str();
  sg->add_option("--graph-mode", so.graph_mode)->check(CLI::IsMember({"degree", "length"}))->capture_default_str();
  sg->add_option("--vertices", so.vertices)->capture_default_str();
  sg->add_option("--d", so.d)->capture_default_str();
  sg->add_option("--T", so.T)->capture_default_str();
  sg->add_option("--L", so.L)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*pr) return promise_run(po, g);
    if (*tc) return triangle_count(to, g);
    if (*cs) return compile_sketch(co, g);
    if (*mc) return module_check(mo, g);
    if (*sg) return stream_gen(so, g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
