#include <benchmark/benchmark.h>

#include "turnlab/det_reduction.hpp"
#include "turnlab/promise.hpp"
#include "turnlab/triangle.hpp"

using namespace turnlab;

namespace {

void BM_Phi(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto params = sketch::share(sketch::random_params(n, 8, rng));
  std::uniform_int_distribution<Value> entry(-1000, 1000);
  std::vector<Value> dense(n);
  for (auto& v : dense) v = entry(rng);
  const auto x = FrequencyVector::from_dense(dense);
  for (auto _ : state) benchmark::DoNotOptimize(sketch::phi(params, x));
}
BENCHMARK(BM_Phi)->Arg(4)->Arg(16)->Arg(64);

void BM_Star(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto params = sketch::share(sketch::random_params(16, 8, rng));
  std::vector<Value> a(16), b(16);
  for (std::size_t i = 0; i < 16; ++i) {
    a[i] = static_cast<Value>(rng() % 100);
    b[i] = static_cast<Value>(rng() % 100);
  }
  const auto u = sketch::phi(params, FrequencyVector::from_dense(a));
  const auto v = sketch::phi(params, FrequencyVector::from_dense(b));
  for (auto _ : state) benchmark::DoNotOptimize(sketch::star(u, v));
}
BENCHMARK(BM_Star);

void BM_CompileGeneral(benchmark::State& state) {
  const auto alg = reduction::make_parity_promise();
  for (auto _ : state) benchmark::DoNotOptimize(reduction::compile_general(*alg));
}
BENCHMARK(BM_CompileGeneral)->Unit(benchmark::kMillisecond);

void BM_PromiseWeakRun(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  std::mt19937_64 rng(3);
  const auto enc = promise::encode(promise::gen_instance(n, 1, rng), promise::Variant::kPlusMinus, 2);
  const auto stream = promise::gen_stream(enc, promise::Schedule::random_churn(2), rng);
  for (auto _ : state) benchmark::DoNotOptimize(promise::weak_run(stream, {n, promise::Variant::kPlusMinus, 2}, rng));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * stream.length()));
}
BENCHMARK(BM_PromiseWeakRun)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_PromiseAmplified(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto enc = promise::encode(promise::gen_instance(4, 0, rng), promise::Variant::kBinary, 1);
  const auto stream = promise::gen_stream(enc, promise::Schedule::random_churn(2), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(promise::amplified_run(stream, {4, promise::Variant::kBinary, 1}, 360, rng));
  }
}
BENCHMARK(BM_PromiseAmplified)->Unit(benchmark::kMillisecond);

void BM_KWiseHash(benchmark::State& state) {
  const triangle::KWiseHash h(static_cast<int>(state.range(0)), {1, 3}, 5);
  std::uint64_t x = 0;
  for (auto _ : state) benchmark::DoNotOptimize(h(++x));
}
BENCHMARK(BM_KWiseHash)->Arg(2)->Arg(6);

triangle::GraphStream graph_stream(triangle::GraphStreamSpec::Kind kind) {
  std::mt19937_64 rng(6);
  return triangle::gen_graph_stream({3000, 4, 1500, kind}, rng);
}

void BM_MaxDeg(benchmark::State& state) {
  const auto gs = graph_stream(triangle::GraphStreamSpec::Kind::kDegreeChurn);
  const triangle::MaxDegConfig cfg{3000, 4, triangle::make_rational(512, 1500), gs.peak_edges, true};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(triangle::maxdeg_estimate(gs.stream, cfg, ++seed));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * gs.stream.length()));
}
BENCHMARK(BM_MaxDeg)->Unit(benchmark::kMillisecond);

void BM_BoundedL(benchmark::State& state) {
  const auto gs = graph_stream(triangle::GraphStreamSpec::Kind::kLengthChurn);
  const triangle::BoundedLConfig cfg{3000, 4, triangle::make_rational(256, 1500), gs.L, {1, 2}, 1500, true};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(triangle::boundedl_estimate(gs.stream, cfg, ++seed));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * gs.stream.length()));
}
BENCHMARK(BM_BoundedL)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
