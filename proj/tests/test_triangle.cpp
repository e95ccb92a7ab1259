#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "turnlab/triangle.hpp"

using namespace turnlab;
using namespace turnlab::triangle;

namespace {

std::uint64_t naive_triangles(const Graph& g) {
  std::set<std::pair<VertexId, VertexId>> e;
  for (auto [u, v] : g.edges) e.insert({std::min(u, v), std::max(u, v)});
  std::uint64_t t = 0;
  for (VertexId a = 0; a < g.n; ++a)
    for (VertexId b = a + 1; b < g.n; ++b)
      for (VertexId c = b + 1; c < g.n; ++c) t += e.count({a, b}) && e.count({b, c}) && e.count({a, c});
  return t;
}

Stream insert_only(const Graph& g) {
  std::vector<Update> ups;
  for (auto [u, v] : g.edges) ups.push_back({edge_id(u, v, g.n), 1});
  return Stream(edge_dimension(g.n), ups);
}

Graph random_graph(std::uint32_t n, std::uint32_t d, std::size_t tries, std::mt19937_64& rng) {
  Graph g{n, {}};
  std::vector<std::uint32_t> deg(n, 0);
  std::set<Coordinate> have;
  std::uniform_int_distribution<VertexId> vx(0, n - 1);
  for (std::size_t k = 0; k < tries; ++k) {
    VertexId a = vx(rng), b = vx(rng);
    if (a == b || deg[a] >= d || deg[b] >= d || !have.insert(edge_id(a, b, n)).second) continue;
    ++deg[a];
    ++deg[b];
    g.edges.emplace_back(a, b);
  }
  return g;
}

// Offline T~+ pair count: seeds are final edges with h = 1, each counting
// wedges whose two other edges were last updated after it.
std::uint64_t tplus_pairs(const GraphStream& gs, const KWiseHash& h) {
  const std::uint32_t n = gs.graph.n;
  std::map<Coordinate, std::uint64_t> last;
  std::uint64_t t = 0;
  gs.stream.for_each([&](const Update& u) {
    last[u.index] = ++t;
    return true;
  });
  std::set<Coordinate> final_edges;
  for (auto [u, v] : gs.graph.edges) final_edges.insert(edge_id(u, v, n));
  std::uint64_t pairs = 0;
  for (Coordinate e : final_edges) {
    if (!h(e)) continue;
    auto [u, v] = edge_endpoints(e, n);
    for (VertexId w = 0; w < n; ++w) {
      if (w == u || w == v) continue;
      const Coordinate uw = edge_id(u, w, n), vw = edge_id(v, w, n);
      if (final_edges.count(uw) && final_edges.count(vw) && last[uw] > last[e] && last[vw] > last[e]) ++pairs;
    }
  }
  return pairs;
}

std::uint64_t naive_poly(const std::vector<std::uint64_t>& c, std::uint64_t x) {
  __extension__ using W = unsigned __int128;
  const std::uint64_t P = KWiseHash::kPrime;
  W acc = 0, pw = 1;
  for (auto a : c) {
    acc = (acc + static_cast<W>(a) * pw) % P;
    pw = pw * (x % P) % P;
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace

TEST(TriangleBasics, EdgeIds) {
  const std::uint32_t n = 7;
  std::set<Coordinate> seen;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) {
      const Coordinate id = edge_id(u, v, n);
      EXPECT_EQ(id, edge_id(v, u, n));
      EXPECT_EQ(edge_endpoints(id, n), std::make_pair(u, v));
      EXPECT_LT(id, edge_dimension(n) + 1);
      seen.insert(id);
    }
  }
  EXPECT_EQ(seen.size(), 21U);
  EXPECT_THROW(edge_id(2, 2, n), std::invalid_argument);
  EXPECT_THROW(edge_endpoints(1, n), std::invalid_argument);
}

TEST(TriangleBasics, Rationals) {
  EXPECT_EQ(parse_rational("128/375"), (Rational{128, 375}));
  EXPECT_EQ(parse_rational("2/4"), (Rational{1, 2}));
  EXPECT_EQ(parse_rational("0.5"), (Rational{1, 2}));
  EXPECT_EQ(parse_rational(".25"), (Rational{1, 4}));
  EXPECT_EQ(parse_rational("3"), (Rational{3, 1}));
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational("-1"), std::invalid_argument);
  EXPECT_THROW(parse_rational("abc"), std::invalid_argument);
  EXPECT_EQ(Rational(3, 4).str(), "3/4");
}

TEST(KWiseHash, PolynomialMatchesNaive) {
  std::mt19937_64 rng(1);
  for (int k : {1, 2, 3, 5}) {
    // Same seeding as the hash, evaluated naively.
    std::vector<std::uint64_t> c;
    const std::uint64_t seed = rng();
    std::mt19937_64 crng(seed);
    std::uniform_int_distribution<std::uint64_t> coeff(0, KWiseHash::kPrime - 1);
    for (int i = 0; i < k; ++i) c.push_back(coeff(crng));
    KWiseHash g(k, {1, 3}, seed);
    for (std::uint64_t x : std::vector<std::uint64_t>{0, 1, 2, 12345, KWiseHash::kPrime - 1, KWiseHash::kPrime + 7, ~0ULL}) {
      EXPECT_EQ(g.value(x), naive_poly(c, x));
    }
    EXPECT_EQ(g.independence(), k);
  }
}

TEST(KWiseHash, AlwaysOneAtPOne) {
  KWiseHash h(3, {1, 1}, 42);
  for (std::uint64_t e = 1; e < 5000; ++e) EXPECT_TRUE(h(e));
  EXPECT_THROW(KWiseHash(3, Rational{0, 1}, 1), std::invalid_argument);
  EXPECT_THROW(KWiseHash(3, Rational{3, 2}, 1), std::invalid_argument);
}

TEST(KWiseHash, MarginalsAndJoint) {
  // Over 10^5 seeds: each fixed edge is 1 with frequency ~ p, and three fixed
  // edges are jointly 1 with frequency ~ p^3.
  const int seeds = 100000;
  const Rational p{1, 3};
  const std::uint64_t edges[3] = {17, 1000003, 99991};
  int ones[3] = {0, 0, 0}, all = 0;
  for (int s = 0; s < seeds; ++s) {
    KWiseHash h(3, p, static_cast<std::uint64_t>(s));
    bool b[3];
    for (int i = 0; i < 3; ++i) ones[i] += b[i] = h(edges[i]);
    all += b[0] && b[1] && b[2];
  }
  double chi2 = 0;
  for (int i = 0; i < 3; ++i) {
    const double expected = seeds * p.value();
    chi2 += std::pow(ones[i] - expected, 2) / expected + std::pow((seeds - ones[i]) - (seeds - expected), 2) / (seeds - expected);
  }
  // Three 1-dof statistics; 99.9% quantile of chi2(3) is 16.27.
  EXPECT_LT(chi2, 16.27);
  const double pj = std::pow(p.value(), 3);
  const double sd = std::sqrt(seeds * pj * (1 - pj));
  EXPECT_NEAR(all, seeds * pj, 4 * sd);
}

TEST(BruteForce, SmallGraphs) {
  EXPECT_EQ(brute_force_triangles(Graph{3, {{0, 1}, {1, 2}, {0, 2}}}), 1U);
  EXPECT_EQ(brute_force_triangles(Graph{4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}}), 4U);
  EXPECT_EQ(brute_force_triangles(Graph{5, {}}), 0U);
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    auto g = random_graph(12, 6, 60, rng);
    EXPECT_EQ(brute_force_triangles(g), naive_triangles(g));
  }
}

TEST(MaxDeg, SingleTriangleAndEmpty) {
  Graph k3{3, {{0, 1}, {1, 2}, {0, 2}}};
  MaxDegConfig cfg{3, 2, {1, 1}, 3, true};
  auto est = maxdeg_estimate(insert_only(k3), cfg, 7);
  EXPECT_EQ(est.pairs, 1U);
  EXPECT_DOUBLE_EQ(est.value, 1.0);
  EXPECT_EQ(maxdeg_estimate(Stream(edge_dimension(3)), cfg, 7).value, 0.0);
}

TEST(MaxDeg, MatchesTPlusOracleWithoutCaps) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    GraphStreamSpec spec{60, 4, 12, GraphStreamSpec::Kind::kDegreeChurn};
    auto gs = gen_graph_stream(spec, rng);
    const std::uint64_t seed = rng();
    MaxDegConfig cfg{60, 4, {1, 3}, gs.peak_edges, false};
    auto est = maxdeg_estimate(gs.stream, cfg, seed);
    EXPECT_EQ(est.pairs, tplus_pairs(gs, KWiseHash(3, cfg.p, seed)));
  }
}

TEST(MaxDeg, DeletionSymmetry) {
  std::mt19937_64 rng(4);
  auto gs = gen_graph_stream({80, 4, 8, GraphStreamSpec::Kind::kDegreeChurn}, rng);
  auto ups = gs.stream.materialize();
  std::set<Coordinate> final_edges;
  for (auto [u, v] : gs.graph.edges) final_edges.insert(edge_id(u, v, 80));
  auto padded = ups;
  std::uniform_int_distribution<VertexId> vx(0, 79);
  for (int k = 0; k < 40; ++k) {
    VertexId a = vx(rng), b = vx(rng);
    if (a == b || final_edges.count(edge_id(a, b, 80))) continue;
    padded.push_back({edge_id(a, b, 80), 1});
    padded.push_back({edge_id(a, b, 80), -1});
  }
  for (bool caps : {false, true}) {
    MaxDegConfig cfg{80, 4, {1, 2}, gs.peak_edges, caps};
    EXPECT_EQ(maxdeg_estimate(Stream(gs.stream.dimension(), ups), cfg, 9).pairs,
              maxdeg_estimate(Stream(gs.stream.dimension(), padded), cfg, 9).pairs);
  }
}

TEST(MaxDeg, SeedCapHolds) {
  std::mt19937_64 rng(5);
  auto gs = gen_graph_stream({200, 4, 20, GraphStreamSpec::Kind::kDegreeChurn}, rng);
  for (std::uint64_t m : {gs.peak_edges, gs.peak_edges / 4, std::uint64_t{3}}) {
    MaxDegConfig cfg{200, 4, {1, 2}, m, true};
    MaxDegEstimator est(cfg, 11);
    gs.stream.for_each([&](const Update& u) {
      est.update(u);
      EXPECT_LE(est.seed_count(), cfg.seed_cap());
      return true;
    });
  }
  EXPECT_EQ((MaxDegConfig{10, 2, {1, 3}, 10, true}.seed_cap()), 6U);
}

TEST(MaxDeg, Unbiased) {
  std::mt19937_64 rng(6);
  auto gs = gen_graph_stream({60, 4, 8, GraphStreamSpec::Kind::kDegreeChurn}, rng);
  MaxDegConfig cfg{60, 4, {1, 4}, gs.peak_edges, false};
  const int trials = 2000;
  double sum = 0, sq = 0;
  for (int t = 0; t < trials; ++t) {
    const double v = maxdeg_estimate(gs.stream, cfg, static_cast<std::uint64_t>(t)).value;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / trials);
  EXPECT_NEAR(mean, 8.0, 3 * se);
}

TEST(MaxDeg, SpaceWithinBound) {
  std::mt19937_64 rng(7);
  auto gs = gen_graph_stream({400, 4, 40, GraphStreamSpec::Kind::kDegreeChurn}, rng);
  MaxDegConfig cfg{400, 4, {1, 4}, gs.peak_edges, true};
  auto est = maxdeg_estimate(gs.stream, cfg, 3);
  // Seeds plus at most 2d - 1 neighbors each, 2 ceil(lg n) bits per edge.
  const double bound = 3 * 61 + static_cast<double>(cfg.seed_cap()) * (2 * 4) * 2 * 9;
  EXPECT_LE(static_cast<double>(est.peak_bits), bound);
  EXPECT_LE(est.peak_neighbor_set, 2U * 4 - 1);
}

TEST(BoundedL, SingleTriangleAndCancel) {
  Graph k3{3, {{0, 1}, {1, 2}, {0, 2}}};
  BoundedLConfig cfg{3, 2, {1, 1}, 3, {1, 2}, 1, true};
  EXPECT_EQ(boundedl_estimate(insert_only(k3), cfg, 1).pairs, 1U);
  // Edge 01 inserted then deleted: no seed survives for it.
  std::vector<Update> ups = {{edge_id(0, 1, 3), 1}, {edge_id(0, 1, 3), -1}};
  BoundedLEstimator est(cfg, 1);
  for (auto u : ups) est.update(u);
  EXPECT_EQ(est.neighbors(edge_id(0, 1, 3)), nullptr);
  EXPECT_EQ(est.finish().pairs, 0U);
}

TEST(BoundedL, ClampRecurrenceExhaustive) {
  // Seed e = 01 and incident edges 02, 12, 13 on four vertices; every strict
  // stream of length <= 6 with unit updates over these four edges.
  const std::uint32_t n = 4;
  const std::vector<Coordinate> edges = {edge_id(0, 1, n), edge_id(0, 2, n), edge_id(1, 2, n), edge_id(1, 3, n)};
  BoundedLConfig cfg{n, 3, {1, 1}, 6, {1, 2}, 1, false};
  std::vector<Update> ups;
  std::uint64_t checked = 0;
  std::function<void()> rec = [&] {
    BoundedLEstimator est(cfg, 5);
    std::map<Coordinate, std::vector<Value>> hist;  // x after each prefix
    for (auto e : edges) hist[e] = {0};
    for (const auto& u : ups) {
      est.update(u);
      for (auto e : edges) hist[e].push_back(hist[e].back() + (u.index == e ? u.delta : 0));
    }
    const std::size_t t = ups.size();
    for (Coordinate s : edges) {
      const Value xs = hist[s][t];
      EXPECT_EQ(est.count(s), xs);
      const auto* set = est.neighbors(s);
      ASSERT_EQ(set != nullptr, xs > 0);
      if (!set) continue;
      std::size_t ts = 0;
      for (std::size_t r = 1; r <= t; ++r) {
        if (hist[s][r - 1] == 0 && hist[s][r] > 0) ts = r;
      }
      auto [a, b] = edge_endpoints(s, n);
      for (Coordinate f : edges) {
        auto [x, y] = edge_endpoints(f, n);
        if (f == s || !(x == a || x == b || y == a || y == b)) continue;
        bool touched = false;
        for (std::size_t r = ts + 1; r <= t; ++r) touched |= ups[r - 1].index == f;
        auto it = set->find(f);
        ASSERT_EQ(it != set->end(), touched);
        if (!touched) continue;
        Value lo = hist[f][ts];
        for (std::size_t r = ts; r <= t; ++r) lo = std::min(lo, hist[f][r]);
        EXPECT_EQ(it->second, hist[f][t] - lo);
        ++checked;
      }
    }
    if (ups.size() == 6) return;
    for (auto e : edges) {
      for (Value d : {1, -1}) {
        if (hist[e].back() + d < 0) continue;
        ups.push_back({e, d});
        rec();
        ups.pop_back();
      }
    }
  };
  rec();
  EXPECT_GT(checked, 10000U);
}

TEST(BoundedL, NeighborCapHolds) {
  std::mt19937_64 rng(8);
  auto gs = gen_graph_stream({100, 4, 10, GraphStreamSpec::Kind::kLengthChurn}, rng);
  BoundedLConfig cfg{100, 1, {1, 1}, gs.L, {1, 1}, gs.L, true};
  EXPECT_DOUBLE_EQ(cfg.neighbor_cap(), 2.0);
  auto est = boundedl_estimate(gs.stream, cfg, 1);
  EXPECT_LE(est.peak_neighbor_set, 2U);
}

TEST(BoundedL, ExpectationWindow) {
  std::mt19937_64 rng(9);
  auto gs = gen_graph_stream({120, 4, 16, GraphStreamSpec::Kind::kLengthChurn}, rng);
  BoundedLConfig cfg{120, 4, {1, 4}, gs.L, {1, 2}, 16, true};
  const int trials = 2000;
  double sum = 0, sq = 0;
  for (int t = 0; t < trials; ++t) {
    const double v = boundedl_estimate(gs.stream, cfg, static_cast<std::uint64_t>(t)).value;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / trials);
  EXPECT_GE(mean, 0.75 * 16 - 3 * se);
  EXPECT_LE(mean, 16 + 3 * se);
}

TEST(Estimators, OracleEquivalenceInsertOnly) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 50; ++rep) {
    auto g = random_graph(30, 5, 120, rng);
    const auto truth = brute_force_triangles(g);
    auto s = insert_only(g);
    EXPECT_EQ(maxdeg_estimate(s, MaxDegConfig{30, 5, {1, 1}, g.edges.size(), false}, rng()).pairs, truth);
    EXPECT_EQ(boundedl_estimate(s, BoundedLConfig{30, 5, {1, 1}, g.edges.size(), {1, 2}, 1, false}, rng()).pairs,
              truth);
  }
}

TEST(Generators, DegreeChurn) {
  std::mt19937_64 rng(11);
  for (std::uint32_t d : {2U, 3U, 4U}) {
    GraphStreamSpec spec{90, d, 9, GraphStreamSpec::Kind::kDegreeChurn};
    auto gs = gen_graph_stream(spec, rng);
    EXPECT_EQ(gs.T, 9U);
    EXPECT_EQ(naive_triangles(gs.graph), 9U);
    EXPECT_LE(gs.graph.max_degree(), d);
    EXPECT_TRUE(check_constraint(gs.stream, StreamConstraint::binary()).satisfied);
    // Replay: every prefix has max degree <= d.
    std::vector<int> deg(90, 0);
    gs.stream.for_each([&](const Update& u) {
      auto [a, b] = edge_endpoints(u.index, 90);
      deg[a] += static_cast<int>(u.delta);
      deg[b] += static_cast<int>(u.delta);
      EXPECT_LE(deg[a], static_cast<int>(d));
      EXPECT_LE(deg[b], static_cast<int>(d));
      return true;
    });
    auto final_graph = graph_from_frequency(freq(gs.stream), 90);
    EXPECT_EQ(final_graph.edges.size(), gs.m);
    EXPECT_EQ(brute_force_triangles(final_graph), 9U);
    EXPECT_GT(gs.L, gs.m);
  }
}

TEST(Generators, LengthChurn) {
  std::mt19937_64 rng(12);
  GraphStreamSpec spec{150, 4, 12, GraphStreamSpec::Kind::kLengthChurn};
  auto gs = gen_graph_stream(spec, rng);
  EXPECT_LE(gs.L, 2 * gs.m);
  EXPECT_EQ(gs.stream.length(), gs.L);
  EXPECT_TRUE(check_constraint(gs.stream, StreamConstraint::strict_turnstile()).satisfied);
  auto x = freq(gs.stream);
  for (const auto& [id, v] : x.entries()) EXPECT_EQ(v, 1);
  EXPECT_EQ(brute_force_triangles(graph_from_frequency(x, 150)), 12U);
  std::set<Coordinate> touched;
  gs.stream.for_each([&](const Update& u) {
    touched.insert(u.index);
    return true;
  });
  EXPECT_LE(2 * touched.size(), 2 * gs.L);
}

TEST(Generators, DisjointTrianglesAtDegreeTwo) {
  std::mt19937_64 rng(13);
  auto gs = gen_graph_stream({30, 2, 5, GraphStreamSpec::Kind::kDegreeChurn, 0, 0, 0}, rng);
  EXPECT_EQ(gs.m, 15U);
  EXPECT_EQ(gs.T, 5U);
  EXPECT_EQ(gs.L, 15U);
}

TEST(Generators, Infeasible) {
  std::mt19937_64 rng(14);
  EXPECT_THROW(gen_graph_stream({10, 2, 4, GraphStreamSpec::Kind::kDegreeChurn}, rng), std::invalid_argument);
  EXPECT_THROW(gen_graph_stream({10, 1, 1, GraphStreamSpec::Kind::kDegreeChurn}, rng), std::invalid_argument);
  EXPECT_NO_THROW(gen_graph_stream({12, 3, 12, GraphStreamSpec::Kind::kDegreeChurn}, rng));
}

TEST(Median, Basics) {
  EXPECT_EQ(median_amplify([](std::size_t) { return 5.0; }, 1), 5.0);
  const double vals[] = {1, 100, 2};
  EXPECT_EQ(median_amplify([&](std::size_t r) { return vals[r]; }, 3), 2.0);
  EXPECT_THROW(median_amplify([](std::size_t) { return 0.0; }, 2), std::invalid_argument);
}

TEST(Median, ShrinksFailureRate) {
  std::mt19937_64 rng(15);
  auto gs = gen_graph_stream({200, 4, 40, GraphStreamSpec::Kind::kDegreeChurn}, rng);
  MaxDegConfig cfg{200, 4, {1, 8}, gs.peak_edges, true};
  auto fails = [&](std::size_t reps) {
    int bad = 0;
    for (int t = 0; t < 150; ++t) {
      const double v = median_amplify(
          [&](std::size_t r) { return maxdeg_estimate(gs.stream, cfg, 1000 * t + r).value; }, reps);
      bad += std::abs(v - 40) > 20;
    }
    return bad;
  };
  EXPECT_LE(fails(9), fails(1));
}
