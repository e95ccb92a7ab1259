#include "turnlab/triangle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace turnlab::triangle {
namespace {

__extension__ using Wide = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  const Wide prod = static_cast<Wide>(a) * b;
  std::uint64_t r = static_cast<std::uint64_t>(prod & KWiseHash::kPrime) + static_cast<std::uint64_t>(prod >> 61);
  if (r >= KWiseHash::kPrime) r -= KWiseHash::kPrime;
  return r;
}

std::uint64_t addmod(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  if (r >= KWiseHash::kPrime) r -= KWiseHash::kPrime;
  return r;
}

void erase_one(std::vector<Coordinate>& v, Coordinate x) {
  auto it = std::find(v.begin(), v.end(), x);
  if (it != v.end()) {
    *it = v.back();
    v.pop_back();
  }
}

std::uint64_t edge_bits(std::uint32_t n) { return 2 * static_cast<std::uint64_t>(ceil_log2(n)); }

Coordinate key_of(Coordinate e) { return e; }
Coordinate key_of(const std::pair<const Coordinate, std::int64_t>& entry) { return entry.first; }

// Closed wedges over a seed uv: vertices w with both uw and vw present.
template <class Range, class Keep>
std::uint64_t closed_wedges(Coordinate seed, const Range& neighbors, std::uint32_t n, Keep keep) {
  const auto [u, v] = edge_endpoints(seed, n);
  std::unordered_map<VertexId, int> side;
  for (const auto& entry : neighbors) {
    if (!keep(entry)) continue;
    const auto [x, y] = edge_endpoints(key_of(entry), n);
    if (x == u || y == u) side[x == u ? y : x] |= 1;
    if (x == v || y == v) side[x == v ? y : x] |= 2;
  }
  std::uint64_t count = 0;
  for (const auto& [w, mask] : side) count += mask == 3;
  return count;
}

}  // namespace

Coordinate edge_id(VertexId u, VertexId v, std::uint32_t n) {
  if (u == v || u >= n || v >= n) throw std::invalid_argument("edge needs two distinct vertices below n");
  if (u > v) std::swap(u, v);
  return static_cast<Coordinate>(u) * n + v + 1;
}

std::pair<VertexId, VertexId> edge_endpoints(Coordinate id, std::uint32_t n) {
  if (id == 0) throw std::invalid_argument("edge id 0 is unused");
  const auto u = static_cast<VertexId>((id - 1) / n);
  const auto v = static_cast<VertexId>((id - 1) % n);
  if (u >= v) throw std::invalid_argument("not an edge id for this n");
  return {u, v};
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < 0) throw std::invalid_argument("rational needs num >= 0 and den > 0");
  const std::int64_t g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

Rational parse_rational(const std::string& text) {
  auto digits = [&](const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
      throw std::invalid_argument("not a rational: '" + text + "'");
    }
    if (s.size() > 17) throw std::invalid_argument("rational too large: '" + text + "'");
    return std::stoll(s);
  };
  if (auto slash = text.find('/'); slash != std::string::npos) {
    return make_rational(digits(text.substr(0, slash)), digits(text.substr(slash + 1)));
  }
  if (auto dot = text.find('.'); dot != std::string::npos) {
    const std::string whole = text.substr(0, dot), frac = text.substr(dot + 1);
    if (frac.size() > 15) throw std::invalid_argument("too many decimals: '" + text + "'");
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t w = whole.empty() ? 0 : digits(whole);
    return make_rational(checked_add(checked_mul(w, den), frac.empty() ? 0 : digits(frac)), den);
  }
  return make_rational(digits(text), 1);
}

KWiseHash::KWiseHash(int k, Rational p, std::uint64_t seed) : p_(p) {
  if (k < 1) throw std::invalid_argument("independence must be positive");
  if (p.den <= 0 || p.num <= 0 || p.num > p.den) throw std::invalid_argument("need 0 < p <= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> coeff(0, kPrime - 1);
  for (int i = 0; i < k; ++i) coeffs_.push_back(coeff(rng));
  threshold_ = static_cast<std::uint64_t>(static_cast<Wide>(kPrime) * static_cast<std::uint64_t>(p.num) /
                                          static_cast<std::uint64_t>(p.den));
}

std::uint64_t KWiseHash::value(std::uint64_t x) const {
  x %= kPrime;
  std::uint64_t acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = addmod(mulmod(acc, x), *it);
  return acc;
}

KWiseHash make_kwise_hash(int k, std::int64_t p_num, std::int64_t p_den, std::uint64_t seed) {
  return KWiseHash(k, make_rational(p_num, p_den), seed);
}

std::uint64_t MaxDegConfig::seed_cap() const {
  return static_cast<std::uint64_t>(static_cast<Wide>(2) * m_bound * static_cast<std::uint64_t>(p.num) /
                                    static_cast<std::uint64_t>(p.den));
}

MaxDegEstimator::MaxDegEstimator(const MaxDegConfig& config, std::uint64_t seed)
    : config_(config), hash_(3, config.p, seed), seeds_at_(config.n) {
  if (config.n < 2) throw std::invalid_argument("need at least two vertices");
  account();
}

const std::unordered_set<Coordinate>* MaxDegEstimator::neighbors(Coordinate seed) const {
  auto it = seeds_.find(seed);
  return it == seeds_.end() ? nullptr : &it->second;
}

void MaxDegEstimator::account() {
  peak_seeds_ = std::max(peak_seeds_, seeds_.size());
  meter_.set(hash_.bits() + entries_ * edge_bits(config_.n));
}

void MaxDegEstimator::update(const Update& up) {
  const Coordinate e = up.index;
  const auto [u, v] = edge_endpoints(e, config_.n);
  if (up.delta > 0) {
    if (hash_(e) && !seeds_.count(e) && (!config_.caps || seeds_.size() + 1 <= config_.seed_cap())) {
      seeds_.emplace(e, std::unordered_set<Coordinate>{});
      seeds_at_[u].push_back(e);
      seeds_at_[v].push_back(e);
      ++entries_;
    }
    for (VertexId x : {u, v}) {
      for (Coordinate f : seeds_at_[x]) {
        if (f == e) continue;
        auto& set = seeds_[f];
        if (set.insert(e).second) {
          ++entries_;
          peak_neighbor_set_ = std::max(peak_neighbor_set_, set.size());
        }
      }
    }
  } else if (up.delta < 0) {
    if (auto it = seeds_.find(e); it != seeds_.end()) {
      entries_ -= 1 + it->second.size();
      seeds_.erase(it);
      erase_one(seeds_at_[u], e);
      erase_one(seeds_at_[v], e);
    }
    for (VertexId x : {u, v}) {
      for (Coordinate f : seeds_at_[x]) entries_ -= seeds_[f].erase(e);
    }
  }
  account();
}

Estimate MaxDegEstimator::finish() const {
  Estimate est;
  for (const auto& [e, set] : seeds_) {
    est.pairs += closed_wedges(e, set, config_.n, [](Coordinate) { return true; });
  }
  est.value = static_cast<double>(est.pairs) / config_.p.value();
  est.peak_bits = meter_.peak();
  est.peak_seeds = peak_seeds_;
  est.peak_neighbor_set = peak_neighbor_set_;
  return est;
}

Estimate maxdeg_estimate(const Stream& stream, const MaxDegConfig& config, std::uint64_t seed) {
  MaxDegEstimator est(config, seed);
  stream.for_each([&](const Update& u) {
    est.update(u);
    return true;
  });
  return est.finish();
}

double BoundedLConfig::neighbor_cap() const {
  return 2.0 * d * d * static_cast<double>(L) / (eps.value() * static_cast<double>(T_floor));
}

BoundedLEstimator::BoundedLEstimator(const BoundedLConfig& config, std::uint64_t seed)
    : config_(config), hash_(2, config.p, seed), seeds_at_(config.n) {
  if (config.n < 2) throw std::invalid_argument("need at least two vertices");
  if (config.caps && (config.T_floor == 0 || config.eps.num == 0)) {
    throw std::invalid_argument("caps need T_floor > 0 and eps > 0");
  }
  account();
}

std::int64_t BoundedLEstimator::count(Coordinate e) const {
  auto it = counts_.find(e);
  return it == counts_.end() ? 0 : it->second;
}

const std::unordered_map<Coordinate, std::int64_t>* BoundedLEstimator::neighbors(Coordinate seed) const {
  auto it = sets_.find(seed);
  return it == sets_.end() ? nullptr : &it->second;
}

void BoundedLEstimator::account() {
  peak_seeds_ = std::max(peak_seeds_, counts_.size());
  const std::uint64_t entry = edge_bits(config_.n) + static_cast<std::uint64_t>(ceil_log2(config_.L + 1)) + 1;
  meter_.set(hash_.bits() + (counts_.size() + entries_) * entry);
}

void BoundedLEstimator::update(const Update& up) {
  const Coordinate e = up.index;
  const Value chi = up.delta;
  const auto [u, v] = edge_endpoints(e, config_.n);
  if (hash_(e)) {
    const Value old = count(e);
    const Value now = checked_add(old, chi);
    if (old <= 0 && now > 0) {
      if (auto it = sets_.find(e); it != sets_.end()) {
        entries_ -= it->second.size();
        it->second.clear();
      } else {
        sets_.emplace(e, std::unordered_map<Coordinate, std::int64_t>{});
        seeds_at_[u].push_back(e);
        seeds_at_[v].push_back(e);
      }
    }
    if (now <= 0) {
      if (auto it = sets_.find(e); it != sets_.end()) {
        entries_ -= it->second.size();
        sets_.erase(it);
        erase_one(seeds_at_[u], e);
        erase_one(seeds_at_[v], e);
      }
    }
    if (now == 0) {
      counts_.erase(e);
    } else {
      counts_[e] = now;
    }
  }
  const double cap = config_.neighbor_cap();
  for (VertexId x : {u, v}) {
    for (Coordinate f : seeds_at_[x]) {
      if (f == e) continue;
      auto& set = sets_[f];
      if (auto it = set.find(e); it != set.end()) {
        it->second = std::max<std::int64_t>(it->second + chi, 0);
      } else if (!config_.caps || static_cast<double>(set.size()) < cap) {
        set.emplace(e, std::max<std::int64_t>(chi, 0));
        ++entries_;
        peak_neighbor_set_ = std::max(peak_neighbor_set_, set.size());
      }
    }
  }
  account();
}

Estimate BoundedLEstimator::finish() const {
  Estimate est;
  for (const auto& [e, set] : sets_) {
    if (count(e) != 1) continue;
    est.pairs += closed_wedges(e, set, config_.n, [](const auto& entry) { return entry.second == 1; });
  }
  est.value = static_cast<double>(est.pairs) / config_.p.value();
  est.peak_bits = meter_.peak();
  est.peak_seeds = peak_seeds_;
  est.peak_neighbor_set = peak_neighbor_set_;
  return est;
}

Estimate boundedl_estimate(const Stream& stream, const BoundedLConfig& config, std::uint64_t seed) {
  BoundedLEstimator est(config, seed);
  stream.for_each([&](const Update& u) {
    est.update(u);
    return true;
  });
  return est.finish();
}

double median_amplify(const std::function<double(std::size_t)>& run, std::size_t repetitions) {
  if (repetitions % 2 == 0) throw std::invalid_argument("repetitions must be odd");
  std::vector<double> values;
  values.reserve(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) values.push_back(run(r));
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(repetitions / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

std::uint32_t Graph::max_degree() const {
  std::vector<std::uint32_t> deg(n, 0);
  std::uint32_t best = 0;
  for (const auto& [u, v] : edges) best = std::max({best, ++deg[u], ++deg[v]});
  return best;
}

Graph graph_from_frequency(const FrequencyVector& x, std::uint32_t n) {
  Graph g{n, {}};
  for (const auto& [id, value] : x.entries()) {
    if (value == 1) g.edges.push_back(edge_endpoints(id, n));
  }
  return g;
}

std::uint64_t brute_force_triangles(const Graph& g) {
  std::vector<std::vector<VertexId>> adj(g.n);
  for (const auto& [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  std::uint64_t count = 0;
  for (const auto& [a, b] : g.edges) {
    const VertexId u = std::min(a, b), v = std::max(a, b);
    // Count each triangle once, at its two smallest vertices.
    std::vector<VertexId> common;
    std::set_intersection(adj[u].begin(), adj[u].end(), adj[v].begin(), adj[v].end(), std::back_inserter(common));
    for (VertexId w : common) count += w > v;
  }
  return count;
}

namespace {

// Uniformly removable set of edge ids.
class EdgePool {
 public:
  void add(Coordinate e) {
    where_[e] = items_.size();
    items_.push_back(e);
  }
  void remove(Coordinate e) {
    const std::size_t i = where_.at(e);
    where_[items_.back()] = i;
    items_[i] = items_.back();
    items_.pop_back();
    where_.erase(e);
  }
  bool empty() const { return items_.empty(); }
  bool contains(Coordinate e) const { return where_.count(e) != 0; }
  Coordinate pick(std::mt19937_64& rng) const {
    return items_[std::uniform_int_distribution<std::size_t>(0, items_.size() - 1)(rng)];
  }

 private:
  std::vector<Coordinate> items_;
  std::unordered_map<Coordinate, std::size_t> where_;
};

Graph plant(const GraphStreamSpec& spec, std::mt19937_64& rng) {
  const std::uint32_t n = spec.n;
  const std::uint64_t blocks = spec.d >= 3 ? spec.T / 4 : 0;
  const std::uint64_t singles = spec.T - 4 * blocks;
  if (spec.T > 0 && spec.d < 2) throw std::invalid_argument("triangles need d >= 2");
  const std::uint64_t used = 4 * blocks + 3 * singles;
  if (used > n) {
    throw std::invalid_argument("cannot plant " + std::to_string(spec.T) + " triangles on " + std::to_string(n) +
                                " vertices with d = " + std::to_string(spec.d));
  }
  std::vector<VertexId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  Graph g{n, {}};
  std::size_t next = 0;
  for (std::uint64_t b = 0; b < blocks; ++b, next += 4) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) g.edges.emplace_back(perm[next + i], perm[next + j]);
    }
  }
  for (std::uint64_t s = 0; s < singles; ++s, next += 3) {
    g.edges.emplace_back(perm[next], perm[next + 1]);
    g.edges.emplace_back(perm[next + 1], perm[next + 2]);
    g.edges.emplace_back(perm[next], perm[next + 2]);
  }

  // Bipartite filler on the free vertices: triangle-free and disjoint from
  // the planted part.
  const std::size_t free = n - next;
  const std::size_t half = free / 2;
  if (half == 0 || spec.d == 0) return g;
  std::int64_t target = spec.filler_edges;
  if (target < 0) target = static_cast<std::int64_t>(free * spec.d / 4);
  std::vector<std::uint32_t> deg(n, 0);
  std::unordered_set<Coordinate> have;
  std::uniform_int_distribution<std::size_t> left(0, half - 1), right(half, free - 1);
  std::int64_t placed = 0;
  for (std::int64_t attempt = 0; placed < target && attempt < 20 * target + 100; ++attempt) {
    const VertexId a = perm[next + left(rng)], b = perm[next + right(rng)];
    if (deg[a] >= spec.d || deg[b] >= spec.d || !have.insert(edge_id(a, b, n)).second) continue;
    ++deg[a];
    ++deg[b];
    g.edges.emplace_back(a, b);
    ++placed;
  }
  return g;
}

std::vector<Update> degree_churn(const Graph& g, const GraphStreamSpec& spec, std::mt19937_64& rng) {
  const std::uint32_t n = g.n;
  std::unordered_set<Coordinate> final_edges;
  EdgePool missing, present_final, decoys;
  for (const auto& [u, v] : g.edges) {
    final_edges.insert(edge_id(u, v, n));
    missing.add(edge_id(u, v, n));
  }
  std::vector<std::uint32_t> deg(n, 0);
  std::int64_t budget = spec.churn_ops < 0 ? static_cast<std::int64_t>(g.edges.size()) : spec.churn_ops;
  std::uniform_int_distribution<VertexId> vertex(0, n - 1);
  std::vector<Update> out;

  auto fits = [&](Coordinate e) {
    const auto [u, v] = edge_endpoints(e, n);
    return deg[u] < spec.d && deg[v] < spec.d;
  };
  auto insert = [&](Coordinate e) {
    const auto [u, v] = edge_endpoints(e, n);
    ++deg[u];
    ++deg[v];
    out.push_back({e, 1});
  };
  auto remove = [&](Coordinate e) {
    const auto [u, v] = edge_endpoints(e, n);
    --deg[u];
    --deg[v];
    out.push_back({e, -1});
  };

  while (!missing.empty() || !decoys.empty()) {
    std::vector<int> actions;
    if (!missing.empty()) actions.push_back(0);
    if (budget > 0) actions.push_back(1);
    if (!decoys.empty()) actions.push_back(2);
    if (budget > 0 && !present_final.empty()) actions.push_back(3);
    const int action = actions[std::uniform_int_distribution<std::size_t>(0, actions.size() - 1)(rng)];
    if (action == 0) {
      const Coordinate e = missing.pick(rng);
      if (!fits(e)) continue;
      missing.remove(e);
      present_final.add(e);
      insert(e);
    } else if (action == 1) {
      --budget;
      const VertexId a = vertex(rng), b = vertex(rng);
      if (a == b) continue;
      const Coordinate e = edge_id(a, b, n);
      if (final_edges.count(e) || decoys.contains(e) || !fits(e)) continue;
      decoys.add(e);
      insert(e);
    } else if (action == 2) {
      const Coordinate e = decoys.pick(rng);
      decoys.remove(e);
      remove(e);
    } else {
      --budget;
      const Coordinate e = present_final.pick(rng);
      present_final.remove(e);
      missing.add(e);
      remove(e);
    }
  }
  return out;
}

std::vector<Update> length_churn(const Graph& g, std::uint64_t L, std::mt19937_64& rng) {
  const std::uint32_t n = g.n;
  const std::uint64_t m = g.edges.size();
  if (L < m) throw std::invalid_argument("stream length L is below the edge count");
  std::unordered_set<Coordinate> final_edges;
  std::vector<Coordinate> final_list;
  for (const auto& [u, v] : g.edges) {
    final_edges.insert(edge_id(u, v, n));
    final_list.push_back(edge_id(u, v, n));
  }
  const std::uint64_t pairs = (L - m) / 2;
  struct Token {
    Coordinate edge;
    std::int64_t pair;
  };
  std::vector<Token> tokens;
  tokens.reserve(m + 2 * pairs);
  for (Coordinate e : final_list) tokens.push_back({e, -1});
  std::uniform_int_distribution<VertexId> vertex(0, n - 1);
  std::bernoulli_distribution on_final(0.5);
  for (std::uint64_t k = 0; k < pairs; ++k) {
    Coordinate e = 0;
    if (!final_list.empty() && on_final(rng)) {
      e = final_list[std::uniform_int_distribution<std::size_t>(0, final_list.size() - 1)(rng)];
    } else {
      do {
        const VertexId a = vertex(rng), b = vertex(rng);
        if (a != b && !final_edges.count(edge_id(a, b, n))) e = edge_id(a, b, n);
      } while (e == 0);
    }
    tokens.push_back({e, static_cast<std::int64_t>(k)});
    tokens.push_back({e, static_cast<std::int64_t>(k)});
  }
  std::shuffle(tokens.begin(), tokens.end(), rng);
  std::vector<char> opened(pairs, 0);
  std::vector<Update> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t.pair < 0) {
      out.push_back({t.edge, 1});
    } else {
      out.push_back({t.edge, opened[t.pair] ? -1 : 1});
      opened[t.pair] = 1;
    }
  }
  return out;
}

}  // namespace

GraphStream gen_graph_stream(const GraphStreamSpec& spec, std::mt19937_64& rng) {
  if (spec.n < 3) throw std::invalid_argument("need at least three vertices");
  GraphStream out;
  out.graph = plant(spec, rng);
  out.m = out.graph.edges.size();
  out.T = brute_force_triangles(out.graph);
  if (out.T != spec.T) throw std::logic_error("planted graph has the wrong triangle count");

  std::vector<Update> updates;
  if (spec.kind == GraphStreamSpec::Kind::kDegreeChurn) {
    updates = degree_churn(out.graph, spec, rng);
  } else {
    updates = length_churn(out.graph, spec.L == 0 ? 2 * out.m : spec.L, rng);
  }
  std::int64_t edges = 0;
  std::unordered_map<Coordinate, std::int64_t> x;
  for (const auto& u : updates) {
    Value& c = x[u.index];
    const bool was = c > 0;
    c += u.delta;
    edges += static_cast<std::int64_t>(c > 0) - static_cast<std::int64_t>(was);
    out.peak_edges = std::max<std::uint64_t>(out.peak_edges, static_cast<std::uint64_t>(edges));
  }
  out.L = updates.size();
  out.stream = Stream(edge_dimension(spec.n), std::move(updates));
  return out;
}

}  // namespace turnlab::triangle
