#pragma once

// Turnstile triangle counting on graph streams: an estimator for streams whose
// every prefix has max degree d, and one for strict turnstile streams of
// bounded length. Edges of K_n are stream coordinates via edge_id.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "turnlab/space_meter.hpp"
#include "turnlab/stream.hpp"

namespace turnlab::triangle {

using VertexId = std::uint32_t;

/// Coordinate of edge {u, v} in K_n, u != v: min * n + max + 1.
Coordinate edge_id(VertexId u, VertexId v, std::uint32_t n);
std::pair<VertexId, VertexId> edge_endpoints(Coordinate id, std::uint32_t n);
/// Dimension of the edge space (ids stay below n^2 + 1).
inline std::size_t edge_dimension(std::uint32_t n) { return static_cast<std::size_t>(n) * n; }

/// Nonnegative rational num / den.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

Rational make_rational(std::int64_t num, std::int64_t den);
/// Accepts "a/b", "a" and decimals such as "0.25".
Rational parse_rational(const std::string& text);

/// h(e) = [poly(e) < floor(P * num / den)] for a random polynomial of degree
/// k - 1 over GF(P), P = 2^61 - 1. Any k edges hash independently; the
/// marginal is p up to an additive 1/P.
class KWiseHash {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  KWiseHash(int k, Rational p, std::uint64_t seed);

  int independence() const { return static_cast<int>(coeffs_.size()); }
  Rational p() const { return p_; }
  std::uint64_t value(std::uint64_t x) const;
  bool operator()(std::uint64_t x) const { return value(x) < threshold_; }
  std::uint64_t bits() const { return 61 * coeffs_.size(); }

 private:
  std::vector<std::uint64_t> coeffs_;
  Rational p_;
  std::uint64_t threshold_ = 0;
};

KWiseHash make_kwise_hash(int k, std::int64_t p_num, std::int64_t p_den, std::uint64_t seed);

struct Estimate {
  /// Sum over surviving seeds of closed wedges; the estimate is pairs / p.
  std::uint64_t pairs = 0;
  double value = 0.0;
  std::uint64_t peak_bits = 0;
  std::size_t peak_seeds = 0;
  std::size_t peak_neighbor_set = 0;
};

struct MaxDegConfig {
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  Rational p{1, 1};
  /// Edge count used in the seed cap |S| <= 2pm.
  std::uint64_t m_bound = 0;
  bool caps = true;

  /// floor(2 p m_bound).
  std::uint64_t seed_cap() const;
};

class MaxDegEstimator {
 public:
  MaxDegEstimator(const MaxDegConfig& config, std::uint64_t seed);

  void update(const Update& u);
  Estimate finish() const;

  std::size_t seed_count() const { return seeds_.size(); }
  bool is_seed(Coordinate e) const { return seeds_.count(e) != 0; }
  const std::unordered_set<Coordinate>* neighbors(Coordinate seed) const;
  const KWiseHash& hash() const { return hash_; }
  std::uint64_t current_bits() const { return meter_.current(); }

 private:
  void account();

  MaxDegConfig config_;
  KWiseHash hash_;
  std::unordered_map<Coordinate, std::unordered_set<Coordinate>> seeds_;
  std::vector<std::vector<Coordinate>> seeds_at_;
  std::size_t entries_ = 0;
  std::size_t peak_seeds_ = 0;
  std::size_t peak_neighbor_set_ = 0;
  SpaceMeter meter_;
};

Estimate maxdeg_estimate(const Stream& stream, const MaxDegConfig& config, std::uint64_t seed);

struct BoundedLConfig {
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  Rational p{1, 1};
  std::uint64_t L = 0;
  Rational eps{1, 2};
  std::uint64_t T_floor = 1;
  bool caps = true;

  /// 2 d^2 L / (eps T_floor).
  double neighbor_cap() const;
};

class BoundedLEstimator {
 public:
  BoundedLEstimator(const BoundedLConfig& config, std::uint64_t seed);

  void update(const Update& u);
  Estimate finish() const;

  /// Multiplicity counter of a hashed edge (0 when absent).
  std::int64_t count(Coordinate e) const;
  /// Neighbor counters of an active seed, or nullptr.
  const std::unordered_map<Coordinate, std::int64_t>* neighbors(Coordinate seed) const;
  const KWiseHash& hash() const { return hash_; }

 private:
  void account();

  BoundedLConfig config_;
  KWiseHash hash_;
  std::unordered_map<Coordinate, std::int64_t> counts_;
  std::unordered_map<Coordinate, std::unordered_map<Coordinate, std::int64_t>> sets_;
  std::vector<std::vector<Coordinate>> seeds_at_;
  std::size_t entries_ = 0;
  std::size_t peak_seeds_ = 0;
  std::size_t peak_neighbor_set_ = 0;
  SpaceMeter meter_;
};

Estimate boundedl_estimate(const Stream& stream, const BoundedLConfig& config, std::uint64_t seed);

/// Median of `repetitions` runs; run(r) is the r-th independent run.
double median_amplify(const std::function<double(std::size_t)>& run, std::size_t repetitions);

struct Graph {
  std::uint32_t n = 0;
  std::vector<std::pair<VertexId, VertexId>> edges;

  std::uint32_t max_degree() const;
};

/// Edges with frequency exactly 1.
Graph graph_from_frequency(const FrequencyVector& x, std::uint32_t n);

std::uint64_t brute_force_triangles(const Graph& g);

struct GraphStreamSpec {
  enum class Kind { kDegreeChurn, kLengthChurn };
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  std::uint64_t T = 0;
  Kind kind = Kind::kDegreeChurn;
  /// Length churn: total stream length, 0 for 2m.
  std::uint64_t L = 0;
  /// Triangle-free filler edges, -1 for about a quarter of the free degree.
  std::int64_t filler_edges = -1;
  /// Degree churn: extra insert/delete operations, -1 for m.
  std::int64_t churn_ops = -1;
};

struct GraphStream {
  Graph graph;
  Stream stream;
  std::uint64_t T = 0;
  std::uint64_t m = 0;
  std::uint64_t L = 0;
  /// Largest edge count over all prefixes.
  std::uint64_t peak_edges = 0;
};

/// Plants T triangles (K4 blocks when d >= 3, disjoint triangles otherwise)
/// plus a bipartite filler and streams it. Throws std::invalid_argument on an
/// infeasible spec.
GraphStream gen_graph_stream(const GraphStreamSpec& spec, std::mt19937_64& rng);

}  // namespace turnlab::triangle
