#pragma once

// PROMISE(n): three players, one per edge of a triangle ABC, each holding N/3
// labelled edges (u, v, z_uv) between the vertex classes of its endpoints,
// N = 30n. The graph has n triangles, all with label parity tau, and 27n
// isolated edges. The instance is written as six blocks y^{e,a} of N symbols,
// each symbol packed into a B-bit word; a single-pass tracker recovers tau
// with small constant probability and never answers 1 - tau.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "turnlab/space_meter.hpp"
#include "turnlab/stream.hpp"

namespace turnlab::promise {

/// Vertices of the triangle ABC.
enum Vertex : int { kA = 0, kB = 1, kC = 2 };

/// Player p holds the edge kPlayerEnds[p] = {first, second}: AB, BC, AC.
inline constexpr std::array<std::array<int, 2>, 3> kPlayerEnds = {{{kA, kB}, {kB, kC}, {kA, kC}}};

/// Player owning the edge between two distinct triangle vertices.
int player_of(int x, int y);

class PromiseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// (u, v, z_uv); u in V_first, v in V_second of the owning player, both in [1, N].
struct Triple {
  std::int64_t u = 0;
  std::int64_t v = 0;
  int z = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct PromiseInstance {
  std::int64_t n = 0;
  int tau = 0;
  std::array<std::vector<Triple>, 3> players;

  std::int64_t N() const { return 30 * n; }
};

/// Checks every part of the promise and returns the triangles as
/// (u in V_A, v in V_B, w in V_C). Throws PromiseError with the first failure.
std::vector<std::array<std::int64_t, 3>> validate_promise(const PromiseInstance& instance);

PromiseInstance gen_instance(std::int64_t n, int tau, std::mt19937_64& rng);

enum class Variant { kBinary, kPlusMinus };

/// B = ceil(lg N) + 2.
int word_bits(std::int64_t N);

/// Coordinate layout: block 2p + side holds y^{p, side}; position k in [1, N]
/// of a block is a B-bit word, bit 0 least significant.
struct Layout {
  std::int64_t N = 0;
  int B = 0;

  std::size_t dimension() const { return static_cast<std::size_t>(6 * N * B); }
  std::int64_t word_id(int block, std::int64_t position) const { return block * N + (position - 1); }
  Coordinate coordinate(std::int64_t word, int bit) const {
    return static_cast<Coordinate>(word * B + bit + 1);
  }
  std::int64_t word_of(Coordinate c) const { return static_cast<std::int64_t>(c - 1) / B; }
  int bit_of(Coordinate c) const { return static_cast<int>(static_cast<std::int64_t>(c - 1) % B); }
};

/// A symbol (l, z) of the outer code; nullopt is bottom.
struct Symbol {
  std::int64_t l = 0;
  int z = 0;
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// Inner code in binary: l^(bin) XOR z^B, bottom -> 0.
std::uint64_t encode_symbol(const std::optional<Symbol>& symbol, int B);
/// Inverse of encode_symbol on {0,1}^B words; nullopt for invalid words.
/// Valid words decode to bottom (0) or to (l, z) with 1 <= l <= N.
std::optional<std::optional<Symbol>> decode_word(std::uint64_t word, std::int64_t N, int B);

struct EncodedInstance {
  std::int64_t n = 0;
  Layout layout;
  Variant variant = Variant::kBinary;
  std::int64_t M = 1;
  /// Six blocks of N symbols each.
  std::array<std::vector<std::optional<Symbol>>, 6> symbols;
  /// Final frequency vector, dense: entry c - 1 is coordinate c.
  std::vector<Value> bits;

  FrequencyVector frequency() const { return FrequencyVector::from_dense(bits); }
};

/// Outer then inner code. Validates the instance first. M only matters for
/// the +-M variant (bit 1 -> +M, bit 0 -> -M).
EncodedInstance encode(const PromiseInstance& instance, Variant variant, std::int64_t M = 1);

/// Recovers the player lists (sorted) and tau from an encoding.
PromiseInstance decode(const EncodedInstance& encoded);

/// Zeta: componentwise sign, scaled to M.
std::vector<Value> zeta(const std::vector<Value>& word, std::int64_t M);
/// Eta: M -> 1, -M -> 0. Throws std::domain_error on any other entry.
std::vector<int> eta(const std::vector<Value>& word, std::int64_t M);

/// Bit decision of a +-M word coordinate from its observations since some
/// point: `current`, `min`, `max` are taken relative to the value at that
/// point (so min <= 0 <= max). Returns eta of the final value when the window
/// forces it, nullopt otherwise.
std::optional<int> box_bit_decision(Value current, Value min, Value max, std::int64_t M);

struct Schedule {
  enum class Kind { kInsertOnly, kChurn, kLastPlayer };
  Kind kind = Kind::kInsertOnly;
  /// Extra write/erase rounds per coordinate, drawn uniformly in [0, churn].
  int churn = 0;
  /// Player whose coordinates come last (kLastPlayer only).
  int last_player = 0;

  static Schedule insert_only() { return {Kind::kInsertOnly, 0, 0}; }
  static Schedule random_churn(int k) { return {Kind::kChurn, k, 0}; }
  static Schedule last_player_of(int player, int k = 0) { return {Kind::kLastPlayer, k, player}; }
};

/// Stream with freq = target.bits that stays in {0,1}^n (binary) or
/// [-(2M-1), 2M-1]^n (+-M) at every prefix. Insert-only is kappa(bits).
/// Churn draws per-coordinate histories and interleaves them at random.
Stream gen_stream(const EncodedInstance& target, const Schedule& schedule, std::mt19937_64& rng);

enum class Answer : int { kZero = 0, kOne = 1, kBottom = -1 };

struct TrackerConfig {
  std::int64_t n = 0;
  Variant variant = Variant::kBinary;
  std::int64_t M = 1;
};

/// One copy of the low-probability tracker (binary or +-M).
class Tracker {
 public:
  Tracker(const TrackerConfig& config, std::mt19937_64& rng);
  /// Fixed choice, for tests: labeling (a, b, c) and u in V_a.
  Tracker(const TrackerConfig& config, std::array<int, 3> labeling, std::int64_t u);

  const Layout& layout() const { return layout_; }
  std::array<int, 3> labeling() const { return labeling_; }
  std::int64_t u() const { return u_; }

  /// Word ids this copy currently listens to (two fixed, maybe the third).
  std::int64_t word_ab() const { return word_ab_; }
  std::int64_t word_ac() const { return word_ac_; }
  std::optional<std::int64_t> third_word() const { return third_word_; }

  /// Feeds an update to one of the watched words.
  void observe(std::int64_t word, int bit, Value delta);
  /// Convenience: feeds any update, ignoring unwatched words.
  void feed(const Update& update);

  Answer finish() const;

  /// Bits of tracked state right now.
  std::uint64_t tracked_bits() const;

 private:
  void init_words();
  std::optional<Symbol> decode_tracked(const std::vector<Value>& word, bool& valid) const;
  void refresh_third();

  TrackerConfig config_;
  Layout layout_;
  std::array<int, 3> labeling_{};
  std::int64_t u_ = 0;
  std::int64_t word_ab_ = 0;
  std::int64_t word_ac_ = 0;
  int block_bc_ = 0;

  std::vector<Value> ab_;
  std::vector<Value> ac_;
  std::optional<Symbol> vz_;
  std::optional<std::int64_t> third_word_;
  // Binary: -1 unknown, else the bit. +-M: relative current/min/max.
  std::vector<int> third_bits_;
  std::vector<Value> third_cur_, third_min_, third_max_;
};

struct RunReport {
  Answer answer = Answer::kBottom;
  /// Peak bits of a single copy.
  std::uint64_t peak_copy_bits = 0;
  /// Peak bits summed over copies.
  std::uint64_t peak_total_bits = 0;
  std::uint64_t stream_length = 0;
  /// Copies that answered (all agree with tau on valid inputs).
  std::size_t answering_copies = 0;
};

/// Runs `copies` independent trackers over one pass and returns any non-bottom
/// answer (the first copy's, by index).
RunReport amplified_run(const Stream& stream, const TrackerConfig& config, std::size_t copies,
                        std::mt19937_64& rng);

/// Single tracker, single pass.
RunReport weak_run(const Stream& stream, const TrackerConfig& config, std::mt19937_64& rng);

}  // namespace turnlab::promise
