#include "turnlab/promise.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

namespace turnlab::promise {
namespace {

std::string str(std::int64_t v) { return std::to_string(v); }

int side_of(int player, int vertex) { return kPlayerEnds[player][0] == vertex ? 0 : 1; }

std::vector<std::int64_t> permutation(std::int64_t N, std::mt19937_64& rng) {
  std::vector<std::int64_t> p(static_cast<std::size_t>(N));
  std::iota(p.begin(), p.end(), 1);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

std::uint64_t all_ones(int B) { return B >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << B) - 1; }

}  // namespace

int player_of(int x, int y) {
  if (x > y) std::swap(x, y);
  if (x == kA && y == kB) return 0;
  if (x == kB && y == kC) return 1;
  if (x == kA && y == kC) return 2;
  throw std::invalid_argument("player_of needs two distinct triangle vertices");
}

std::vector<std::array<std::int64_t, 3>> validate_promise(const PromiseInstance& inst) {
  if (inst.n < 1) throw PromiseError("n must be positive");
  if (inst.tau != 0 && inst.tau != 1) throw PromiseError("tau must be 0 or 1");
  const std::int64_t N = inst.N();
  const std::size_t per_player = static_cast<std::size_t>(N / 3);

  // neighbor[p][side][vertex] = (other endpoint, z); degree[class][vertex].
  std::array<std::array<std::unordered_map<std::int64_t, std::pair<std::int64_t, int>>, 2>, 3> neighbor;
  std::array<std::vector<int>, 3> degree;
  for (auto& d : degree) d.assign(static_cast<std::size_t>(N + 1), 0);

  for (int p = 0; p < 3; ++p) {
    const auto& list = inst.players[p];
    if (list.size() != per_player) {
      throw PromiseError("player " + str(p) + " holds " + str(static_cast<std::int64_t>(list.size())) +
                         " triples, expected " + str(static_cast<std::int64_t>(per_player)));
    }
    for (const auto& t : list) {
      if (t.u < 1 || t.u > N || t.v < 1 || t.v > N) throw PromiseError("vertex outside [1, N]");
      if (t.z != 0 && t.z != 1) throw PromiseError("label must be a bit");
      if (!neighbor[p][0].emplace(t.u, std::pair{t.v, t.z}).second) {
        throw PromiseError("vertex " + str(t.u) + " repeats in player " + str(p));
      }
      if (!neighbor[p][1].emplace(t.v, std::pair{t.u, t.z}).second) {
        throw PromiseError("vertex " + str(t.v) + " repeats in player " + str(p));
      }
      ++degree[kPlayerEnds[p][0]][t.u];
      ++degree[kPlayerEnds[p][1]][t.v];
    }
  }

  std::vector<std::array<std::int64_t, 3>> triangles;
  const auto& ab = neighbor[player_of(kA, kB)][0];
  const auto& ac = neighbor[player_of(kA, kC)][0];
  const auto& bc = neighbor[player_of(kB, kC)][0];
  for (const auto& [u, vz] : ab) {
    auto w_it = ac.find(u);
    if (w_it == ac.end()) continue;
    auto vw_it = bc.find(vz.first);
    if (vw_it == bc.end() || vw_it->second.first != w_it->second.first) continue;
    const int parity = vz.second ^ vw_it->second.second ^ w_it->second.second;
    if (parity != inst.tau) {
      throw PromiseError("triangle through u = " + str(u) + " has parity " + str(parity) + ", tau is " +
                         str(inst.tau));
    }
    triangles.push_back({u, vz.first, w_it->second.first});
  }
  if (static_cast<std::int64_t>(triangles.size()) != inst.n) {
    throw PromiseError("graph has " + str(static_cast<std::int64_t>(triangles.size())) + " triangles, expected " +
                       str(inst.n));
  }

  // Triangle vertices have degree 2 from their triangle; everything else must
  // be an isolated edge, so both endpoints have degree 1.
  std::array<std::vector<char>, 3> in_triangle;
  for (auto& v : in_triangle) v.assign(static_cast<std::size_t>(N + 1), 0);
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) in_triangle[k][t[k]] = 1;
  }
  for (int p = 0; p < 3; ++p) {
    const int x = kPlayerEnds[p][0], y = kPlayerEnds[p][1];
    for (const auto& t : inst.players[p]) {
      if (in_triangle[x][t.u] && in_triangle[y][t.v]) continue;
      if (degree[x][t.u] != 1 || degree[y][t.v] != 1) {
        throw PromiseError("edge (" + str(t.u) + ", " + str(t.v) + ") of player " + str(p) +
                           " is neither in a triangle nor isolated");
      }
    }
  }
  return triangles;
}

PromiseInstance gen_instance(std::int64_t n, int tau, std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (tau != 0 && tau != 1) throw std::invalid_argument("tau must be 0 or 1");
  PromiseInstance inst;
  inst.n = n;
  inst.tau = tau;
  const std::int64_t N = inst.N();
  const auto pa = permutation(N, rng), pb = permutation(N, rng), pc = permutation(N, rng);
  std::bernoulli_distribution coin(0.5);
  auto bit = [&] { return coin(rng) ? 1 : 0; };

  auto& ab = inst.players[player_of(kA, kB)];
  auto& bc = inst.players[player_of(kB, kC)];
  auto& ac = inst.players[player_of(kA, kC)];
  for (std::int64_t t = 0; t < n; ++t) {
    const int z_uv = bit(), z_vw = bit();
    ab.push_back({pa[t], pb[t], z_uv});
    bc.push_back({pb[t], pc[t], z_vw});
    ac.push_back({pa[t], pc[t], tau ^ z_uv ^ z_vw});
  }
  // Each class spends [n, 10n) on its first player and [10n, 19n) on its second.
  for (std::int64_t k = n; k < 10 * n; ++k) {
    ab.push_back({pa[k], pb[k], bit()});
    bc.push_back({pb[k + 9 * n], pc[k], bit()});
    ac.push_back({pa[k + 9 * n], pc[k + 9 * n], bit()});
  }
  for (auto& list : inst.players) std::shuffle(list.begin(), list.end(), rng);
  return inst;
}

int word_bits(std::int64_t N) { return ceil_log2(static_cast<std::uint64_t>(N)) + 2; }

std::uint64_t encode_symbol(const std::optional<Symbol>& symbol, int B) {
  if (!symbol) return 0;
  const auto l = static_cast<std::uint64_t>(symbol->l);
  return symbol->z ? (l ^ all_ones(B)) : l;
}

std::optional<std::optional<Symbol>> decode_word(std::uint64_t word, std::int64_t N, int B) {
  if (word > all_ones(B)) return std::nullopt;
  if (word == 0) return std::optional<Symbol>{};
  const int z = static_cast<int>((word >> (B - 1)) & 1U);
  const std::uint64_t l = z ? (word ^ all_ones(B)) : word;
  if (l < 1 || l > static_cast<std::uint64_t>(N)) return std::nullopt;
  return std::optional<Symbol>{Symbol{static_cast<std::int64_t>(l), z}};
}

EncodedInstance encode(const PromiseInstance& instance, Variant variant, std::int64_t M) {
  validate_promise(instance);
  if (variant == Variant::kPlusMinus && M < 1) throw std::invalid_argument("M must be positive");
  EncodedInstance enc;
  enc.n = instance.n;
  enc.variant = variant;
  enc.M = variant == Variant::kPlusMinus ? M : 1;
  enc.layout = {instance.N(), word_bits(instance.N())};
  const auto& L = enc.layout;
  for (auto& block : enc.symbols) block.assign(static_cast<std::size_t>(L.N), std::nullopt);
  for (int p = 0; p < 3; ++p) {
    for (const auto& t : instance.players[p]) {
      enc.symbols[2 * p][t.u - 1] = Symbol{t.v, t.z};
      enc.symbols[2 * p + 1][t.v - 1] = Symbol{t.u, t.z};
    }
  }
  enc.bits.assign(L.dimension(), 0);
  for (int block = 0; block < 6; ++block) {
    for (std::int64_t pos = 1; pos <= L.N; ++pos) {
      const std::uint64_t w = encode_symbol(enc.symbols[block][pos - 1], L.B);
      const std::int64_t id = L.word_id(block, pos);
      for (int i = 0; i < L.B; ++i) {
        const Value b = static_cast<Value>((w >> i) & 1U);
        enc.bits[L.coordinate(id, i) - 1] = variant == Variant::kBinary ? b : (b ? M : -M);
      }
    }
  }
  return enc;
}

PromiseInstance decode(const EncodedInstance& enc) {
  PromiseInstance inst;
  inst.n = enc.n;
  const auto& L = enc.layout;
  if (enc.bits.size() != L.dimension()) throw PromiseError("encoding has the wrong dimension");
  for (int p = 0; p < 3; ++p) {
    for (std::int64_t pos = 1; pos <= L.N; ++pos) {
      const std::int64_t id = L.word_id(2 * p, pos);
      std::uint64_t w = 0;
      for (int i = 0; i < L.B; ++i) {
        const Value v = enc.bits[L.coordinate(id, i) - 1];
        int b = 0;
        if (enc.variant == Variant::kBinary) {
          if (v != 0 && v != 1) throw PromiseError("binary encoding has a non-bit entry");
          b = static_cast<int>(v);
        } else {
          if (v != enc.M && v != -enc.M) throw PromiseError("+-M encoding has an entry outside {-M, M}");
          b = v > 0;
        }
        w |= static_cast<std::uint64_t>(b) << i;
      }
      const auto symbol = decode_word(w, L.N, L.B);
      if (!symbol) throw PromiseError("invalid inner code word at block " + str(2 * p) + ", position " + str(pos));
      if (*symbol) inst.players[p].push_back({pos, (*symbol)->l, (*symbol)->z});
    }
  }
  // tau is whatever parity the triangles share.
  inst.tau = 0;
  try {
    validate_promise(inst);
  } catch (const PromiseError&) {
    inst.tau = 1;
    validate_promise(inst);
  }
  return inst;
}

std::vector<Value> zeta(const std::vector<Value>& word, std::int64_t M) {
  std::vector<Value> out(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) out[i] = word[i] > 0 ? M : (word[i] < 0 ? -M : 0);
  return out;
}

std::vector<int> eta(const std::vector<Value>& word, std::int64_t M) {
  std::vector<int> out(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i] == M) {
      out[i] = 1;
    } else if (word[i] == -M) {
      out[i] = 0;
    } else {
      throw std::domain_error("eta is only defined on {-M, M} entries");
    }
  }
  return out;
}

std::optional<int> box_bit_decision(Value current, Value min, Value max, std::int64_t M) {
  if (min <= current - M) return 1;
  if (max >= current + M) return 0;
  return std::nullopt;
}

Stream gen_stream(const EncodedInstance& target, const Schedule& schedule, std::mt19937_64& rng) {
  const auto& L = target.layout;
  const std::size_t dim = L.dimension();
  const bool binary = target.variant == Variant::kBinary;
  const std::int64_t M = target.M;
  if (target.bits.size() != dim) throw std::invalid_argument("target has the wrong dimension");
  if (schedule.churn < 0) throw std::invalid_argument("churn must be nonnegative");
  if (schedule.kind == Schedule::Kind::kLastPlayer && (schedule.last_player < 0 || schedule.last_player > 2)) {
    throw std::invalid_argument("last player must be 0, 1 or 2");
  }
  for (Value v : target.bits) {
    if (binary ? (v != 0 && v != 1) : (v != M && v != -M)) {
      throw std::invalid_argument("target is not a valid encoding for its variant");
    }
  }

  if (schedule.kind == Schedule::Kind::kInsertOnly) return kappa(target.frequency());

  // Per-coordinate histories, flattened.
  std::vector<Value> deltas;
  std::vector<std::size_t> start(dim + 1, 0);
  std::uniform_int_distribution<int> rounds(0, schedule.churn);
  std::uniform_int_distribution<Value> level(-(2 * M - 1), 2 * M - 1);
  for (std::size_t k = 0; k < dim; ++k) {
    start[k] = deltas.size();
    const int c = rounds(rng);
    if (binary) {
      for (int r = 0; r < c; ++r) {
        deltas.push_back(1);
        deltas.push_back(-1);
      }
      if (target.bits[k] == 1) deltas.push_back(1);
    } else {
      Value at = 0;
      auto move_to = [&](Value next) {
        if (next != at) deltas.push_back(next - at);
        at = next;
      };
      for (int r = 0; r < c; ++r) move_to(level(rng));
      move_to(target.bits[k]);
    }
  }
  start[dim] = deltas.size();

  auto interleave = [&](std::vector<Coordinate>& order) {
    std::shuffle(order.begin(), order.end(), rng);
  };
  std::vector<Coordinate> first, last;
  for (std::size_t k = 0; k < dim; ++k) {
    const Coordinate c = k + 1;
    const int player = static_cast<int>(L.word_of(c) / L.N) / 2;
    auto& dest = schedule.kind == Schedule::Kind::kLastPlayer && player == schedule.last_player ? last : first;
    for (std::size_t t = start[k]; t < start[k + 1]; ++t) dest.push_back(c);
  }
  interleave(first);
  interleave(last);

  std::vector<Update> updates;
  updates.reserve(deltas.size());
  std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
  for (const auto* order : {&first, &last}) {
    for (Coordinate c : *order) updates.push_back({c, deltas[cursor[c - 1]++]});
  }
  return Stream(dim, std::move(updates));
}

Tracker::Tracker(const TrackerConfig& config, std::mt19937_64& rng) : config_(config) {
  layout_ = {30 * config.n, word_bits(30 * config.n)};
  std::array<int, 3> lab = {kA, kB, kC};
  std::shuffle(lab.begin(), lab.end(), rng);
  labeling_ = lab;
  u_ = std::uniform_int_distribution<std::int64_t>(1, layout_.N)(rng);
  init_words();
}

Tracker::Tracker(const TrackerConfig& config, std::array<int, 3> labeling, std::int64_t u)
    : config_(config), labeling_(labeling), u_(u) {
  layout_ = {30 * config.n, word_bits(30 * config.n)};
  if (u < 1 || u > layout_.N) throw std::invalid_argument("u outside [1, N]");
  init_words();
}

void Tracker::init_words() {
  if (config_.n < 1) throw std::invalid_argument("n must be positive");
  if (config_.variant == Variant::kPlusMinus && config_.M < 1) throw std::invalid_argument("M must be positive");
  const int a = labeling_[0], b = labeling_[1], c = labeling_[2];
  const int p_ab = player_of(a, b), p_ac = player_of(a, c), p_bc = player_of(b, c);
  word_ab_ = layout_.word_id(2 * p_ab + side_of(p_ab, a), u_);
  word_ac_ = layout_.word_id(2 * p_ac + side_of(p_ac, a), u_);
  block_bc_ = 2 * p_bc + side_of(p_bc, b);
  ab_.assign(static_cast<std::size_t>(layout_.B), 0);
  ac_.assign(static_cast<std::size_t>(layout_.B), 0);
}

std::optional<Symbol> Tracker::decode_tracked(const std::vector<Value>& word, bool& valid) const {
  std::uint64_t w = 0;
  valid = false;
  for (int i = 0; i < layout_.B; ++i) {
    const Value v = word[i];
    int b = 0;
    if (config_.variant == Variant::kBinary) {
      if (v != 0 && v != 1) return std::nullopt;
      b = static_cast<int>(v);
    } else {
      if (v == 0) return std::nullopt;
      b = v > 0;
    }
    w |= static_cast<std::uint64_t>(b) << i;
  }
  const auto symbol = decode_word(w, layout_.N, layout_.B);
  if (!symbol) return std::nullopt;
  valid = true;
  return *symbol;
}

void Tracker::refresh_third() {
  bool valid = false;
  const auto symbol = decode_tracked(ab_, valid);
  if (!valid || !symbol || (vz_ && *vz_ == *symbol)) return;
  vz_ = symbol;
  third_word_ = layout_.word_id(block_bc_, symbol->l);
  const auto B = static_cast<std::size_t>(layout_.B);
  if (config_.variant == Variant::kBinary) {
    third_bits_.assign(B, -1);
  } else {
    third_cur_.assign(B, 0);
    third_min_.assign(B, 0);
    third_max_.assign(B, 0);
  }
}

void Tracker::observe(std::int64_t word, int bit, Value delta) {
  if (word == word_ab_) {
    ab_[bit] = checked_add(ab_[bit], delta);
    refresh_third();
  } else if (word == word_ac_) {
    ac_[bit] = checked_add(ac_[bit], delta);
  } else if (third_word_ && word == *third_word_) {
    if (config_.variant == Variant::kBinary) {
      if (delta != 0) third_bits_[bit] = delta > 0 ? 1 : 0;
    } else {
      Value& cur = third_cur_[bit];
      cur = checked_add(cur, delta);
      third_min_[bit] = std::min(third_min_[bit], cur);
      third_max_[bit] = std::max(third_max_[bit], cur);
    }
  }
}

void Tracker::feed(const Update& update) {
  if (update.index == 0 || update.index > layout_.dimension()) throw std::out_of_range("update outside the encoding");
  observe(layout_.word_of(update.index), layout_.bit_of(update.index), update.delta);
}

Answer Tracker::finish() const {
  bool valid_ab = false, valid_ac = false;
  const auto uv = decode_tracked(ab_, valid_ab);
  const auto uw = decode_tracked(ac_, valid_ac);
  if (!valid_ab || !valid_ac || !uv || !uw) return Answer::kBottom;
  if (!vz_ || !(*vz_ == *uv) || !third_word_) return Answer::kBottom;

  std::optional<int> bit_value;
  int index = 0;
  for (int i = 0; i < layout_.B && !bit_value; ++i) {
    if (config_.variant == Variant::kBinary) {
      if (third_bits_[i] >= 0) bit_value = third_bits_[i];
    } else {
      bit_value = box_bit_decision(third_cur_[i], third_min_[i], third_max_[i], config_.M);
    }
    index = i;
  }
  if (!bit_value) return Answer::kBottom;
  const int z_vw = *bit_value ^ static_cast<int>((uw->l >> index) & 1);
  return (uv->z ^ z_vw ^ uw->z) ? Answer::kOne : Answer::kZero;
}

std::uint64_t Tracker::tracked_bits() const {
  const auto B = static_cast<std::uint64_t>(layout_.B);
  const auto log_n = static_cast<std::uint64_t>(ceil_log2(static_cast<std::uint64_t>(layout_.N)));
  const bool binary = config_.variant == Variant::kBinary;
  const auto M = static_cast<std::uint64_t>(config_.M);
  const std::uint64_t entry = binary ? 1 : static_cast<std::uint64_t>(ceil_log2(4 * M - 1));
  std::uint64_t bits = 3 + log_n;         // labeling and u
  bits += 2 * B * entry;                  // the two full words
  bits += log_n + 2;                      // (v', z') and whether it is set
  if (third_word_) {
    bits += binary ? 2 * B : 3 * B * static_cast<std::uint64_t>(ceil_log2(8 * M - 3));
  }
  return bits;
}

RunReport amplified_run(const Stream& stream, const TrackerConfig& config, std::size_t copies,
                        std::mt19937_64& rng) {
  if (copies == 0) throw std::invalid_argument("need at least one copy");
  std::vector<Tracker> trackers;
  trackers.reserve(copies);
  for (std::size_t k = 0; k < copies; ++k) trackers.emplace_back(config, rng);
  const Layout& L = trackers.front().layout();
  if (stream.dimension() != L.dimension()) throw std::invalid_argument("stream dimension does not match n");

  std::vector<std::vector<std::uint32_t>> subscribers(static_cast<std::size_t>(6 * L.N));
  std::vector<SpaceMeter> meters(copies);
  SpaceMeter total;
  std::uint64_t total_bits = 0;
  for (std::uint32_t k = 0; k < copies; ++k) {
    subscribers[trackers[k].word_ab()].push_back(k);
    subscribers[trackers[k].word_ac()].push_back(k);
    meters[k].set(trackers[k].tracked_bits());
    total_bits += meters[k].current();
  }
  total.set(total_bits);

  RunReport report;
  stream.for_each([&](const Update& u) {
    ++report.stream_length;
    const std::int64_t word = L.word_of(u.index);
    const int bit = L.bit_of(u.index);
    auto& list = subscribers[word];
    for (std::size_t idx = 0; idx < list.size(); ++idx) {
      const std::uint32_t k = list[idx];
      Tracker& t = trackers[k];
      const auto before = t.third_word();
      t.observe(word, bit, u.delta);
      const auto after = t.third_word();
      if (before == after) continue;
      if (before) {
        auto& old = subscribers[*before];
        old.erase(std::find(old.begin(), old.end(), k));
      }
      subscribers[*after].push_back(k);
      total_bits -= meters[k].current();
      meters[k].set(t.tracked_bits());
      total_bits += meters[k].current();
      total.set(total_bits);
    }
    return true;
  });

  for (std::size_t k = 0; k < copies; ++k) {
    report.peak_copy_bits = std::max(report.peak_copy_bits, meters[k].peak());
    const Answer a = trackers[k].finish();
    if (a == Answer::kBottom) continue;
    ++report.answering_copies;
    if (report.answer == Answer::kBottom) report.answer = a;
  }
  report.peak_total_bits = total.peak();
  return report;
}

RunReport weak_run(const Stream& stream, const TrackerConfig& config, std::mt19937_64& rng) {
  return amplified_run(stream, config, 1, rng);
}

}  // namespace turnlab::promise
