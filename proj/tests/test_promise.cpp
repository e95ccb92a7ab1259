#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "decoding_oracle.hpp"
#include "turnlab/promise.hpp"

using namespace turnlab;
using namespace turnlab::promise;

namespace {

const std::array<std::array<int, 3>, 6> kLabelings = {
    {{kA, kB, kC}, {kA, kC, kB}, {kB, kA, kC}, {kB, kC, kA}, {kC, kA, kB}, {kC, kB, kA}}};

// Triangles by brute force over all triples of player edges.
std::set<std::array<std::int64_t, 3>> brute_triangles(const PromiseInstance& inst) {
  std::set<std::array<std::int64_t, 3>> out;
  for (const auto& ab : inst.players[0]) {
    for (const auto& bc : inst.players[1]) {
      if (bc.u != ab.v) continue;
      for (const auto& ac : inst.players[2]) {
        if (ac.u == ab.u && ac.v == bc.v) out.insert({ab.u, ab.v, bc.v});
      }
    }
  }
  return out;
}

// Expected answer of a tracker fed the insert-only stream: tau iff u is a
// triangle vertex of class a and the (a, b) word is complete before the
// (b, c) word starts, bottom otherwise.
Answer insert_only_expectation(const PromiseInstance& inst, std::array<int, 3> lab, std::int64_t u) {
  const int a = lab[0], b = lab[1], c = lab[2];
  bool in_triangle = false;
  for (const auto& t : brute_triangles(inst)) in_triangle |= t[a] == u;
  if (!in_triangle) return Answer::kBottom;
  auto block = [](int x, int y) {
    const int p = player_of(x, y);
    return 2 * p + (kPlayerEnds[p][0] == x ? 0 : 1);
  };
  if (block(a, b) < block(b, c)) return inst.tau ? Answer::kOne : Answer::kZero;
  return Answer::kBottom;
}

Answer run_tracker(const Stream& s, const TrackerConfig& cfg, std::array<int, 3> lab, std::int64_t u) {
  Tracker t(cfg, lab, u);
  s.for_each([&](const Update& up) {
    t.feed(up);
    return true;
  });
  return t.finish();
}

std::vector<Triple> sorted(std::vector<Triple> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(PromiseInstance, GeneratedSizes) {
  std::mt19937_64 rng(1);
  for (int tau : {0, 1}) {
    auto inst = gen_instance(1, tau, rng);
    EXPECT_EQ(inst.N(), 30);
    for (const auto& list : inst.players) EXPECT_EQ(list.size(), 10U);
    const auto tri = validate_promise(inst);
    ASSERT_EQ(tri.size(), 1U);
    EXPECT_EQ(brute_triangles(inst).size(), 1U);
  }
}

TEST(PromiseInstance, GeneratedSatisfyPromise) {
  std::mt19937_64 rng(2);
  for (std::int64_t n : {1, 2, 3, 5}) {
    for (int rep = 0; rep < 10; ++rep) {
      const int tau = rep % 2;
      auto inst = gen_instance(n, tau, rng);
      const auto tri = validate_promise(inst);
      const auto brute = brute_triangles(inst);
      EXPECT_EQ(std::set(tri.begin(), tri.end()), brute);
      EXPECT_EQ(static_cast<std::int64_t>(brute.size()), n);
      std::map<std::pair<std::int64_t, std::int64_t>, int> label[3];
      for (int p = 0; p < 3; ++p) {
        for (const auto& t : inst.players[p]) label[p][{t.u, t.v}] = t.z;
      }
      for (const auto& t : brute) {
        const int parity = label[0][{t[0], t[1]}] ^ label[1][{t[1], t[2]}] ^ label[2][{t[0], t[2]}];
        EXPECT_EQ(parity, tau);
      }
    }
  }
}

TEST(PromiseInstance, ValidatorRejects) {
  std::mt19937_64 rng(3);
  const auto base = gen_instance(1, 0, rng);
  auto tri = validate_promise(base).front();

  auto flip = base;
  for (auto& t : flip.players[0]) {
    if (t.u == tri[0]) t.z ^= 1;
  }
  EXPECT_THROW(validate_promise(flip), PromiseError);

  auto wrong_tau = base;
  wrong_tau.tau = 1;
  EXPECT_THROW(validate_promise(wrong_tau), PromiseError);

  auto dup = base;
  dup.players[1][1].u = dup.players[1][0].u;
  EXPECT_THROW(validate_promise(dup), PromiseError);

  auto short_list = base;
  short_list.players[2].pop_back();
  EXPECT_THROW(validate_promise(short_list), PromiseError);

  // Break the triangle's BC edge into a path.
  auto path = base;
  for (auto& t : path.players[1]) {
    if (t.u == tri[1]) {
      std::set<std::int64_t> used;
      for (const auto& x : path.players[1]) used.insert(x.v);
      std::int64_t fresh = 1;
      while (used.count(fresh)) ++fresh;
      t.v = fresh;
    }
  }
  EXPECT_THROW(validate_promise(path), PromiseError);
}

TEST(PromiseCode, SymbolExamples) {
  const int B = word_bits(30);
  EXPECT_EQ(B, 7);
  EXPECT_EQ(encode_symbol(std::nullopt, B), 0U);
  EXPECT_EQ(encode_symbol(Symbol{5, 0}, B), 5U);
  EXPECT_EQ(encode_symbol(Symbol{5, 1}, B), 122U);
  EXPECT_EQ(encode_symbol(Symbol{30, 1}, B), 97U);
  EXPECT_EQ(decode_word(122, 30, B), std::optional<std::optional<Symbol>>(Symbol{5, 1}));
  EXPECT_EQ(decode_word(0, 30, B), std::optional<std::optional<Symbol>>(std::optional<Symbol>{}));
  EXPECT_FALSE(decode_word(31, 30, B).has_value());
  EXPECT_FALSE(decode_word(127, 30, B).has_value());
  EXPECT_FALSE(decode_word(128, 30, B).has_value());
  EXPECT_EQ(word_bits(120), 9);
  EXPECT_EQ(word_bits(128), 9);
  EXPECT_EQ(word_bits(129), 10);
}

TEST(PromiseCode, InnerCodeExhaustive) {
  for (std::int64_t N : {30, 60, 240}) {
    const int B = word_bits(N);
    int valid = 0;
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << B); ++w) {
      const auto d = decode_word(w, N, B);
      if (!d) continue;
      ++valid;
      EXPECT_EQ(encode_symbol(*d, B), w);
    }
    EXPECT_EQ(valid, 2 * N + 1);
    // z flips the top bit, so the two labels of one l never collide.
    for (std::int64_t l = 1; l <= N; ++l) {
      EXPECT_EQ((encode_symbol(Symbol{l, 0}, B) >> (B - 1)) & 1U, 0U);
      EXPECT_EQ((encode_symbol(Symbol{l, 1}, B) >> (B - 1)) & 1U, 1U);
    }
  }
}

TEST(PromiseCode, EncodeDecodeRoundTrip) {
  std::mt19937_64 rng(4);
  for (auto variant : {Variant::kBinary, Variant::kPlusMinus}) {
    for (std::int64_t n : {1, 3}) {
      for (int tau : {0, 1}) {
        auto inst = gen_instance(n, tau, rng);
        auto enc = encode(inst, variant, 3);
        EXPECT_EQ(enc.bits.size(), static_cast<std::size_t>(6 * inst.N() * word_bits(inst.N())));
        for (Value v : enc.bits) {
          if (variant == Variant::kBinary) {
            EXPECT_TRUE(v == 0 || v == 1);
          } else {
            EXPECT_TRUE(v == 3 || v == -3);
          }
        }
        auto back = decode(enc);
        EXPECT_EQ(back.tau, tau);
        for (int p = 0; p < 3; ++p) EXPECT_EQ(sorted(back.players[p]), sorted(inst.players[p]));
      }
    }
  }
}

TEST(PromiseCode, BothSidesCarryTheEdge) {
  std::mt19937_64 rng(5);
  auto inst = gen_instance(2, 1, rng);
  auto enc = encode(inst, Variant::kBinary);
  for (int p = 0; p < 3; ++p) {
    for (const auto& t : inst.players[p]) {
      EXPECT_EQ(enc.symbols[2 * p][t.u - 1], (Symbol{t.v, t.z}));
      EXPECT_EQ(enc.symbols[2 * p + 1][t.v - 1], (Symbol{t.u, t.z}));
    }
  }
}

TEST(PromiseCode, ZetaEta) {
  EXPECT_EQ(zeta({3, -1, 0, 2}, 2), (std::vector<Value>{2, -2, 0, 2}));
  EXPECT_EQ(eta({2, -2, 2}, 2), (std::vector<int>{1, 0, 1}));
  EXPECT_THROW(eta({2, 1}, 2), std::domain_error);
  EXPECT_THROW(eta({0}, 2), std::domain_error);
}

TEST(PromiseStream, FrequencyAndConstraints) {
  std::mt19937_64 rng(6);
  for (auto variant : {Variant::kBinary, Variant::kPlusMinus}) {
    for (std::int64_t M : {2, 8}) {
      if (variant == Variant::kBinary && M != 2) continue;
      auto inst = gen_instance(2, 0, rng);
      auto enc = encode(inst, variant, M);
      const auto constraint =
          variant == Variant::kBinary ? StreamConstraint::binary() : StreamConstraint::box(2 * M - 1);
      for (const auto& sched : {Schedule::insert_only(), Schedule::random_churn(3), Schedule::last_player_of(0),
                                Schedule::last_player_of(1, 2), Schedule::last_player_of(2, 4)}) {
        auto s = gen_stream(enc, sched, rng);
        EXPECT_EQ(freq(s), enc.frequency());
        EXPECT_TRUE(check_constraint(s, constraint).satisfied);
        EXPECT_FALSE(has_zero_delta(s));
        if (sched.kind == Schedule::Kind::kInsertOnly) {
          auto ups = s.materialize();
          EXPECT_TRUE(std::is_sorted(ups.begin(), ups.end(),
                                     [](const Update& x, const Update& y) { return x.index < y.index; }));
        }
        if (sched.kind == Schedule::Kind::kLastPlayer) {
          bool seen_last = false;
          s.for_each([&](const Update& u) {
            const int player = static_cast<int>(enc.layout.word_of(u.index) / enc.layout.N) / 2;
            if (player == sched.last_player) seen_last = true;
            EXPECT_TRUE(!seen_last || player == sched.last_player);
            return true;
          });
        }
      }
    }
  }
}

TEST(PromiseStream, ChurnKeepsPerCoordinateOrder) {
  std::mt19937_64 rng(7);
  auto inst = gen_instance(1, 1, rng);
  auto enc = encode(inst, Variant::kBinary);
  auto s = gen_stream(enc, Schedule::random_churn(4), rng);
  std::vector<Value> last(enc.bits.size(), 0);
  std::vector<Value> cur(enc.bits.size(), 0);
  s.for_each([&](const Update& u) {
    // Binary histories alternate +1, -1.
    EXPECT_NE(u.delta, last[u.index - 1]);
    last[u.index - 1] = u.delta;
    cur[u.index - 1] += u.delta;
    return true;
  });
  EXPECT_EQ(cur, enc.bits);
}

TEST(PromiseTracker, InsertOnlyMatchesOracle) {
  std::mt19937_64 rng(8);
  for (auto variant : {Variant::kBinary, Variant::kPlusMinus}) {
    for (int tau : {0, 1}) {
      auto inst = gen_instance(1, tau, rng);
      auto enc = encode(inst, variant, 2);
      auto s = gen_stream(enc, Schedule::insert_only(), rng);
      const TrackerConfig cfg{1, variant, 2};
      for (const auto& lab : kLabelings) {
        for (std::int64_t u = 1; u <= inst.N(); ++u) {
          EXPECT_EQ(run_tracker(s, cfg, lab, u), insert_only_expectation(inst, lab, u))
              << "labeling " << lab[0] << lab[1] << lab[2] << " u " << u;
        }
      }
    }
  }
}

TEST(PromiseTracker, AnswersTauWhenThirdWordComesLast) {
  std::mt19937_64 rng(9);
  for (auto variant : {Variant::kBinary, Variant::kPlusMinus}) {
    for (int tau : {0, 1}) {
      auto inst = gen_instance(2, tau, rng);
      auto enc = encode(inst, variant, 4);
      const auto tri = validate_promise(inst);
      const TrackerConfig cfg{2, variant, 4};
      for (const auto& lab : kLabelings) {
        auto s = gen_stream(enc, Schedule::last_player_of(player_of(lab[1], lab[2]), 3), rng);
        for (const auto& t : tri) {
          EXPECT_EQ(static_cast<int>(run_tracker(s, cfg, lab, t[lab[0]])), tau);
        }
      }
    }
  }
}

TEST(PromiseTracker, BottomOffTriangles) {
  std::mt19937_64 rng(10);
  auto inst = gen_instance(1, 1, rng);
  auto enc = encode(inst, Variant::kBinary);
  auto s = gen_stream(enc, Schedule::random_churn(2), rng);
  const auto tri = validate_promise(inst).front();
  const TrackerConfig cfg{1, Variant::kBinary, 1};
  for (const auto& lab : kLabelings) {
    for (std::int64_t u = 1; u <= inst.N(); ++u) {
      if (u == tri[lab[0]]) continue;
      EXPECT_EQ(run_tracker(s, cfg, lab, u), Answer::kBottom);
    }
  }
}

TEST(PromiseTracker, NeverWrong) {
  std::mt19937_64 rng(11);
  int answered = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto variant = trial % 2 ? Variant::kBinary : Variant::kPlusMinus;
    const std::int64_t M = trial % 4 < 2 ? 2 : 8;
    const int tau = (trial / 2) % 2;
    auto inst = gen_instance(1, tau, rng);
    auto enc = encode(inst, variant, M);
    const Schedule sched =
        trial % 3 == 0 ? Schedule::insert_only()
                       : (trial % 3 == 1 ? Schedule::random_churn(3) : Schedule::last_player_of(trial % 3, 2));
    auto s = gen_stream(enc, sched, rng);
    const TrackerConfig cfg{1, variant, M};
    for (const auto& lab : kLabelings) {
      for (const auto& t : validate_promise(inst)) {
        const Answer a = run_tracker(s, cfg, lab, t[lab[0]]);
        EXPECT_TRUE(a == Answer::kBottom || static_cast<int>(a) == tau);
        answered += a != Answer::kBottom;
      }
    }
  }
  EXPECT_GT(answered, 0);
}

TEST(PromiseTracker, TrackedBits) {
  std::mt19937_64 rng(12);
  Tracker t4(TrackerConfig{4, Variant::kBinary, 1}, rng);
  // 3 + 7 (u) + 2 * 9 (words) + 7 + 2 (v', z') and no third word yet.
  EXPECT_EQ(t4.tracked_bits(), 37U);
  Tracker pm(TrackerConfig{4, Variant::kPlusMinus, 2}, rng);
  EXPECT_EQ(pm.tracked_bits(), 3U + 7U + 2U * 9U * 3U + 9U);
}

TEST(PromiseTracker, AmplifiedRun) {
  std::mt19937_64 rng(13);
  auto inst = gen_instance(1, 1, rng);
  auto enc = encode(inst, Variant::kBinary);
  auto s = gen_stream(enc, Schedule::random_churn(2), rng);
  auto report = amplified_run(s, TrackerConfig{1, Variant::kBinary, 1}, 360, rng);
  EXPECT_EQ(report.answer, Answer::kOne);
  EXPECT_GT(report.answering_copies, 0U);
  EXPECT_EQ(report.stream_length, s.length());
  EXPECT_GE(report.peak_total_bits, 360 * 31U);
  // Worst single copy: 3 + 5 + 14 + 7 + 14.
  EXPECT_LE(report.peak_copy_bits, 43U);

  // Per-word dispatch agrees with feeding every copy every update.
  std::mt19937_64 a(99), b(99);
  auto fast = amplified_run(s, TrackerConfig{1, Variant::kBinary, 1}, 50, a);
  std::vector<Tracker> slow;
  for (int k = 0; k < 50; ++k) slow.emplace_back(TrackerConfig{1, Variant::kBinary, 1}, b);
  s.for_each([&](const Update& u) {
    for (auto& t : slow) t.feed(u);
    return true;
  });
  std::size_t answering = 0;
  for (const auto& t : slow) answering += t.finish() != Answer::kBottom;
  EXPECT_EQ(fast.answering_copies, answering);
}

TEST(PromiseTracker, RejectsMismatchedStream) {
  std::mt19937_64 rng(14);
  Stream s(10, {{1, 1}});
  EXPECT_THROW(weak_run(s, TrackerConfig{1, Variant::kBinary, 1}, rng), std::invalid_argument);
}

TEST(DecodingLemma, ExhaustiveSmall) {
  const auto tally = oracle::check_decoding_lemma(2, 6, 2);
  EXPECT_GT(tally.streams, 1000U);
  EXPECT_EQ(tally.implication_failures, 0U);
  EXPECT_EQ(tally.iff_failures, 0U);
  EXPECT_EQ(tally.decision_failures, 0U);
}

TEST(DecodingLemma, BoxDecision) {
  EXPECT_EQ(box_bit_decision(2, 0, 2, 2), std::optional<int>(1));
  EXPECT_EQ(box_bit_decision(-2, -2, 0, 2), std::optional<int>(0));
  EXPECT_EQ(box_bit_decision(0, -1, 1, 2), std::nullopt);
}
