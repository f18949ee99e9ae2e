#include <gtest/gtest.h>

#include <array>
#include <map>
#include <vector>

#include "stoneage/mis.hpp"
#include "stoneage/protocol.hpp"
#include "stoneage/random.hpp"

using namespace stoneage;
using mis::MisState;

namespace {

CountVector counts_with(std::initializer_list<MisState> present) {
  CountVector x(mis::kStateCount, 0);
  for (MisState q : present) x[mis::letter(q)] = 1;
  return x;
}

auto first = [](std::size_t) { return std::size_t{0}; };
auto second = [](std::size_t) { return std::size_t{1}; };

// Two states, one letter; smallest protocol that satisfies every restriction.
Protocol toy() {
  Protocol p;
  p.states = {"yes", "no"};
  p.letters = {"a"};
  p.initial = 1;
  p.yes = 0;
  p.no = 1;
  p.initial_letter = 0;
  p.bound = 1;
  p.rules = {{Rule{{}, {{0, kEpsilon}}}}, {Rule{{}, {{1, kEpsilon}}}}};
  return p;
}

}  // namespace

TEST(Observe, CapsEachLetterAtTheBound) {
  const std::map<NodeId, LetterId> ports{{1, mis::letter(MisState::W)}, {2, mis::letter(MisState::W)}, {3, mis::letter(MisState::D1)}};
  const CountVector x = observe(ports, mis::kStateCount, 1);
  EXPECT_EQ(x, counts_with({MisState::W, MisState::D1}));
}

TEST(Observe, NoPortsGiveTheZeroVector) {
  EXPECT_EQ(observe({}, 4, 3), CountVector(4, 0));
}

TEST(Observe, BoundTwo) {
  const std::map<NodeId, LetterId> ports{{1, 3}, {2, 3}, {3, 3}};
  const CountVector x = observe(ports, 10, 2);
  EXPECT_EQ(x[3], 2u);
}

TEST(Observe, RejectsForeignLetters) {
  EXPECT_THROW(observe({{1, 7}}, 3, 1), Error);
}

TEST(SelectTransition, LoneU0Wins) {
  const auto t = select_transition(mis::protocol(), mis::id(MisState::U0), CountVector(10, 0), first);
  EXPECT_EQ(t.next, mis::id(MisState::W));
  EXPECT_EQ(t.emit, mis::letter(MisState::W));
  EXPECT_EQ(t.outcome, -1);
}

TEST(SelectTransition, U0CoinFirstOutcomeAdvances) {
  const auto t = select_transition(mis::protocol(), mis::id(MisState::U0), counts_with({MisState::U1}), first);
  EXPECT_EQ(t.next, mis::id(MisState::U1));
  EXPECT_EQ(t.emit, mis::letter(MisState::U1));
  EXPECT_EQ(t.outcome, 0);
}

TEST(SelectTransition, UncoveredLRejoinsGreedy) {
  const auto t = select_transition(mis::protocol(), mis::id(MisState::L), CountVector(10, 0), first);
  EXPECT_EQ(t.next, mis::id(MisState::Dp));
  EXPECT_EQ(t.emit, mis::letter(MisState::Dp));
}

TEST(SelectTransition, WReadingWStepsDown) {
  const auto t = select_transition(mis::protocol(), mis::id(MisState::W), counts_with({MisState::W}), first);
  EXPECT_EQ(t.next, mis::id(MisState::Dp));
  EXPECT_EQ(t.emit, mis::letter(MisState::Dp));
}

TEST(SelectTransition, SingletonsNeverDraw) {
  bool drew = false;
  auto spy = [&](std::size_t) {
    drew = true;
    return std::size_t{0};
  };
  select_transition(mis::protocol(), mis::id(MisState::S), CountVector(10, 0), spy);
  EXPECT_FALSE(drew);
  select_transition(mis::protocol(), mis::id(MisState::U2), counts_with({MisState::U2}), spy);
  EXPECT_TRUE(drew);
}

TEST(SelectTransition, RawCountsAreCappedBeforeMatching) {
  CountVector x(10, 0);
  x[mis::letter(MisState::W)] = 5;  // b = 1; the W test has max 1
  const auto t = select_transition(mis::protocol(), mis::id(MisState::L), x, second);
  EXPECT_EQ(t.next, mis::id(MisState::L));
}

TEST(SelectTransition, OutOfRangeDrawThrows) {
  auto bad = [](std::size_t faces) { return faces; };
  EXPECT_THROW(select_transition(mis::protocol(), mis::id(MisState::U0), counts_with({MisState::U0}), bad), Error);
}

TEST(Validate, MisProtocolPasses) {
  const auto rep = validate_protocol(mis::protocol());
  for (const auto& v : rep.violations) ADD_FAILURE() << to_string(v.kind) << ": " << v.message;
  EXPECT_TRUE(rep.ok());
}

TEST(Validate, ToyPasses) { EXPECT_TRUE(validate_protocol(toy()).ok()); }

TEST(Validate, RandomizedOutputIsReported) {
  Protocol p = toy();
  p.rules[0][0].outcomes = {{0, kEpsilon}, {1, 0}};
  const auto rep = validate_protocol(p);
  EXPECT_TRUE(rep.has(ViolationKind::output_determinism));
}

TEST(Validate, MissingGuardForZeroVectorIsReported) {
  Protocol p = toy();
  p.rules[1][0].guard = {{0, 1, 1}};
  EXPECT_TRUE(validate_protocol(p).has(ViolationKind::totality));
}

TEST(Validate, OutputSelfLoopMustNotEmit) {
  Protocol p = toy();
  p.rules[0][0].outcomes = {{0, 0}};
  EXPECT_TRUE(validate_protocol(p).has(ViolationKind::output_emits));
}

TEST(Validate, SameStateForBothOutputs) {
  Protocol p = toy();
  p.no = 0;
  EXPECT_TRUE(validate_protocol(p).has(ViolationKind::output_unique));
}

TEST(Validate, OutputToOtherOutputIsReported) {
  Protocol p = toy();
  p.rules[0][0].outcomes = {{1, 0}};
  EXPECT_TRUE(validate_protocol(p).has(ViolationKind::output_target));
}

TEST(Validate, ZeroBoundAndForeignInitialLetter) {
  Protocol p = toy();
  p.bound = 0;
  EXPECT_TRUE(validate_protocol(p).has(ViolationKind::bound));
  p = toy();
  p.initial_letter = 4;
  EXPECT_TRUE(validate_protocol(p).has(ViolationKind::initial_letter));
}

TEST(Validate, UnreachableRuleIsShadowed) {
  Protocol p = toy();
  p.rules[1].push_back(Rule{{{0, 1, 1}}, {{1, kEpsilon}}});
  const auto rep = validate_protocol(p);
  ASSERT_TRUE(rep.has(ViolationKind::shadowed_rule));
  EXPECT_EQ(rep.violations.front().rule, 1u);
}

TEST(Validate, GuardsReferencingUnknownLettersAreMalformed) {
  Protocol p = toy();
  p.rules[1][0].guard = {{9, 0, 0}};
  EXPECT_TRUE(validate_protocol(p).has(ViolationKind::malformed));
}

TEST(SeededCoins, PureFunctionOfSeedNodeRound) {
  const SeededCoins a(42), b(42), c(43);
  int differ = 0;
  for (NodeId v = 0; v < 50; ++v) {
    for (Round r = 1; r < 20; ++r) {
      EXPECT_EQ(a.draw(v, r, 2), b.draw(v, r, 2));
      differ += a.draw(v, r, 2) != c.draw(v, r, 2);
    }
  }
  EXPECT_GT(differ, 0);
}

TEST(SeededCoins, RoughlyUniform) {
  const SeededCoins coins(7);
  std::array<int, 3> hist{};
  const int trials = 30000;
  for (int k = 0; k < trials; ++k) ++hist[coins.draw(static_cast<NodeId>(k % 97), static_cast<Round>(k / 97 + 1), 3)];
  for (int h : hist) EXPECT_NEAR(h / static_cast<double>(trials), 1.0 / 3, 0.02);
}

TEST(ScriptedCoins, ConsumesInOrderThenFallsBack) {
  ScriptedCoins coins({{1, {1, 0}}});
  EXPECT_EQ(coins.draw(1, 1, 2), 1u);
  EXPECT_EQ(coins.draw(1, 2, 2), 0u);
  EXPECT_THROW(coins.draw(1, 3, 2), Error);
  ScriptedCoins fallback({}, 5);
  EXPECT_EQ(fallback.draw(3, 4, 2), SeededCoins(5).draw(3, 4, 2));
}
