#include <gtest/gtest.h>

#include <sstream>
#include <stdexcept>

#include "stoneage/experiments.hpp"

using namespace stoneage;
using namespace stoneage::experiments;

TEST(Stats, Summaries) {
  const Stats odd = summarize({5, 1, 3});
  EXPECT_EQ(odd.count, 3u);
  EXPECT_DOUBLE_EQ(odd.median, 3);
  EXPECT_DOUBLE_EQ(odd.mean, 3);
  EXPECT_DOUBLE_EQ(odd.min, 1);
  EXPECT_DOUBLE_EQ(odd.max, 5);
  EXPECT_DOUBLE_EQ(summarize({4, 1, 2, 10}).median, 3);
  EXPECT_EQ(summarize({}).count, 0u);
}

TEST(Stats, Formatting) {
  EXPECT_EQ(fmt(0.5), "0.5");
  EXPECT_EQ(fmt(1.0 / 3), "0.333333");
  EXPECT_EQ(fmt(std::size_t{42}), "42");
}

TEST(Table, CsvHasSchemaThenHeader) {
  Table t{"demo/1", {"a", "b"}, {{"1", "2"}, {"3", "4"}}};
  std::ostringstream os;
  t.write_csv(os);
  EXPECT_EQ(os.str(), "# demo/1\na,b\n1,2\n3,4\n");
}

TEST(ParallelMap, KeepsOrderAndPropagatesErrors) {
  const auto sq = parallel_map(50, [](std::size_t k) { return k * k; }, 4);
  for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(sq[k], k * k);
  EXPECT_EQ(parallel_map(50, [](std::size_t k) { return k * k; }, 1), sq);
  EXPECT_THROW(parallel_map(8, [](std::size_t k) -> int { if (k == 5) throw std::runtime_error("x"); return 0; }, 3),
               std::runtime_error);
}

TEST(TrialSeeds, DeterministicAndDistinct) {
  const TrialSeeds a = TrialSeeds::of(7, 3), b = TrialSeeds::of(7, 3), c = TrialSeeds::of(7, 4);
  EXPECT_EQ(a.coins, b.coins);
  EXPECT_NE(a.coins, c.coins);
  EXPECT_NE(a.graph, a.schedule);
  EXPECT_NE(a.schedule, a.coins);
}

TEST(Budget, Formula) {
  EXPECT_EQ(default_budget(1, 0), 50u);
  EXPECT_EQ(default_budget(16, 0), 50u * 16);
  EXPECT_EQ(default_budget(16, 3), 50u * 4 * 16);
  EXPECT_DOUBLE_EQ(log2_squared(1024), 100);
}

TEST(Families, Shapes) {
  EXPECT_EQ(family_graph("clique", 6, 1).edge_count(), 15u);
  EXPECT_EQ(family_graph("path", 6, 1).edge_count(), 5u);
  EXPECT_EQ(family_graph("gnp_half", 30, 2), gen::gnp(30, 0.5, 2));
  EXPECT_THROW(family_graph("torus", 6, 1), Error);
}

TEST(Trial, MatchesMetricsOnTheSameTrace) {
  const Graph g = gen::gnp(30, 0.2, 5);
  gen::ScheduleParams sp;
  sp.changes = 4;
  sp.spacing = 6;
  const Schedule s = gen::random_mix(g, sp, 5);
  const Trace t = simulate(g, s, 9);
  const Trial tr = evaluate(t, g, s);
  const auto rep = metrics::confinement_report(t);
  EXPECT_EQ(tr.global_runtime, rep.global_runtime);
  EXPECT_EQ(tr.max_non_affected, rep.max_non_affected_runtime);
  EXPECT_EQ(tr.affected, rep.affected);
  EXPECT_TRUE(tr.greedy_confined);
  EXPECT_FALSE(tr.budget_hit);
  EXPECT_EQ(tr.changes, 4u);
}

TEST(Suites, StaticScaling) {
  const auto rows = static_scaling({"clique", "path"}, {8, 16}, 5, 1);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.runtime.count, 5u);
    EXPECT_EQ(r.budget_hits, 0u);
    EXPECT_DOUBLE_EQ(r.ratio, r.runtime.median / log2_squared(r.n));
  }
  EXPECT_EQ(table(rows).rows.size(), 4u);
  const auto again = static_scaling({"clique", "path"}, {8, 16}, 5, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_DOUBLE_EQ(again[i].runtime.mean, rows[i].runtime.mean);
}

TEST(Suites, DynamicAmortizedWithoutChangesEqualsGlobal) {
  DynamicParams p;
  p.n = 24;
  p.changes = {0, 3};
  p.seeds = 6;
  const auto rows = dynamic_amortized(p);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].amortized.mean, rows[0].global.mean);
  EXPECT_DOUBLE_EQ(rows[1].amortized.mean, rows[1].global.mean / 4);
  for (const auto& r : rows) EXPECT_EQ(r.confinement_failures, 0u);
  EXPECT_EQ(table(rows).columns.front(), "C");
}

TEST(Suites, LowerBoundRows) {
  const auto rows = lower_bound({4}, 5, 1);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].bound, 4.0 / 3 - 4);
  EXPECT_GE(rows[0].non_silent.min, 4);  // every change round is non-silent
}

TEST(Suites, PseudoLocalSmall) {
  PseudoLocalParams p;
  p.m = 8;
  p.changes = 4;
  p.seeds = 4;
  const auto row = pseudo_local(p);
  EXPECT_EQ(row.path_length, gen::dumbbell_path_length(8));
  EXPECT_EQ(row.n, 16 + row.path_length - 1);
  EXPECT_EQ(row.local_changes_b.max, 0);  // B is far beyond the C_u radius
  EXPECT_GT(row.max_b.min, 0);
}

TEST(Suites, CliqueSymmetryIsADistribution) {
  const auto freq = clique_symmetry(3, 60, 1);
  ASSERT_EQ(freq.size(), 3u);
  EXPECT_NEAR(freq[0] + freq[1] + freq[2], 1.0, 1e-12);
  EXPECT_EQ(clique_symmetry_table(freq, 60).rows.size(), 3u);
}

TEST(Suites, TournamentsAndQualityOnCliques) {
  const Graph g = gen::clique(16);
  const auto tr = tournament_counts(g, 10, 1);
  EXPECT_EQ(tr.n, 16u);
  EXPECT_GE(tr.max_tournaments, 1u);
  EXPECT_GE(tr.mean_u_turns, 1.0);
  const auto q = quality(g, 10, 1);
  EXPECT_EQ(q.winners, 10u);  // one winner per run on a clique
  EXPECT_DOUBLE_EQ(q.mean_over_winners, 15);
  EXPECT_DOUBLE_EQ(q.mean_over_nodes, 15.0 / 16);
}

TEST(Suites, LocalPairsOneRowPerSurvivor) {
  DynamicParams p;
  p.n = 12;
  p.changes = {2};
  p.seeds = 2;
  const Table t = local_pairs(p);
  EXPECT_GE(t.rows.size(), 2 * 10u);
  for (const auto& row : t.rows) EXPECT_EQ(row.size(), t.columns.size());
}
