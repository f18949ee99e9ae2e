#include <gtest/gtest.h>

#include "stoneage/generators.hpp"

using namespace stoneage;

TEST(GenSpec, Parse) {
  const GenSpec g = GenSpec::parse("gnp:n=8,p=0.25,seed=3");
  EXPECT_EQ(g.kind, "gnp");
  EXPECT_EQ(g.integer("n"), 8);
  EXPECT_DOUBLE_EQ(g.real("p"), 0.25);
  EXPECT_EQ(g.integer("seed", 1), 3);
  EXPECT_EQ(g.integer("missing", 9), 9);
  EXPECT_EQ(GenSpec::parse("none").kind, "none");
  EXPECT_THROW(GenSpec::parse("gnp:n").kind, Error);
  EXPECT_THROW(GenSpec::parse("gnp:n=x").integer("n"), Error);
  EXPECT_THROW(GenSpec::parse("gnp:n=1").str("p"), Error);
}

TEST(Generators, Clique) {
  const Graph g = gen::clique(3);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_EQ(gen::clique(5).edge_count(), 10u);
  EXPECT_EQ(gen::clique(0).node_count(), 0u);
}

TEST(Generators, GnpExtremes) {
  EXPECT_EQ(gen::gnp(8, 0.0, 1).edge_count(), 0u);
  EXPECT_EQ(gen::gnp(8, 0.0, 1).node_count(), 8u);
  EXPECT_EQ(gen::gnp(8, 1.0, 1), gen::clique(8));
  EXPECT_EQ(gen::gnp(40, 0.3, 5), gen::gnp(40, 0.3, 5));
  EXPECT_NE(gen::gnp(40, 0.3, 5), gen::gnp(40, 0.3, 6));
  EXPECT_THROW(gen::gnp(4, 1.5, 1), Error);
}

TEST(Generators, GnpDensity) {
  const Graph g = gen::gnp(200, 0.1, 2);
  const double expect = 0.1 * 200 * 199 / 2;
  EXPECT_NEAR(static_cast<double>(g.edge_count()), expect, 4 * std::sqrt(expect));
}

TEST(Generators, PathRingStar) {
  EXPECT_EQ(gen::path(5).edge_count(), 4u);
  EXPECT_EQ(gen::ring(5).edge_count(), 5u);
  EXPECT_THROW(gen::ring(2), Error);
  const Graph s = gen::star(6);
  EXPECT_EQ(s.degree(0), 5u);
  EXPECT_EQ(s.edge_count(), 5u);
}

TEST(Generators, DisjointCliques) {
  const Graph g = gen::disjoint_cliques(3, 4);
  EXPECT_EQ(g.node_count(), 12u);
  EXPECT_EQ(g.edge_count(), 18u);
  EXPECT_TRUE(g.has_edge(4, 7));
  EXPECT_FALSE(g.has_edge(3, 4));
}

TEST(Generators, Dumbbell) {
  const auto d = gen::dumbbell(10, 1.0, 4, 1);
  EXPECT_EQ(d.graph.node_count(), 23u);
  EXPECT_EQ(d.graph.edge_count(), 2 * 45u + 4u);
  EXPECT_EQ(d.bridge.size(), 3u);
  EXPECT_TRUE(d.graph.has_edge(d.a_anchor, d.bridge.front()));
  EXPECT_TRUE(d.graph.has_edge(d.bridge.back(), d.b_anchor));
  EXPECT_EQ(d.cluster_a.size(), 10u);
  EXPECT_EQ(d.cluster_b.front(), 10u);
  const auto direct = gen::dumbbell(3, 1.0, 1, 1);
  EXPECT_TRUE(direct.graph.has_edge(2, 3));
  EXPECT_TRUE(direct.bridge.empty());
}

TEST(LowerBound, TwoComponents) {
  const auto [g, s] = gen::lower_bound(2);
  EXPECT_EQ(g.node_count(), 6u);
  EXPECT_EQ(g.edges(), (std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}}));
  EXPECT_EQ(s.at(1), std::vector<TopologyChange>{TopologyChange::node_delete(0)});
  EXPECT_EQ(s.at(3), std::vector<TopologyChange>{TopologyChange::node_delete(3)});
  EXPECT_EQ(s.total(), 2u);
}

TEST(LowerBound, DeletionRounds) {
  const auto [g1, s1] = gen::lower_bound(1);
  EXPECT_EQ(g1.node_count(), 3u);
  EXPECT_EQ(s1.total(), 1u);
  EXPECT_EQ(s1.at(1).size(), 1u);
  const auto [g3, s3] = gen::lower_bound(3);
  EXPECT_EQ(g3.node_count(), 9u);
  std::vector<Round> rounds;
  for (const auto& [r, c] : s3.rounds()) rounds.push_back(r);
  EXPECT_EQ(rounds, (std::vector<Round>{1, 3, 5}));
  EXPECT_THROW(gen::lower_bound(0), Error);
}

TEST(LowerBound, EveryGraphIsTrianglesAndRemnants) {
  const auto [g, s] = gen::lower_bound(6);
  EXPECT_EQ(s.total(), 6u);
  for (const Graph& h : derive_graph_sequence(g, s).graphs) {
    for (NodeId v : h.nodes()) {
      const auto& n = h.neighbors(v);
      const std::size_t comp = v / 3;
      for (NodeId u : n) EXPECT_EQ(u / 3, comp);
      EXPECT_TRUE(n.size() == 1 || n.size() == 2);
    }
  }
}

TEST(Schedules, RandomMixIsApplicableAndReplayable) {
  const Graph g = gen::clique(8);
  gen::ScheduleParams params;
  params.changes = 4;
  const Schedule a = gen::random_mix(g, params, 7);
  EXPECT_EQ(a, gen::random_mix(g, params, 7));
  EXPECT_EQ(a.total(), 4u);
  std::vector<Round> rounds;
  for (const auto& [r, c] : a.rounds()) rounds.push_back(r);
  EXPECT_EQ(rounds, (std::vector<Round>{1, 2, 3, 4}));
  EXPECT_NO_THROW(validate_schedule(g, a));
}

TEST(Schedules, RandomMixSpacingAndRestriction) {
  const Graph g = gen::gnp(30, 0.3, 1);
  gen::ScheduleParams params;
  params.changes = 8;
  params.start = 5;
  params.spacing = 2;
  params.restrict_to = std::set<NodeId>{0, 1, 2, 3, 4, 5};
  const Schedule s = gen::random_mix(g, params, 3);
  EXPECT_NO_THROW(validate_schedule(g, s));
  Round expect = 5;
  for (const auto& [r, changes] : s.rounds()) {
    EXPECT_EQ(r, expect);
    expect += 3;
    for (const auto& c : changes) {
      EXPECT_NE(c.kind, ChangeKind::node_insert);
      for (NodeId x : c.involved()) EXPECT_LE(x, 5u);
    }
  }
}

TEST(Schedules, MixesAllKinds) {
  gen::ScheduleParams params;
  params.changes = 200;
  const Schedule s = gen::random_mix(gen::gnp(40, 0.2, 2), params, 2);
  std::set<ChangeKind> kinds;
  for (const auto& [r, c] : s.rounds()) kinds.insert(c.front().kind);
  EXPECT_EQ(kinds.size(), 4u);
}

TEST(Schedules, BurstPlacesEverythingInOneRound) {
  const Schedule s = gen::burst(gen::clique(2), 2, 5, 1);
  EXPECT_EQ(s.total(), 2u);
  EXPECT_EQ(s.at(5).size(), 2u);
  EXPECT_NO_THROW(validate_schedule(gen::clique(2), s));
  for (std::uint64_t seed = 1; seed < 30; ++seed) {
    const Graph g = gen::gnp(15, 0.3, seed);
    EXPECT_NO_THROW(validate_schedule(g, gen::burst(g, 6, 3, seed)));
  }
}

TEST(Schedules, ImpossibleRequestsFail) {
  gen::ScheduleParams params;
  params.changes = 3;
  params.restrict_to = std::set<NodeId>{};
  EXPECT_THROW(gen::random_mix(Graph::with_nodes(2), params, 1), Error);
}

TEST(Generators, DumbbellPathLengthIsFixedPoint) {
  for (std::size_t m : {4u, 16u, 64u, 200u}) {
    const std::size_t len = gen::dumbbell_path_length(m);
    EXPECT_EQ(len, 3 * ceil_log2(2 * m + len - 1)) << m;
  }
  EXPECT_EQ(gen::dumbbell_path_length(64), 24u);
}

TEST(Specs, Instances) {
  EXPECT_EQ(gen::instance_from_spec(GenSpec::parse("clique:n=5")).graph.edge_count(), 10u);
  EXPECT_EQ(gen::instance_from_spec(GenSpec::parse("gnp:n=20,p=0.3,seed=4")).graph, gen::gnp(20, 0.3, 4));
  EXPECT_EQ(gen::instance_from_spec(GenSpec::parse("cliques:k=2,size=3")).graph, gen::disjoint_cliques(2, 3));
  EXPECT_EQ(gen::instance_from_spec(GenSpec::parse("dumbbell:m=64")).graph.node_count(), 128u + 23u);
  const auto lb = gen::instance_from_spec(GenSpec::parse("lower_bound:l=3"));
  ASSERT_TRUE(lb.schedule.has_value());
  EXPECT_EQ(lb.schedule->total(), 3u);
  EXPECT_FALSE(gen::instance_from_spec(GenSpec::parse("path:n=3")).schedule.has_value());
  EXPECT_THROW(gen::instance_from_spec(GenSpec::parse("torus:n=3")), Error);
  EXPECT_THROW(gen::instance_from_spec(GenSpec::parse("clique:n=-2")), Error);
}

TEST(Specs, Schedules) {
  const Graph g = gen::gnp(20, 0.3, 1);
  EXPECT_EQ(gen::schedule_from_spec(GenSpec::parse("none"), g).total(), 0u);
  gen::ScheduleParams params;
  params.changes = 5;
  params.spacing = 2;
  EXPECT_EQ(gen::schedule_from_spec(GenSpec::parse("mix:c=5,spacing=2,seed=9"), g), gen::random_mix(g, params, 9));
  EXPECT_EQ(gen::schedule_from_spec(GenSpec::parse("burst:c=3,round=4,seed=2"), g), gen::burst(g, 3, 4, 2));
  EXPECT_THROW(gen::schedule_from_spec(GenSpec::parse("chaos"), g), Error);
}
