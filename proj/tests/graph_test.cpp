#include <gtest/gtest.h>

#include <random>
#include <set>

#include "stoneage/generators.hpp"
#include "stoneage/graph.hpp"

using namespace stoneage;
using TC = TopologyChange;

namespace {

// Independent oracle for the affected set: materialize every G_r and test the definition
// "some u in the inclusive neighborhood N_r[v] has E_r(u) != E_{r+1}(u)" node by node.
std::set<NodeId> affected_oracle(const Graph& g1, const Schedule& s) {
  const GraphSeq seq = derive_graph_sequence(g1, s);
  std::set<NodeId> out;
  auto incident = [](const Graph& g, NodeId u) {
    std::set<std::pair<NodeId, NodeId>> e;
    if (!g.has_node(u)) return e;
    for (NodeId w : g.neighbors(u)) e.insert(std::minmax(u, w));
    return e;
  };
  for (Round r = 1; r < seq.graphs.size(); ++r) {
    const Graph& g = seq.at(r);
    const Graph& h = seq.at(r + 1);
    std::set<NodeId> present;
    for (NodeId v : g.nodes()) present.insert(v);
    for (const TC& c : s.at(r)) {
      if (c.kind == ChangeKind::node_insert) present.insert(c.u);
    }
    for (NodeId v : present) {
      std::set<NodeId> hood{v};
      if (g.has_node(v)) hood.insert(g.neighbors(v).begin(), g.neighbors(v).end());
      for (NodeId u : hood) {
        if (incident(g, u) != incident(h, u)) out.insert(v);
      }
    }
  }
  return out;
}

// Hop distance by BFS, or -1 when unreachable.
int distance(const Graph& g, NodeId a, NodeId b) {
  std::map<NodeId, int> d{{a, 0}};
  std::vector<NodeId> q{a};
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (NodeId y : g.neighbors(q[i])) {
      if (d.emplace(y, d[q[i]] + 1).second) q.push_back(y);
    }
  }
  return d.count(b) ? d[b] : -1;
}

}  // namespace

TEST(Graph, BasicMutation) {
  Graph g = Graph::with_nodes(3);
  g.add_edge(0, 1);
  g.add_edge(2, 1);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_EQ(g.neighbors(1), (std::vector<NodeId>{0, 2}));
  EXPECT_THROW(g.add_edge(0, 1), TopologyError);
  EXPECT_THROW(g.add_edge(1, 1), TopologyError);
  EXPECT_THROW(g.remove_edge(0, 2), TopologyError);
  g.remove_node(1);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_EQ(g.nodes(), (std::vector<NodeId>{0, 2}));
  EXPECT_THROW(g.remove_node(1), TopologyError);
  EXPECT_THROW(g.add_node(0), TopologyError);
}

TEST(Graph, FromEdgesRejectsBadInput) {
  EXPECT_THROW(Graph::from_edges(2, {{0, 0}}), TopologyError);
  EXPECT_THROW(Graph::from_edges(2, {{0, 1}, {1, 0}}), TopologyError);
  EXPECT_THROW(Graph::from_edges(2, {{0, 5}}), TopologyError);
}

TEST(ApplyChange, TriangleNodeDelete) {
  const Graph g = apply_change(gen::clique(3), TC::node_delete(0));
  EXPECT_EQ(g.nodes(), (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(g.edges(), (std::vector<std::pair<NodeId, NodeId>>{{1, 2}}));
}

TEST(ApplyChange, K2EdgeDeleteLeavesIsolatedNodes) {
  const Graph g = apply_change(gen::clique(2), TC::edge_delete(1, 0));
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(ApplyChange, DuplicateEdgeInsertFails) {
  try {
    apply_change(gen::clique(2), TC::edge_insert(0, 1));
    FAIL();
  } catch (const TopologyError& e) {
    EXPECT_NE(std::string(e.what()).find("exists"), std::string::npos);
  }
}

TEST(ApplyChange, IsPure) {
  const Graph g = gen::clique(3);
  (void)apply_change(g, TC::node_delete(1));
  EXPECT_EQ(g, gen::clique(3));
}

TEST(GraphSequence, NodeInsertRaisesN) {
  Schedule s;
  s.add(3, TC::node_insert(2));
  const GraphSeq seq = derive_graph_sequence(gen::clique(2), s);
  EXPECT_EQ(seq.at(1).node_count(), 2u);
  EXPECT_EQ(seq.at(3).node_count(), 2u);
  EXPECT_EQ(seq.at(4).node_count(), 3u);
  EXPECT_EQ(seq.at(50).node_count(), 3u);
  EXPECT_EQ(seq.n, 3u);
}

TEST(GraphSequence, StaticIsConstant) {
  const GraphSeq seq = derive_graph_sequence(gen::clique(3), Schedule{});
  EXPECT_EQ(seq.graphs.size(), 1u);
  EXPECT_EQ(seq.at(7), gen::clique(3));
  EXPECT_EQ(seq.n, 3u);
}

TEST(GraphSequence, LowerBoundTwo) {
  const auto [g, s] = gen::lower_bound(2);
  const GraphSeq seq = derive_graph_sequence(g, s);
  EXPECT_EQ(seq.n, 6u);
  EXPECT_EQ(seq.at(1).node_count(), 6u);
  EXPECT_EQ(seq.at(2).node_count(), 5u);
  EXPECT_EQ(seq.at(3).node_count(), 5u);
  EXPECT_EQ(seq.at(4).node_count(), 4u);
}

TEST(GraphSequence, ErrorsNameTheRound) {
  Schedule s;
  s.add(4, TC::edge_delete(0, 2));
  try {
    derive_graph_sequence(gen::path(3), s);
    FAIL();
  } catch (const TopologyError& e) {
    EXPECT_NE(std::string(e.what()).find("round 4"), std::string::npos);
  }
}

TEST(ValidateSchedule, SameRoundReferenceToDeletedNode) {
  Schedule s;
  s.add(2, TC::node_delete(1));
  s.add(2, TC::node_insert(1));
  EXPECT_THROW(validate_schedule(gen::path(3), s), TopologyError);
  Schedule ok;
  ok.add(2, TC::node_delete(1));
  ok.add(3, TC::node_insert(7));
  EXPECT_NO_THROW(validate_schedule(gen::path(3), ok));
}

TEST(Affected, PathEdgeDeletion) {
  Schedule s;
  s.add(1, TC::edge_delete(0, 1));
  EXPECT_EQ(affected_nodes(gen::path(4), s), (std::set<NodeId>{0, 1, 2}));
}

TEST(Affected, EmptySchedule) { EXPECT_TRUE(affected_nodes(gen::gnp(20, 0.3, 1), Schedule{}).empty()); }

TEST(Affected, K2NodeDelete) {
  Schedule s;
  s.add(1, TC::node_delete(0));
  EXPECT_EQ(affected_nodes(gen::clique(2), s), (std::set<NodeId>{0, 1}));
}

TEST(Affected, NodeDeletionReachesTwoHops) {
  // Deleting the center of a path changes E(1) and E(3), so their neighbors 0 and 4 are affected.
  Schedule s;
  s.add(1, TC::node_delete(2));
  EXPECT_EQ(affected_nodes(gen::path(6), s), (std::set<NodeId>{0, 1, 2, 3, 4}));
}

TEST(Affected, MatchesOracleOnRandomSchedules) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Graph g = gen::gnp(12, 0.25, seed);
    gen::ScheduleParams params;
    params.changes = 1 + seed % 6;
    params.spacing = seed % 3;
    const Schedule s = seed % 2 ? gen::random_mix(g, params, seed) : gen::burst(g, params.changes, 2, seed);
    EXPECT_EQ(affected_nodes(g, s), affected_oracle(g, s)) << "seed " << seed;
  }
}

TEST(Affected, MonotoneInTheSchedule) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Graph g = gen::gnp(14, 0.2, seed);
    gen::ScheduleParams params;
    params.changes = 6;
    params.spacing = 1;
    const Schedule full = gen::random_mix(g, params, seed);
    Schedule prefix;
    std::set<NodeId> prev;
    for (const auto& [r, changes] : full.rounds()) {
      for (const TC& c : changes) prefix.add(r, c);
      const auto now = affected_nodes(g, prefix);
      EXPECT_TRUE(std::includes(now.begin(), now.end(), prev.begin(), prev.end()));
      prev = now;
    }
  }
}

TEST(Affected, CoarseSizeBound) {
  // A node deletion's "endpoints" are the node and all its neighbors.
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Graph g = gen::gnp(16, 0.2, seed);
    gen::ScheduleParams params;
    params.changes = 5;
    const Schedule s = gen::random_mix(g, params, seed);
    const GraphSeq seq = derive_graph_sequence(g, s);
    std::size_t bound = 0;
    for (const auto& [r, changes] : s.rounds()) {
      const Graph& gr = seq.at(r);
      for (const TC& c : changes) {
        std::vector<NodeId> ends = c.involved();
        if (c.kind == ChangeKind::node_delete) ends.insert(ends.end(), gr.neighbors(c.u).begin(), gr.neighbors(c.u).end());
        for (NodeId x : ends) bound += 1 + (gr.has_node(x) ? gr.degree(x) : 0);
      }
    }
    EXPECT_LE(affected_nodes(g, s).size(), bound);
  }
}

TEST(LocalChanges, PathOfTen) {
  Schedule s;
  s.add(1, TC::edge_delete(0, 1));
  const Graph g = gen::path(10);
  EXPECT_EQ(locality_radius(10), 5u);
  EXPECT_EQ(change_count_within(g, s, 9), 0u);
  EXPECT_EQ(change_count_within(g, s, 4), 1u);
}

TEST(LocalChanges, EmptySchedule) {
  for (const auto& [v, c] : change_counts_within(gen::ring(8), Schedule{})) EXPECT_EQ(c, 0u) << v;
}

TEST(LocalChanges, LowerBoundTwoCountsOnlyOwnComponent) {
  const auto [g, s] = gen::lower_bound(2);
  EXPECT_EQ(change_count_within(g, s, 4), 1u);
  EXPECT_EQ(change_count_within(g, s, 1), 1u);
  EXPECT_THROW(change_count_within(g, s, 99), TopologyError);
}

TEST(LocalChanges, MatchesDistanceOracle) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const Graph g = gen::gnp(20, 0.12, seed);
    gen::ScheduleParams params;
    params.changes = 4;
    params.spacing = 2;
    const Schedule s = gen::random_mix(g, params, seed);
    const GraphSeq seq = derive_graph_sequence(g, s);
    const unsigned radius = 1 + ceil_log2(seq.n);
    const auto counts = change_counts_within(g, s);
    for (const auto& [u, cu] : counts) {
      std::size_t expect = 0;
      for (const auto& [r, changes] : s.rounds()) {
        for (const TC& c : changes) {
          bool near = false;
          for (const Graph& h : seq.graphs) {
            for (NodeId x : c.involved()) {
              if (h.has_node(u) && h.has_node(x)) {
                const int d = distance(h, u, x);
                near = near || (d >= 0 && d <= static_cast<int>(radius));
              }
            }
          }
          expect += near;
        }
      }
      EXPECT_EQ(cu, expect) << "node " << u << " seed " << seed;
    }
  }
}

TEST(CeilLog2, SmallValues) {
  EXPECT_EQ(ceil_log2(1), 0u);
  EXPECT_EQ(ceil_log2(2), 1u);
  EXPECT_EQ(ceil_log2(3), 2u);
  EXPECT_EQ(ceil_log2(1024), 10u);
  EXPECT_EQ(ceil_log2(1025), 11u);
}
