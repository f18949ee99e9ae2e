#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stoneage/types.hpp"

namespace stoneage {

class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Undirected simple graph with stable node ids and sorted adjacency lists.
class Graph {
 public:
  Graph() = default;

  /// Nodes 0..n-1 with no edges.
  static Graph with_nodes(std::size_t n) {
    Graph g;
    for (NodeId v = 0; v < n; ++v) g.adj_.emplace_hint(g.adj_.end(), v, std::vector<NodeId>{});
    return g;
  }

  /// Builds from an edge list in one pass (duplicate edges rejected).
  static Graph from_edges(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    return from_edges(with_nodes(n), edges);
  }

  /// Adds edges to an edgeless graph in one pass.
  static Graph from_edges(Graph g, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    if (g.edges_ != 0) throw TopologyError("from_edges expects an edgeless graph");
    for (auto [u, v] : edges) {
      if (u == v) throw TopologyError("self-loop on node " + std::to_string(u));
      if (!g.has_node(u) || !g.has_node(v)) throw TopologyError("edge references an unknown node");
      g.adj_[u].push_back(v);
      g.adj_[v].push_back(u);
    }
    for (auto& [v, nbrs] : g.adj_) {
      std::sort(nbrs.begin(), nbrs.end());
      if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end()) {
        throw TopologyError("parallel edge at node " + std::to_string(v));
      }
      g.edges_ += nbrs.size();
    }
    g.edges_ /= 2;
    return g;
  }

  bool has_node(NodeId v) const { return adj_.count(v) != 0; }

  bool has_edge(NodeId u, NodeId v) const {
    auto it = adj_.find(u);
    return it != adj_.end() && std::binary_search(it->second.begin(), it->second.end(), v);
  }

  const std::vector<NodeId>& neighbors(NodeId v) const {
    auto it = adj_.find(v);
    if (it == adj_.end()) throw TopologyError("unknown node " + std::to_string(v));
    return it->second;
  }

  std::size_t degree(NodeId v) const { return neighbors(v).size(); }
  std::size_t node_count() const { return adj_.size(); }
  std::size_t edge_count() const { return edges_; }

  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out;
    out.reserve(adj_.size());
    for (const auto& [v, _] : adj_) out.push_back(v);
    return out;
  }

  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(edges_);
    for (const auto& [u, nbrs] : adj_) {
      for (NodeId v : nbrs) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  /// Smallest id strictly greater than every id in the graph.
  NodeId next_free_id() const { return adj_.empty() ? 0 : adj_.rbegin()->first + 1; }

  void add_node(NodeId v) {
    if (!adj_.emplace(v, std::vector<NodeId>{}).second) {
      throw TopologyError("node " + std::to_string(v) + " exists");
    }
  }

  void remove_node(NodeId v) {
    auto it = adj_.find(v);
    if (it == adj_.end()) throw TopologyError("node " + std::to_string(v) + " does not exist");
    for (NodeId u : it->second) erase_sorted(adj_[u], v);
    edges_ -= it->second.size();
    adj_.erase(it);
  }

  void add_edge(NodeId u, NodeId v) {
    if (u == v) throw TopologyError("self-loop on node " + std::to_string(u));
    if (!has_node(u) || !has_node(v)) throw TopologyError("edge " + edge_name(u, v) + " references a missing node");
    if (has_edge(u, v)) throw TopologyError("edge " + edge_name(u, v) + " exists");
    insert_sorted(adj_[u], v);
    insert_sorted(adj_[v], u);
    ++edges_;
  }

  void remove_edge(NodeId u, NodeId v) {
    if (!has_edge(u, v)) throw TopologyError("edge " + edge_name(u, v) + " does not exist");
    erase_sorted(adj_[u], v);
    erase_sorted(adj_[v], u);
    --edges_;
  }

  bool operator==(const Graph&) const = default;

  static std::string edge_name(NodeId u, NodeId v) {
    return "{" + std::to_string(u) + "," + std::to_string(v) + "}";
  }

 private:
  static void insert_sorted(std::vector<NodeId>& xs, NodeId v) {
    xs.insert(std::lower_bound(xs.begin(), xs.end(), v), v);
  }
  static void erase_sorted(std::vector<NodeId>& xs, NodeId v) {
    auto it = std::lower_bound(xs.begin(), xs.end(), v);
    if (it != xs.end() && *it == v) xs.erase(it);
  }

  std::map<NodeId, std::vector<NodeId>> adj_;
  std::size_t edges_ = 0;
};

// ---------------------------------------------------------------------------
// Topology changes and schedules

enum class ChangeKind { edge_delete, edge_insert, node_delete, node_insert };

struct TopologyChange {
  ChangeKind kind;
  NodeId u = 0;
  NodeId v = 0;  // unused for node changes

  static TopologyChange edge_delete(NodeId a, NodeId b) { return {ChangeKind::edge_delete, a, b}; }
  static TopologyChange edge_insert(NodeId a, NodeId b) { return {ChangeKind::edge_insert, a, b}; }
  static TopologyChange node_delete(NodeId a) { return {ChangeKind::node_delete, a, 0}; }
  static TopologyChange node_insert(NodeId a) { return {ChangeKind::node_insert, a, 0}; }

  bool is_edge() const { return kind == ChangeKind::edge_delete || kind == ChangeKind::edge_insert; }

  /// Nodes the change involves: the endpoints of an edge change or the inserted/deleted node.
  std::vector<NodeId> involved() const { return is_edge() ? std::vector<NodeId>{u, v} : std::vector<NodeId>{u}; }

  bool operator==(const TopologyChange& o) const {
    if (kind != o.kind) return false;
    if (!is_edge()) return u == o.u;
    return std::minmax(u, v) == std::minmax(o.u, o.v);
  }
};

inline const char* op_name(ChangeKind k) {
  switch (k) {
    case ChangeKind::edge_delete: return "edge_del";
    case ChangeKind::edge_insert: return "edge_ins";
    case ChangeKind::node_delete: return "node_del";
    case ChangeKind::node_insert: return "node_ins";
  }
  return "?";
}

inline std::string to_string(const TopologyChange& c) {
  std::string s = op_name(c.kind);
  s += " " + std::to_string(c.u);
  if (c.is_edge()) s += " " + std::to_string(c.v);
  return s;
}

/// Applies one change in place; throws TopologyError when the change is inapplicable.
inline void apply_in_place(Graph& g, const TopologyChange& c) {
  switch (c.kind) {
    case ChangeKind::edge_delete: g.remove_edge(c.u, c.v); break;
    case ChangeKind::edge_insert: g.add_edge(c.u, c.v); break;
    case ChangeKind::node_delete: g.remove_node(c.u); break;
    case ChangeKind::node_insert: g.add_node(c.u); break;
  }
}

inline Graph apply_change(Graph g, const TopologyChange& c) {
  apply_in_place(g, c);
  return g;
}

/// The oblivious adversary's strategy: round -> ordered list of changes.
class Schedule {
 public:
  Schedule() = default;

  void add(Round r, TopologyChange c) {
    if (r < 1) throw TopologyError("rounds are 1-based");
    by_round_[r].push_back(c);
    ++total_;
  }

  bool empty() const { return total_ == 0; }
  std::size_t total() const { return total_; }
  Round last_round() const { return by_round_.empty() ? 0 : by_round_.rbegin()->first; }

  const std::vector<TopologyChange>& at(Round r) const {
    static const std::vector<TopologyChange> kNone;
    auto it = by_round_.find(r);
    return it == by_round_.end() ? kNone : it->second;
  }

  const std::map<Round, std::vector<TopologyChange>>& rounds() const { return by_round_; }

  bool operator==(const Schedule&) const = default;

 private:
  std::map<Round, std::vector<TopologyChange>> by_round_;
  std::size_t total_ = 0;
};

/// Checks that every change applies in order and that no change references an entity deleted
/// earlier in the same round. Throws TopologyError naming the round.
inline void validate_schedule(const Graph& g1, const Schedule& s) {
  Graph g = g1;
  for (const auto& [r, changes] : s.rounds()) {
    std::set<NodeId> deleted_nodes;
    std::set<std::pair<NodeId, NodeId>> deleted_edges;
    for (const TopologyChange& c : changes) {
      for (NodeId x : c.involved()) {
        if (deleted_nodes.count(x)) {
          throw TopologyError("round " + std::to_string(r) + ": " + to_string(c) + " references node deleted in the same round");
        }
      }
      if (c.is_edge() && deleted_edges.count(std::minmax(c.u, c.v))) {
        throw TopologyError("round " + std::to_string(r) + ": " + to_string(c) + " references edge deleted in the same round");
      }
      try {
        apply_in_place(g, c);
      } catch (const TopologyError& e) {
        throw TopologyError("round " + std::to_string(r) + ": " + to_string(c) + ": " + e.what());
      }
      if (c.kind == ChangeKind::node_delete) deleted_nodes.insert(c.u);
      if (c.kind == ChangeKind::edge_delete) deleted_edges.insert(std::minmax(c.u, c.v));
    }
  }
}

/// G_1, G_2, ... up to one past the last scheduled round; constant afterwards.
struct GraphSeq {
  std::vector<Graph> graphs;  // graphs[r - 1] == G_r
  std::size_t n = 0;          // max_r |V(G_r)|

  const Graph& at(Round r) const {
    if (r < 1) throw TopologyError("rounds are 1-based");
    return r <= graphs.size() ? graphs[r - 1] : graphs.back();
  }
};

inline GraphSeq derive_graph_sequence(const Graph& g1, const Schedule& s) {
  GraphSeq seq;
  seq.graphs.push_back(g1);
  seq.n = g1.node_count();
  const Round last = s.last_round();
  for (Round r = 1; r <= last; ++r) {
    Graph next = seq.graphs.back();
    for (const TopologyChange& c : s.at(r)) {
      try {
        apply_in_place(next, c);
      } catch (const TopologyError& e) {
        throw TopologyError("round " + std::to_string(r) + ": " + to_string(c) + ": " + e.what());
      }
    }
    seq.n = std::max(seq.n, next.node_count());
    seq.graphs.push_back(std::move(next));
  }
  return seq;
}

/// max_r |V(G_r)| without materializing the sequence.
inline std::size_t max_node_count(const Graph& g1, const Schedule& s) {
  Graph g = g1;
  std::size_t n = g.node_count();
  for (const auto& [r, changes] : s.rounds()) {
    for (const TopologyChange& c : changes) apply_in_place(g, c);
    n = std::max(n, g.node_count());
  }
  return n;
}

/// ceil(log2(n)) with ceil_log2(0) == ceil_log2(1) == 0.
inline unsigned ceil_log2(std::size_t n) {
  unsigned k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

/// Nodes v such that some inclusive round-r neighbor u of v has E_r(u) != E_{r+1}(u).
/// A node inserted in round r counts as present in round r with no incident edges.
inline std::set<NodeId> affected_nodes(const Graph& g1, const Schedule& s) {
  std::set<NodeId> out;
  Graph g = g1;
  for (const auto& [r, changes] : s.rounds()) {
    Graph next = g;
    for (const TopologyChange& c : changes) apply_in_place(next, c);

    // Only involved nodes and their neighbors can see their incident edge set change
    // (a node deletion removes an edge at every neighbor).
    static const std::vector<NodeId> kNone;
    std::set<NodeId> touched;
    for (const TopologyChange& c : changes) {
      for (NodeId x : c.involved()) {
        touched.insert(x);
        for (const Graph* h : {&g, &next}) {
          if (h->has_node(x)) touched.insert(h->neighbors(x).begin(), h->neighbors(x).end());
        }
      }
    }
    for (NodeId u : touched) {
      const auto& before = g.has_node(u) ? g.neighbors(u) : kNone;
      const auto& after = next.has_node(u) ? next.neighbors(u) : kNone;
      if (before == after) continue;
      out.insert(u);
      for (NodeId w : before) out.insert(w);
    }
    g = std::move(next);
  }
  return out;
}

namespace detail {

// Marks every node within `radius` hops of `sources` in g.
inline void mark_ball(const Graph& g, const std::vector<NodeId>& sources, unsigned radius, std::set<NodeId>& marked) {
  std::map<NodeId, unsigned> dist;
  std::vector<NodeId> frontier;
  for (NodeId x : sources) {
    if (g.has_node(x) && dist.emplace(x, 0).second) frontier.push_back(x);
  }
  for (unsigned d = 0; d < radius && !frontier.empty(); ++d) {
    std::vector<NodeId> next;
    for (NodeId x : frontier) {
      for (NodeId y : g.neighbors(x)) {
        if (dist.emplace(y, d + 1).second) next.push_back(y);
      }
    }
    frontier = std::move(next);
  }
  for (const auto& [x, _] : dist) marked.insert(x);
}

// Distinct graph versions of the sequence: G_1 and the graph after every change round.
inline std::vector<Graph> graph_versions(const Graph& g1, const Schedule& s) {
  std::vector<Graph> out{g1};
  for (const auto& [r, changes] : s.rounds()) {
    Graph next = out.back();
    for (const TopologyChange& c : changes) apply_in_place(next, c);
    out.push_back(std::move(next));
  }
  return out;
}

}  // namespace detail

/// Radius used for local change counts: 1 + ceil(log2 n), n = max_r |V(G_r)|.
inline unsigned locality_radius(std::size_t n) { return 1 + ceil_log2(n); }

/// C_u for every node that ever exists: the number of changes involving a node that was within
/// locality_radius(n) hops of u in some round.
inline std::map<NodeId, std::size_t> change_counts_within(const Graph& g1, const Schedule& s) {
  const auto versions = detail::graph_versions(g1, s);
  std::size_t n = 0;
  std::set<NodeId> everyone;
  for (const Graph& g : versions) {
    n = std::max(n, g.node_count());
    for (NodeId v : g.nodes()) everyone.insert(v);
  }
  const unsigned radius = locality_radius(n);

  std::map<NodeId, std::size_t> out;
  for (NodeId v : everyone) out[v] = 0;
  for (const auto& [r, changes] : s.rounds()) {
    for (const TopologyChange& c : changes) {
      // u counts c iff some version puts u within radius of a node c involves.
      std::set<NodeId> reached;
      for (const Graph& g : versions) detail::mark_ball(g, c.involved(), radius, reached);
      for (NodeId u : reached) ++out[u];
    }
  }
  return out;
}

inline std::size_t change_count_within(const Graph& g1, const Schedule& s, NodeId u) {
  const auto all = change_counts_within(g1, s);
  auto it = all.find(u);
  if (it == all.end()) throw TopologyError("unknown node " + std::to_string(u));
  return it->second;
}

}  // namespace stoneage
