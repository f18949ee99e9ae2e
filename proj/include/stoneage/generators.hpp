#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stoneage/graph.hpp"

namespace stoneage {

/// "kind:key=value,key=value" as used on the command line.
struct GenSpec {
  std::string kind;
  std::map<std::string, std::string> params;

  static GenSpec parse(const std::string& text) {
    GenSpec g;
    const auto colon = text.find(':');
    g.kind = text.substr(0, colon);
    if (colon == std::string::npos) return g;
    std::string rest = text.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!item.empty()) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error("parameter '" + item + "' is not key=value");
        g.params[item.substr(0, eq)] = item.substr(eq + 1);
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return g;
  }

  bool has(const std::string& key) const { return params.count(key) != 0; }

  std::string str(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw Error(kind + ": missing parameter '" + key + "'");
    return it->second;
  }

  long long integer(const std::string& key) const {
    const std::string s = str(key);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw Error(kind + ": parameter '" + key + "' is not an integer");
    return v;
  }

  long long integer(const std::string& key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  double real(const std::string& key) const {
    const std::string s = str(key);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw Error(kind + ": parameter '" + key + "' is not a number");
    return v;
  }
};

namespace gen {

inline Graph clique(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(n * (n - (n > 0)) / 2);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return Graph::from_edges(n, edges);
}

inline Graph path(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u + 1 < n; ++u) edges.emplace_back(u, u + 1);
  return Graph::from_edges(n, edges);
}

inline Graph ring(std::size_t n) {
  if (n < 3) throw Error("ring needs at least 3 nodes");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u) edges.emplace_back(u, static_cast<NodeId>((u + 1) % n));
  return Graph::from_edges(n, edges);
}

inline Graph star(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 1; u < n; ++u) edges.emplace_back(0, u);
  return Graph::from_edges(n, edges);
}

/// Erdos-Renyi G(n, p); deterministic for fixed (n, p, seed).
inline Graph gnp(std::size_t n, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw Error("gnp: p must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (coin(rng)) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

/// k disjoint cliques of `size` nodes; clique i holds ids size*i .. size*i + size-1.
inline Graph disjoint_cliques(std::size_t k, std::size_t size) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t c = 0; c < k; ++c) {
    const NodeId base = static_cast<NodeId>(c * size);
    for (NodeId a = 0; a < size; ++a) {
      for (NodeId b = a + 1; b < size; ++b) edges.emplace_back(base + a, base + b);
    }
  }
  return Graph::from_edges(k * size, edges);
}

/// Two G(m, p) clusters, A on ids [0, m) and B on [m, 2m), joined by a path of `length` edges
/// from node m-1 (in A) to node m (in B) through length-1 fresh interior nodes.
struct Dumbbell {
  Graph graph;
  std::vector<NodeId> cluster_a;
  std::vector<NodeId> cluster_b;
  std::vector<NodeId> bridge;  // interior path nodes
  NodeId a_anchor = 0;
  NodeId b_anchor = 0;
};

inline Dumbbell dumbbell(std::size_t m, double p, std::size_t length, std::uint64_t seed) {
  if (m < 1 || length < 1) throw Error("dumbbell: need m >= 1 and length >= 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int side = 0; side < 2; ++side) {
    const NodeId base = static_cast<NodeId>(side * m);
    for (NodeId u = 0; u < m; ++u) {
      for (NodeId v = u + 1; v < m; ++v) {
        if (coin(rng)) edges.emplace_back(base + u, base + v);
      }
    }
  }
  Dumbbell d;
  d.a_anchor = static_cast<NodeId>(m - 1);
  d.b_anchor = static_cast<NodeId>(m);
  NodeId prev = d.a_anchor;
  for (std::size_t i = 1; i < length; ++i) {
    const NodeId x = static_cast<NodeId>(2 * m + i - 1);
    d.bridge.push_back(x);
    edges.emplace_back(prev, x);
    prev = x;
  }
  edges.emplace_back(prev, d.b_anchor);
  d.graph = Graph::from_edges(2 * m + length - 1, edges);
  for (NodeId v = 0; v < m; ++v) {
    d.cluster_a.push_back(v);
    d.cluster_b.push_back(static_cast<NodeId>(m + v));
  }
  return d;
}

/// Lower-bound instance: l disjoint triangles B_1..B_l, node 3(i-1) of B_i deleted in round 2i-1.
inline std::pair<Graph, Schedule> lower_bound(std::size_t l) {
  if (l < 1) throw Error("lower_bound: l must be >= 1");
  Schedule s;
  for (std::size_t i = 1; i <= l; ++i) {
    s.add(static_cast<Round>(2 * i - 1), TopologyChange::node_delete(static_cast<NodeId>(3 * (i - 1))));
  }
  return {disjoint_cliques(l, 3), std::move(s)};
}

// ---------------------------------------------------------------------------
// Schedules

namespace detail {

// Draws one applicable change on g. `locked` holds entities already touched this round; they
// are never referenced again in the same round. `allowed` restricts the nodes that may be used.
inline std::optional<TopologyChange> draw_change(const Graph& g, std::mt19937_64& rng, NodeId& next_id,
                                                 const std::set<NodeId>& locked_nodes,
                                                 const std::set<std::pair<NodeId, NodeId>>& locked_edges,
                                                 const std::optional<std::set<NodeId>>& allowed, bool allow_node_insert) {
  std::vector<NodeId> pool;
  for (NodeId v : g.nodes()) {
    if (locked_nodes.count(v)) continue;
    if (allowed && !allowed->count(v)) continue;
    pool.push_back(v);
  }
  std::vector<std::pair<NodeId, NodeId>> present, absent;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      const auto e = std::minmax(pool[i], pool[j]);
      if (locked_edges.count(e)) continue;
      (g.has_edge(e.first, e.second) ? present : absent).push_back(e);
    }
  }
  std::vector<ChangeKind> kinds;
  if (!present.empty()) kinds.push_back(ChangeKind::edge_delete);
  if (!absent.empty()) kinds.push_back(ChangeKind::edge_insert);
  if (!pool.empty()) kinds.push_back(ChangeKind::node_delete);
  if (allow_node_insert) kinds.push_back(ChangeKind::node_insert);
  if (kinds.empty()) return std::nullopt;

  auto pick = [&rng](std::size_t size) { return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng); };
  switch (kinds[pick(kinds.size())]) {
    case ChangeKind::edge_delete: {
      const auto e = present[pick(present.size())];
      return TopologyChange::edge_delete(e.first, e.second);
    }
    case ChangeKind::edge_insert: {
      const auto e = absent[pick(absent.size())];
      return TopologyChange::edge_insert(e.first, e.second);
    }
    case ChangeKind::node_delete: return TopologyChange::node_delete(pool[pick(pool.size())]);
    case ChangeKind::node_insert: return TopologyChange::node_insert(next_id++);
  }
  return std::nullopt;
}

}  // namespace detail

struct ScheduleParams {
  std::size_t changes = 0;  // C
  Round start = 1;
  Round spacing = 0;  // empty rounds between consecutive changes
  std::optional<std::set<NodeId>> restrict_to;  // only touch these nodes (no node insertions)
};

/// C uniformly mixed applicable changes, one per round, starting at `start`, `spacing` empty
/// rounds apart. Fresh node ids exceed every id seen so far.
inline Schedule random_mix(const Graph& g1, const ScheduleParams& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Graph g = g1;
  NodeId next_id = g.next_free_id();
  Schedule s;
  for (std::size_t k = 0; k < params.changes; ++k) {
    const Round r = static_cast<Round>(params.start + k * (params.spacing + 1));
    auto c = detail::draw_change(g, rng, next_id, {}, {}, params.restrict_to, !params.restrict_to.has_value());
    if (!c) throw Error("random_mix: no applicable change left after " + std::to_string(k) + " changes");
    apply_in_place(g, *c);
    s.add(r, *c);
  }
  return s;
}

/// C changes all listed in one round; no two changes touch the same entity.
inline Schedule burst(const Graph& g1, std::size_t changes, Round round, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Graph g = g1;
  NodeId next_id = g.next_free_id();
  std::set<NodeId> locked_nodes;
  std::set<std::pair<NodeId, NodeId>> locked_edges;
  Schedule s;
  for (std::size_t k = 0; k < changes; ++k) {
    auto c = detail::draw_change(g, rng, next_id, locked_nodes, locked_edges, std::nullopt, true);
    if (!c) throw Error("burst: cannot place " + std::to_string(changes) + " changes");
    apply_in_place(g, *c);
    if (c->is_edge()) {
      locked_edges.insert(std::minmax(c->u, c->v));
    } else {
      locked_nodes.insert(c->u);
    }
    s.add(round, *c);
  }
  return s;
}

/// Path length 3 ceil(log2 n) where n = 2m + length - 1 counts the bridge nodes too.
inline std::size_t dumbbell_path_length(std::size_t m) {
  std::size_t len = 1;
  for (int it = 0; it < 64; ++it) {
    const std::size_t next = 3 * ceil_log2(2 * m + len - 1);
    if (next == len) return len;
    len = next;
  }
  return len;
}

// ---------------------------------------------------------------------------
// KIND:PARAMS specs

/// A generated graph, with the schedule that belongs to it for instance kinds like lower_bound.
struct Instance {
  Graph graph;
  std::optional<Schedule> schedule;
};

inline std::size_t count_param(const GenSpec& g, const std::string& key) {
  const long long v = g.integer(key);
  if (v < 0) throw Error(g.kind + ": parameter '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

inline std::uint64_t seed_param(const GenSpec& g) { return static_cast<std::uint64_t>(g.integer("seed", 1)); }

/// clique:n  path:n  ring:n  star:n  gnp:n,p[,seed]  cliques:k,size  dumbbell:m,p[,len][,seed]  lower_bound:l
inline Instance instance_from_spec(const GenSpec& g) {
  if (g.kind == "clique") return {clique(count_param(g, "n")), {}};
  if (g.kind == "path") return {path(count_param(g, "n")), {}};
  if (g.kind == "ring") return {ring(count_param(g, "n")), {}};
  if (g.kind == "star") return {star(count_param(g, "n")), {}};
  if (g.kind == "empty") return {Graph::with_nodes(g.has("n") ? count_param(g, "n") : 0), {}};
  if (g.kind == "gnp") return {gnp(count_param(g, "n"), g.real("p"), seed_param(g)), {}};
  if (g.kind == "cliques") return {disjoint_cliques(count_param(g, "k"), count_param(g, "size")), {}};
  if (g.kind == "dumbbell") {
    const std::size_t m = count_param(g, "m");
    const std::size_t len = g.has("len") ? count_param(g, "len") : dumbbell_path_length(m);
    return {dumbbell(m, g.has("p") ? g.real("p") : 0.5, len, seed_param(g)).graph, {}};
  }
  if (g.kind == "lower_bound") {
    auto [graph, sched] = lower_bound(count_param(g, "l"));
    return {std::move(graph), std::move(sched)};
  }
  throw Error("unknown generator '" + g.kind + "'");
}

/// none  mix:c[,spacing][,start][,seed]  burst:c[,round][,seed]
inline Schedule schedule_from_spec(const GenSpec& g, const Graph& g1) {
  if (g.kind == "none") return {};
  if (g.kind == "mix") {
    ScheduleParams params;
    params.changes = count_param(g, "c");
    params.spacing = static_cast<Round>(g.integer("spacing", 0));
    params.start = static_cast<Round>(g.integer("start", 1));
    return random_mix(g1, params, seed_param(g));
  }
  if (g.kind == "burst") return burst(g1, count_param(g, "c"), static_cast<Round>(g.integer("round", 1)), seed_param(g));
  throw Error("unknown schedule generator '" + g.kind + "'");
}

}  // namespace gen

}  // namespace stoneage
