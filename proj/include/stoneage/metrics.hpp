#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "stoneage/engine.hpp"
#include "stoneage/graph.hpp"
#include "stoneage/mis.hpp"

namespace stoneage::metrics {

using mis::MisState;
using mis::id;

// ---------------------------------------------------------------------------
// Walking a trace

/// State of `v` at the start of the record's round, if v resided in G_r (inserted nodes excluded).
inline std::optional<StateId> resident_state(const RoundRecord& r, NodeId v) {
  auto it = std::lower_bound(r.steps.begin(), r.steps.end(), v, [](const NodeStep& s, NodeId x) { return s.id < x; });
  if (it == r.steps.end() || it->id != v || it->kind == StepKind::inserted) return std::nullopt;
  return it->before;
}

/// Calls f(record, G_r, G_{r+1}) for every recorded round.
template <class F>
void walk(const Trace& t, F&& f) {
  Graph g = t.initial_graph;
  for (const RoundRecord& r : t.rounds) {
    if (r.changes.empty()) {
      f(r, g, g);
      continue;
    }
    Graph next = g;
    for (const TopologyChange& c : r.changes) apply_in_place(next, c);
    f(r, g, next);
    g = std::move(next);
  }
}

/// Per node, the rounds it took part in and its step in each.
using History = std::vector<std::pair<Round, const NodeStep*>>;

inline std::map<NodeId, History> histories(const Trace& t) {
  std::map<NodeId, History> out;
  for (const RoundRecord& r : t.rounds) {
    for (const NodeStep& s : r.steps) out[s.id].emplace_back(r.round, &s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configurations

/// The round-r configuration over G_r is an output configuration.
inline bool is_output_configuration(const Trace& t, const RoundRecord& r) {
  return std::all_of(r.steps.begin(), r.steps.end(),
                     [&](const NodeStep& s) { return s.kind == StepKind::inserted || t.is_output(s.before); });
}

/// The round-r output configuration is a valid MIS of g (normally G_r).
inline bool is_correct_output(const Trace& t, const RoundRecord& r, const Graph& g) {
  if (!is_output_configuration(t, r)) throw Error("not an output configuration");
  for (const NodeStep& s : r.steps) {
    if (s.kind == StepKind::inserted) continue;
    bool yes_neighbor = false;
    for (NodeId u : g.neighbors(s.id)) yes_neighbor = yes_neighbor || resident_state(r, u) == t.yes;
    if (s.before == t.yes ? yes_neighbor : !yes_neighbor) return false;
  }
  return true;
}

struct RoundClassification {
  std::vector<bool> silent;  // index k <-> rounds[k]
  std::size_t global_runtime = 0;
};

/// Silent rounds: correct output configuration and no topology change.
inline RoundClassification classify_rounds(const Trace& t) {
  RoundClassification out;
  walk(t, [&](const RoundRecord& r, const Graph& g, const Graph&) {
    const bool silent = r.changes.empty() && is_output_configuration(t, r) && is_correct_output(t, r, g);
    out.silent.push_back(silent);
    if (!silent) ++out.global_runtime;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Local runtime

/// Rounds in which each node resides in a non-output state.
inline std::map<NodeId, std::size_t> local_runtimes(const Trace& t) {
  std::map<NodeId, std::size_t> out;
  for (const RoundRecord& r : t.rounds) {
    for (const NodeStep& s : r.steps) {
      auto& n = out[s.id];
      if (!t.is_output(s.before)) ++n;
    }
  }
  return out;
}

inline std::size_t local_runtime(const Trace& t, NodeId v) {
  const auto all = local_runtimes(t);
  auto it = all.find(v);
  if (it == all.end()) throw Error("node " + std::to_string(v) + " does not appear in the trace");
  return it->second;
}

// ---------------------------------------------------------------------------
// Proportional tournaments

struct Tournament {
  Round start = 0;
  std::size_t u_turns = 0;

  bool operator==(const Tournament&) const = default;
};

/// Splits a node's Proportional-active rounds into turns and groups them at each D1-turn.
inline std::vector<Tournament> tournaments_of(const History& h) {
  std::vector<Tournament> out;
  bool open = false;
  std::optional<StateId> prev;
  for (const auto& [round, step] : h) {
    const StateId q = step->before;
    const bool new_turn = !prev || *prev != q;
    prev = q;
    if (!mis::is_proportional(q)) {
      open = false;
      continue;
    }
    if (!new_turn) continue;
    if (q == id(MisState::D1)) {
      out.push_back({round, 0});
      open = true;
    } else if (open && mis::is_u_state(q)) {
      ++out.back().u_turns;
    }
  }
  return out;
}

inline std::map<NodeId, std::vector<Tournament>> tournaments(const Trace& t) {
  std::map<NodeId, std::vector<Tournament>> out;
  for (const auto& [v, h] : histories(t)) out[v] = tournaments_of(h);
  return out;
}

inline std::vector<Tournament> tournaments_of(const Trace& t, NodeId v) {
  const auto h = histories(t);
  auto it = h.find(v);
  if (it == h.end()) throw Error("node " + std::to_string(v) + " does not appear in the trace");
  return tournaments_of(it->second);
}

// ---------------------------------------------------------------------------
// Greedy tournaments

struct GreedyTournament {
  std::vector<NodeId> participants;
  std::size_t active_length = 0;   // rounds with some participant still in its U'-run
  std::size_t self_transitions = 0;  // U' -> U' (heads)
  std::size_t tails = 0;             // U' -> D' by coin
  bool clean = true;                 // no participant deleted or given a new edge during its run
};

/// Greedy tournament t: nodes in D' at round t-1 and in U' at round t, keyed by t.
inline std::map<Round, GreedyTournament> greedy_tournaments(const Trace& t) {
  std::map<Round, std::set<NodeId>> new_edges;
  for (const RoundRecord& r : t.rounds) {
    for (const TopologyChange& c : r.changes) {
      if (c.kind == ChangeKind::edge_insert) {
        new_edges[r.round].insert(c.u);
        new_edges[r.round].insert(c.v);
      }
    }
  }
  const StateId dp = id(MisState::Dp);
  const StateId up = id(MisState::Up);

  std::map<Round, GreedyTournament> out;
  for (const auto& [v, h] : histories(t)) {
    for (std::size_t k = 1; k < h.size(); ++k) {
      if (h[k].second->before != up || h[k - 1].second->before != dp) continue;
      const Round start = h[k].first;
      GreedyTournament& g = out[start];
      g.participants.push_back(v);
      std::size_t len = 0;
      for (std::size_t j = k; j < h.size() && h[j].second->before == up; ++j) {
        const NodeStep& s = *h[j].second;
        ++len;
        if (s.kind == StepKind::deleted) g.clean = false;
        auto ne = new_edges.find(h[j].first);
        if (ne != new_edges.end() && ne->second.count(v)) g.clean = false;
        if (s.kind == StepKind::deleted) break;
        if (s.after == up) ++g.self_transitions;
        if (s.after == dp && s.outcome >= 0) ++g.tails;
      }
      g.active_length = std::max(g.active_length, len);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quality and released nodes

struct QualityReport {
  std::map<NodeId, std::size_t> quality;   // every node; 0 unless it won a Proportional tournament
  std::set<NodeId> proportional_winners;
};

/// q(v): neighbors of v at the start of its winning tournament that enter L from a Proportional
/// state while v holds W from that win. A winner never covers itself.
inline QualityReport quality(const Trace& t) {
  QualityReport rep;
  std::map<NodeId, std::vector<NodeId>> start_nbrs;  // neighbors at the start of the current tournament
  std::map<NodeId, std::vector<NodeId>> win_nbrs;    // frozen at a Proportional win, while in W
  std::map<NodeId, StateId> prev;

  walk(t, [&](const RoundRecord& r, const Graph& g, const Graph& next) {
    for (const NodeStep& s : r.steps) {
      rep.quality.emplace(s.id, 0);
      auto p = prev.find(s.id);
      const bool new_d1_turn = s.before == id(MisState::D1) && (p == prev.end() || p->second != s.before);
      if (new_d1_turn && s.kind != StepKind::inserted) start_nbrs[s.id] = g.neighbors(s.id);
      if (new_d1_turn && s.kind == StepKind::inserted) start_nbrs[s.id] = next.neighbors(s.id);
    }
    for (const NodeStep& s : r.steps) {
      if (s.kind == StepKind::deleted) continue;
      const bool covered = mis::is_proportional(s.before) && s.after == id(MisState::L);
      if (!covered) continue;
      for (NodeId x : next.neighbors(s.id)) {
        auto w = win_nbrs.find(x);
        if (w == win_nbrs.end() || resident_state(r, x) != id(MisState::W)) continue;
        if (std::binary_search(w->second.begin(), w->second.end(), s.id)) ++rep.quality[x];
      }
    }
    for (const NodeStep& s : r.steps) {
      if (mis::is_u_state(s.before) && s.after == id(MisState::W) && s.kind != StepKind::deleted) {
        win_nbrs[s.id] = start_nbrs[s.id];
        rep.proportional_winners.insert(s.id);
      } else if (s.before == id(MisState::W) && (s.after != id(MisState::W) || s.kind == StepKind::deleted)) {
        win_nbrs.erase(s.id);
      }
      prev[s.id] = s.before;
    }
  });
  return rep;
}

inline std::size_t quality(const Trace& t, NodeId v) {
  const auto rep = quality(t);
  auto it = rep.quality.find(v);
  return it == rep.quality.end() ? 0 : it->second;
}

/// H: L-nodes at the first round with no W neighbor, and W-nodes that gain an inserted edge.
inline std::set<NodeId> released(const Trace& t) {
  std::set<NodeId> h;
  walk(t, [&](const RoundRecord& r, const Graph&, const Graph& next) {
    for (const TopologyChange& c : r.changes) {
      if (c.kind != ChangeKind::edge_insert) continue;
      for (NodeId x : {c.u, c.v}) {
        if (resident_state(r, x) == id(MisState::W)) h.insert(x);
      }
    }
    for (const NodeStep& s : r.steps) {
      if (s.kind != StepKind::resident || s.before != id(MisState::L) || h.count(s.id)) continue;
      bool w_neighbor = false;
      for (NodeId x : next.neighbors(s.id)) w_neighbor = w_neighbor || resident_state(r, x) == id(MisState::W);
      if (!w_neighbor) h.insert(s.id);
    }
  });
  return h;
}

// ---------------------------------------------------------------------------
// Confinement summary and full report

struct ConfinementReport {
  std::size_t max_non_affected_runtime = 0;
  std::size_t global_runtime = 0;
  std::size_t changes = 0;
  double amortized_runtime = 0;  // global_runtime / (C + 1)
  std::set<NodeId> affected;
  std::map<NodeId, std::size_t> local_runtime;
  std::map<NodeId, std::size_t> local_changes;  // C_u; empty unless requested
};

inline ConfinementReport confinement_report(const Trace& t, bool with_local_changes = true) {
  ConfinementReport rep;
  const Schedule s = t.applied_schedule();
  rep.affected = affected_nodes(t.initial_graph, s);
  rep.local_runtime = local_runtimes(t);
  rep.global_runtime = classify_rounds(t).global_runtime;
  rep.changes = s.total();
  rep.amortized_runtime = static_cast<double>(rep.global_runtime) / static_cast<double>(rep.changes + 1);
  for (const auto& [v, rt] : rep.local_runtime) {
    if (!rep.affected.count(v)) rep.max_non_affected_runtime = std::max(rep.max_non_affected_runtime, rt);
  }
  if (with_local_changes) rep.local_changes = change_counts_within(t.initial_graph, s);
  return rep;
}

struct RunReport {
  std::size_t rounds = 0;
  Termination termination = Termination::silence;
  RoundClassification classification;
  ConfinementReport confinement;
  std::map<NodeId, std::vector<Tournament>> tournaments;
  std::map<Round, GreedyTournament> greedy;
  QualityReport quality;
  std::set<NodeId> released;
  std::size_t n = 0;  // max_r |V(G_r)|
};

/// Every metric at once. Tournament-level metrics assume the MIS state numbering.
inline RunReport make_report(const Trace& t, bool with_local_changes = true) {
  RunReport rep;
  rep.rounds = t.rounds.size();
  rep.termination = t.termination;
  rep.classification = classify_rounds(t);
  rep.confinement = confinement_report(t, with_local_changes);
  rep.tournaments = tournaments(t);
  rep.greedy = greedy_tournaments(t);
  rep.quality = quality(t);
  rep.released = released(t);
  rep.n = max_node_count(t.initial_graph, t.applied_schedule());
  return rep;
}

/// One row per round: round, silent, #active, #W, #L, #changes.
struct RoundRow {
  Round round;
  bool silent;
  std::size_t active;
  std::size_t yes;
  std::size_t no;
  std::size_t changes;
};

inline std::vector<RoundRow> round_table(const Trace& t) {
  const auto cls = classify_rounds(t);
  std::vector<RoundRow> rows;
  for (std::size_t k = 0; k < t.rounds.size(); ++k) {
    const RoundRecord& r = t.rounds[k];
    RoundRow row{r.round, cls.silent[k], 0, 0, 0, r.changes.size()};
    for (const NodeStep& s : r.steps) {
      if (s.kind == StepKind::inserted) continue;
      if (s.before == t.yes) {
        ++row.yes;
      } else if (s.before == t.no) {
        ++row.no;
      } else {
        ++row.active;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace stoneage::metrics
