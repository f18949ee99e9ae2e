#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stoneage/graph.hpp"
#include "stoneage/protocol.hpp"
#include "stoneage/random.hpp"
#include "stoneage/types.hpp"

namespace stoneage {

/// Anything that can answer "which of `faces` outcomes does node `id` pick in round `r`".
template <class C>
concept CoinSource = requires(C c, NodeId id, Round r, std::size_t faces) {
  { c.draw(id, r, faces) } -> std::convertible_to<std::size_t>;
};

/// What happens when a scheduled change does not apply to the current graph.
enum class ChangePolicy { fail_fast, skip_and_warn };

/// How a node took part in a round.
enum class StepKind : std::uint8_t {
  resident,  // present at the start of the round and after the changes
  inserted,  // inserted in phase (ii); not part of G_r but transitions in this round
  deleted,   // part of G_r, removed in phase (ii); no transition
};

struct NodeStep {
  NodeId id = 0;
  StateId before = 0;
  StateId after = 0;
  LetterId emission = kEpsilon;
  std::int16_t rule = -1;
  std::int16_t outcome = -1;
  StepKind kind = StepKind::resident;

  bool operator==(const NodeStep&) const = default;
};

struct RoundRecord {
  Round round = 0;
  std::vector<TopologyChange> changes;  // applied, in order
  std::vector<std::string> skipped;     // skip_and_warn only
  std::vector<NodeStep> steps;          // sorted by node id

  bool operator==(const RoundRecord&) const = default;
};

/// Mutable ground truth of one simulation: graph, per-node state and ports, in-flight emissions.
///
/// Ports are stored per node as (peer, twin, letter) where `twin` is the index of the mirrored
/// entry in the peer's port list, so delivering a broadcast is one pass over the sender's ports.
/// Each node also keeps exact per-letter port counts; observation caps them at the bound.
class World {
 public:
  World() = default;

  /// All nodes of g in the initial state, every port holding the initial letter.
  World(const Protocol& p, const Graph& g) : alphabet_(p.alphabet_size()), sigma0_(p.initial_letter) {
    for (NodeId v : g.nodes()) add_node(v, p.initial, 0);
    for (auto [u, v] : g.edges()) link(u, v);
  }

  static World empty(const Protocol& p) { return World(p, Graph{}); }

  Round round() const { return round_; }
  std::size_t alphabet() const { return alphabet_; }
  LetterId initial_letter() const { return sigma0_; }
  std::size_t node_count() const { return index_.size(); }
  bool contains(NodeId v) const { return index_.count(v) != 0; }

  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out;
    out.reserve(index_.size());
    for (const auto& s : slots_) {
      if (s.alive) out.push_back(s.id);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  StateId state(NodeId v) const { return slot(v).state; }
  void set_state(NodeId v, StateId q) { slot(v).state = q; }

  LetterId pending(NodeId v) const { return slot(v).pending; }
  void set_pending(NodeId v, LetterId l) { slot(v).pending = l; }

  /// phi_v(u) for every neighbor u of v.
  std::map<NodeId, LetterId> ports(NodeId v) const {
    std::map<NodeId, LetterId> out;
    for (const Port& p : slot(v).ports) out.emplace(slots_[p.peer].id, p.letter);
    return out;
  }

  /// Overwrites phi_v(u); u must be a neighbor of v.
  void set_port(NodeId v, NodeId u, LetterId l) {
    if (l >= alphabet_) throw Error("ports only hold alphabet letters");
    Slot& s = slot(v);
    const std::uint32_t us = index_.at(u);
    for (Port& p : s.ports) {
      if (p.peer == us) {
        --s.counts[p.letter];
        p.letter = l;
        ++s.counts[l];
        return;
      }
    }
    throw TopologyError("node " + std::to_string(u) + " is not a neighbor of " + std::to_string(v));
  }

  /// Exact number of ports of v holding each letter.
  std::span<const std::uint32_t> port_counts(NodeId v) const { return slot(v).counts; }

  Graph graph() const {
    std::vector<std::pair<NodeId, NodeId>> edges;
    Graph g;
    for (NodeId v : nodes()) g.add_node(v);
    for (const auto& s : slots_) {
      if (!s.alive) continue;
      for (const Port& p : s.ports) {
        if (s.id < slots_[p.peer].id) edges.emplace_back(s.id, slots_[p.peer].id);
      }
    }
    return Graph::from_edges(std::move(g), edges);
  }

  std::size_t degree(NodeId v) const { return slot(v).ports.size(); }

  /// All nodes in output states, yes-nodes independent, every no-node next to a yes-node.
  bool correct_output(const Protocol& p) const {
    for (const Slot& s : slots_) {
      if (s.alive && !p.is_output(s.state)) return false;
    }
    for (const Slot& s : slots_) {
      if (!s.alive) continue;
      bool yes_neighbor = false;
      for (const Port& e : s.ports) yes_neighbor = yes_neighbor || slots_[e.peer].state == p.yes;
      if (s.state == p.yes ? yes_neighbor : !yes_neighbor) return false;
    }
    return true;
  }

  bool operator==(const World& o) const {
    if (round_ != o.round_ || alphabet_ != o.alphabet_ || sigma0_ != o.sigma0_) return false;
    if (nodes() != o.nodes()) return false;
    for (NodeId v : nodes()) {
      if (state(v) != o.state(v) || pending(v) != o.pending(v) || ports(v) != o.ports(v)) return false;
    }
    return true;
  }

  // Phase (i): every pending non-empty emission lands in the sender's neighbors' ports.
  void deliver() {
    for (Slot& s : slots_) {
      if (!s.alive || s.pending == kEpsilon) continue;
      const LetterId l = s.pending;
      for (const Port& e : s.ports) {
        Slot& t = slots_[e.peer];
        Port& p = t.ports[e.twin];
        --t.counts[p.letter];
        p.letter = l;
        ++t.counts[l];
      }
      s.pending = kEpsilon;
    }
  }

  // Phase (ii), one change. Throws TopologyError when inapplicable.
  void apply(const TopologyChange& c, StateId q0) {
    switch (c.kind) {
      case ChangeKind::edge_insert:
        if (c.u == c.v) throw TopologyError("self-loop on node " + std::to_string(c.u));
        if (!contains(c.u) || !contains(c.v)) throw TopologyError("edge " + Graph::edge_name(c.u, c.v) + " references a missing node");
        if (find_port(index_.at(c.u), index_.at(c.v)) >= 0) throw TopologyError("edge " + Graph::edge_name(c.u, c.v) + " exists");
        link(c.u, c.v);
        break;
      case ChangeKind::edge_delete: {
        if (!contains(c.u) || !contains(c.v)) throw TopologyError("edge " + Graph::edge_name(c.u, c.v) + " does not exist");
        const auto us = index_.at(c.u);
        const auto k = find_port(us, index_.at(c.v));
        if (k < 0) throw TopologyError("edge " + Graph::edge_name(c.u, c.v) + " does not exist");
        unlink(us, static_cast<std::uint32_t>(k));
        break;
      }
      case ChangeKind::node_insert:
        if (contains(c.u)) throw TopologyError("node " + std::to_string(c.u) + " exists");
        add_node(c.u, q0, round_);
        break;
      case ChangeKind::node_delete: {
        if (!contains(c.u)) throw TopologyError("node " + std::to_string(c.u) + " does not exist");
        const auto us = index_.at(c.u);
        while (!slots_[us].ports.empty()) unlink(us, static_cast<std::uint32_t>(slots_[us].ports.size() - 1));
        slots_[us].alive = false;
        slots_[us].pending = kEpsilon;
        index_.erase(c.u);
        break;
      }
    }
  }

  // Phases (iii) and (iv) for every live node, plus bookkeeping for the round record.
  template <CoinSource Coins>
  void transition(const Protocol& p, Coins& coins, std::vector<NodeStep>& steps) {
    for (std::uint32_t i = 0; i < slots_.size(); ++i) {
      Slot& s = slots_[i];
      if (!s.alive) continue;
      const Transition t = select_transition(p, s.state, s.counts, [&](std::size_t faces) {
        return static_cast<std::size_t>(coins.draw(s.id, round_, faces));
      });
      NodeStep step;
      step.id = s.id;
      step.before = s.state;
      step.after = t.next;
      step.emission = t.emit;
      step.rule = static_cast<std::int16_t>(t.rule);
      step.outcome = t.outcome;
      step.kind = s.born == round_ ? StepKind::inserted : StepKind::resident;
      steps.push_back(step);
      s.state = t.next;
      s.pending = t.emit;
    }
  }

  void advance_round() { ++round_; }

 private:
  struct Port {
    std::uint32_t peer;
    std::uint32_t twin;
    LetterId letter;
  };

  struct Slot {
    NodeId id = 0;
    StateId state = 0;
    LetterId pending = kEpsilon;
    bool alive = true;
    Round born = 0;
    std::vector<Port> ports;
    std::vector<std::uint32_t> counts;
  };

  const Slot& slot(NodeId v) const {
    auto it = index_.find(v);
    if (it == index_.end()) throw TopologyError("unknown node " + std::to_string(v));
    return slots_[it->second];
  }
  Slot& slot(NodeId v) { return const_cast<Slot&>(std::as_const(*this).slot(v)); }

  void add_node(NodeId v, StateId q0, Round born) {
    Slot s;
    s.id = v;
    s.state = q0;
    s.born = born;
    s.counts.assign(alphabet_, 0);
    index_.emplace(v, static_cast<std::uint32_t>(slots_.size()));
    slots_.push_back(std::move(s));
  }

  std::int64_t find_port(std::uint32_t us, std::uint32_t vs) const {
    const auto& ports = slots_[us].ports;
    for (std::size_t k = 0; k < ports.size(); ++k) {
      if (ports[k].peer == vs) return static_cast<std::int64_t>(k);
    }
    return -1;
  }

  void link(NodeId u, NodeId v) {
    const auto us = index_.at(u);
    const auto vs = index_.at(v);
    Slot& a = slots_[us];
    Slot& b = slots_[vs];
    a.ports.push_back({vs, static_cast<std::uint32_t>(b.ports.size()), sigma0_});
    b.ports.push_back({us, static_cast<std::uint32_t>(a.ports.size() - 1), sigma0_});
    ++a.counts[sigma0_];
    ++b.counts[sigma0_];
  }

  // Removes port k of slot us together with its twin, erasing both stored letters.
  void unlink(std::uint32_t us, std::uint32_t k) {
    const Port e = slots_[us].ports[k];
    remove_port(e.peer, e.twin);
    remove_port(us, k);
  }

  void remove_port(std::uint32_t s, std::uint32_t k) {
    auto& ports = slots_[s].ports;
    --slots_[s].counts[ports[k].letter];
    const std::uint32_t last = static_cast<std::uint32_t>(ports.size() - 1);
    if (k != last) {
      ports[k] = ports[last];
      slots_[ports[k].peer].ports[ports[k].twin].twin = k;
    }
    ports.pop_back();
  }

  std::vector<Slot> slots_;
  std::unordered_map<NodeId, std::uint32_t> index_;
  std::size_t alphabet_ = 0;
  LetterId sigma0_ = 0;
  Round round_ = 1;
};

/// Executes one synchronous round: (i) delivery, (ii) topology changes in listed order,
/// (iii) transitions, (iv) emissions become pending. Advances the world to the next round.
template <CoinSource Coins>
RoundRecord step_round(World& world, std::span<const TopologyChange> changes, const Protocol& p, Coins& coins,
                       ChangePolicy policy = ChangePolicy::fail_fast) {
  RoundRecord rec;
  rec.round = world.round();
  world.deliver();

  std::vector<NodeStep> gone;
  for (const TopologyChange& c : changes) {
    const bool deleting = c.kind == ChangeKind::node_delete && world.contains(c.u);
    const StateId last = deleting ? world.state(c.u) : 0;
    try {
      world.apply(c, p.initial);
    } catch (const TopologyError& e) {
      const std::string msg = "round " + std::to_string(rec.round) + ": " + to_string(c) + ": " + e.what();
      if (policy == ChangePolicy::fail_fast) throw TopologyError(msg);
      rec.skipped.push_back(msg);
      continue;
    }
    rec.changes.push_back(c);
    if (deleting) {
      NodeStep s;
      s.id = c.u;
      s.before = s.after = last;
      s.kind = StepKind::deleted;
      gone.push_back(s);
    }
  }

  rec.steps.reserve(world.node_count() + gone.size());
  world.transition(p, coins, rec.steps);
  rec.steps.insert(rec.steps.end(), gone.begin(), gone.end());
  std::sort(rec.steps.begin(), rec.steps.end(), [](const NodeStep& a, const NodeStep& b) { return a.id < b.id; });
  world.advance_round();
  return rec;
}

// ---------------------------------------------------------------------------
// Output configurations

/// True iff every node resides in an output state (vacuously true for no nodes).
inline bool is_output_configuration(const World& w, const Protocol& p) {
  for (NodeId v : w.nodes()) {
    if (!p.is_output(w.state(v))) return false;
  }
  return true;
}

/// Yes-nodes independent and every no-node has a yes-neighbor. Throws on a non-output configuration.
inline bool is_correct_output(const World& w, const Protocol& p) {
  const Graph g = w.graph();
  for (NodeId v : g.nodes()) {
    const StateId q = w.state(v);
    if (!p.is_output(q)) throw Error("not an output configuration");
    bool yes_neighbor = false;
    for (NodeId u : g.neighbors(v)) yes_neighbor = yes_neighbor || w.state(u) == p.yes;
    if (q == p.yes && yes_neighbor) return false;
    if (q == p.no && !yes_neighbor) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Runs and traces

enum class Termination { silence, budget };

inline const char* to_string(Termination t) { return t == Termination::silence ? "silence" : "budget"; }

struct StopPolicy {
  std::size_t silence_window = 2;
  Round max_rounds = 100000;
};

/// Everything needed to recompute any metric offline.
struct Trace {
  std::uint64_t seed = 0;
  std::vector<std::string> state_names;
  StateId yes = 0;
  StateId no = 0;
  World initial;
  Graph initial_graph;
  std::vector<RoundRecord> rounds;
  Termination termination = Termination::silence;

  bool is_output(StateId q) const { return q == yes || q == no; }

  /// The changes actually applied, as a schedule.
  Schedule applied_schedule() const {
    Schedule s;
    for (const RoundRecord& r : rounds) {
      for (const TopologyChange& c : r.changes) s.add(r.round, c);
    }
    return s;
  }

  bool operator==(const Trace&) const = default;
};

/// Iterates step_round from the world's current round until the schedule is exhausted and the
/// last `silence_window` rounds were silent, or until `max_rounds` rounds have run.
template <CoinSource Coins>
Trace run(World initial, const Schedule& schedule, const Protocol& p, const StopPolicy& stop, Coins& coins,
          ChangePolicy policy = ChangePolicy::fail_fast, std::uint64_t seed = 0) {
  Trace trace;
  trace.seed = seed;
  trace.state_names = p.states;
  trace.yes = p.yes;
  trace.no = p.no;
  trace.initial_graph = initial.graph();
  trace.initial = initial;

  World& world = initial;
  std::size_t silent_streak = 0;
  Round simulated = 0;
  while (true) {
    const Round r = world.round();
    const bool changes_left = schedule.last_round() >= r;
    if (!changes_left && (world.node_count() == 0 || silent_streak >= stop.silence_window)) {
      trace.termination = Termination::silence;
      break;
    }
    if (simulated >= stop.max_rounds) {
      trace.termination = Termination::budget;
      break;
    }
    const auto& changes = schedule.at(r);
    const bool silent = changes.empty() && world.correct_output(p);
    trace.rounds.push_back(step_round(world, changes, p, coins, policy));
    silent_streak = silent && trace.rounds.back().changes.empty() ? silent_streak + 1 : 0;
    ++simulated;
  }
  return trace;
}

/// Convenience: fresh world on g, seeded coins.
inline Trace run_seeded(const Graph& g, const Schedule& schedule, const Protocol& p, std::uint64_t seed,
                        const StopPolicy& stop, ChangePolicy policy = ChangePolicy::fail_fast) {
  SeededCoins coins(seed);
  return run(World(p, g), schedule, p, stop, coins, policy, seed);
}

/// Recovers each recorded coin outcome so the trace can be replayed step by step.
inline FixedCoins recorded_coins(const Trace& t) {
  FixedCoins coins;
  for (const RoundRecord& r : t.rounds) {
    for (const NodeStep& s : r.steps) {
      if (s.outcome >= 0) coins.set(s.id, r.round, static_cast<std::size_t>(s.outcome));
    }
  }
  return coins;
}

/// Replays a trace from its initial world, returning the world after every round
/// (element k is the world at the start of round initial.round() + k + 1).
inline std::vector<World> replay(const Trace& t, const Protocol& p) {
  FixedCoins coins = recorded_coins(t);
  std::vector<World> out;
  World w = t.initial;
  for (const RoundRecord& r : t.rounds) {
    RoundRecord again = step_round(w, r.changes, p, coins);
    if (again.steps != r.steps) throw Error("replay diverged in round " + std::to_string(r.round));
    out.push_back(w);
  }
  return out;
}

}  // namespace stoneage
