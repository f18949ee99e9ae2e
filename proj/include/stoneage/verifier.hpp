#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stoneage/engine.hpp"
#include "stoneage/metrics.hpp"
#include "stoneage/mis.hpp"

namespace stoneage::verify {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct CheckReport {
  std::string check;
  Verdict verdict = Verdict::pass;
  std::optional<Round> round;  // first violation
  std::string detail;

  bool failed() const { return verdict == Verdict::fail; }
};

namespace detail {

inline CheckReport pass(std::string check) { return {std::move(check), Verdict::pass, std::nullopt, {}}; }

inline CheckReport fail(std::string check, Round r, std::string detail) {
  return {std::move(check), Verdict::fail, r, std::move(detail)};
}

inline bool mis_trace(const Trace& t) {
  return t.state_names.size() == mis::kStateCount &&
         std::equal(t.state_names.begin(), t.state_names.end(), mis::names().begin());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Correctness contract

/// (C2) Every output configuration is a valid MIS of its graph.
inline CheckReport check_safety(const Trace& t) {
  std::optional<CheckReport> bad;
  metrics::walk(t, [&](const RoundRecord& r, const Graph& g, const Graph&) {
    if (bad || !metrics::is_output_configuration(t, r)) return;
    if (!metrics::is_correct_output(t, r, g)) bad = detail::fail("safety", r.round, "output configuration is not an MIS");
  });
  return bad ? *bad : detail::pass("safety");
}

/// (C3) An output configuration followed by a change-free round is kept unchanged.
inline CheckReport check_stability(const Trace& t) {
  for (const RoundRecord& r : t.rounds) {
    if (!r.changes.empty() || !metrics::is_output_configuration(t, r)) continue;
    for (const NodeStep& s : r.steps) {
      if (s.after != s.before) {
        return detail::fail("stability", r.round, "node " + std::to_string(s.id) + " left its output state");
      }
    }
  }
  return detail::pass("stability");
}

/// (C1), empirically: after the last applied change the run reaches an output configuration.
inline CheckReport check_liveness(const Trace& t) {
  if (t.termination == Termination::budget) return {"liveness", Verdict::inconclusive, std::nullopt, "budget exhausted"};
  const Round last = t.applied_schedule().last_round();
  for (const RoundRecord& r : t.rounds) {
    if (r.round > last && metrics::is_output_configuration(t, r)) return detail::pass("liveness");
  }
  const bool empty = t.rounds.empty() ? t.initial.node_count() == 0 : t.rounds.back().steps.empty();
  if (empty) return detail::pass("liveness");
  return {"liveness", Verdict::fail, std::nullopt, "no output configuration after the last change"};
}

/// Greedy confinement: a node outside `affected` never resides in D' or U'.
inline CheckReport check_greedy_confinement(const Trace& t, const std::set<NodeId>& affected) {
  if (!detail::mis_trace(t)) throw Error("greedy confinement is defined for the MIS protocol only");
  for (const RoundRecord& r : t.rounds) {
    for (const NodeStep& s : r.steps) {
      if (affected.count(s.id)) continue;
      if (mis::is_greedy(s.before) || (s.kind != StepKind::deleted && mis::is_greedy(s.after))) {
        return detail::fail("greedy_confinement", r.round, "non-affected node " + std::to_string(s.id) + " is in a Greedy state");
      }
    }
  }
  return detail::pass("greedy_confinement");
}

inline CheckReport check_greedy_confinement(const Trace& t) {
  return check_greedy_confinement(t, affected_nodes(t.initial_graph, t.applied_schedule()));
}

// ---------------------------------------------------------------------------
// Structural invariants of the MIS protocol, one round at a time

/// First violated invariant in round r, given G_r and G_{r+1}; empty when all hold.
///   no adjacent W-entry, component separation, one-way flow, and (when `static_run`)
///   no defensive D1/U_j -> L rule firing.
inline std::optional<std::string> round_violation(const RoundRecord& r, const Graph& g, const Graph& next,
                                                  bool static_run) {
  using mis::MisState;
  using mis::id;
  auto step_of = [&](NodeId v) -> const NodeStep* {
    auto it = std::lower_bound(r.steps.begin(), r.steps.end(), v, [](const NodeStep& s, NodeId x) { return s.id < x; });
    return it != r.steps.end() && it->id == v ? &*it : nullptr;
  };
  const StateId w = id(MisState::W);
  for (const NodeStep& s : r.steps) {
    if (s.kind == StepKind::deleted) continue;
    const std::string who = "node " + std::to_string(s.id);
    if (!mis::is_proportional(s.before) && mis::is_proportional(s.after)) {
      return who + " flows back into the Proportional component";
    }
    if (static_run && s.rule >= 0 && mis::is_defensive_rule(s.before, static_cast<std::size_t>(s.rule))) {
      return who + " fired a defensive W-detection rule";
    }
    if (s.before != w && s.after == w) {
      for (NodeId u : next.neighbors(s.id)) {
        const NodeStep* o = step_of(u);
        if (u > s.id && o && o->before != w && o->after == w) {
          return "adjacent nodes " + std::to_string(s.id) + " and " + std::to_string(u) + " enter W together";
        }
      }
    }
    if (s.before == id(MisState::Dp) && s.after == id(MisState::Up) && s.kind == StepKind::resident) {
      for (NodeId u : g.neighbors(s.id)) {
        if (!next.has_edge(s.id, u)) continue;
        const NodeStep* o = step_of(u);
        if (o && o->kind == StepKind::resident && mis::is_proportional(o->before) && o->before != id(MisState::S)) {
          return who + " enters U' next to Proportional node " + std::to_string(u);
        }
      }
    }
  }
  return std::nullopt;
}

inline CheckReport check_invariants(const Trace& t) {
  if (!detail::mis_trace(t)) throw Error("structural invariants are defined for the MIS protocol only");
  const bool static_run = t.applied_schedule().total() == 0;
  std::optional<CheckReport> bad;
  metrics::walk(t, [&](const RoundRecord& r, const Graph& g, const Graph& next) {
    if (bad) return;
    if (auto v = round_violation(r, g, next, static_run)) bad = detail::fail("invariants", r.round, *v);
  });
  return bad ? *bad : detail::pass("invariants");
}

/// Every applicable check on one trace.
inline std::vector<CheckReport> check_all(const Trace& t) {
  std::vector<CheckReport> out{check_safety(t), check_stability(t), check_liveness(t)};
  if (detail::mis_trace(t)) {
    out.push_back(check_greedy_confinement(t));
    out.push_back(check_invariants(t));
  }
  return out;
}

inline bool passed(const std::vector<CheckReport>& reports) {
  return std::none_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.failed(); });
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration

/// Exact probability num / 2^exp, kept in lowest terms.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(std::uint64_t num, unsigned exp) : num_(num), exp_(exp) { normalize(); }

  static Dyadic one() { return {1, 0}; }

  std::uint64_t numerator() const { return num_; }
  unsigned exponent() const { return exp_; }

  Dyadic operator+(const Dyadic& o) const {
    const unsigned e = std::max(exp_, o.exp_);
    if (e > 62) throw Error("dyadic exponent overflow");
    return {(num_ << (e - exp_)) + (o.num_ << (e - o.exp_)), e};
  }
  Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }

  /// Multiplies by 1 / 2^k.
  Dyadic halved(unsigned k) const {
    if (exp_ + k > 62) throw Error("dyadic exponent overflow");
    return {num_, exp_ + k};
  }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(std::uint64_t{1} << exp_); }
  std::string to_string() const { return std::to_string(num_) + "/2^" + std::to_string(exp_); }

  bool operator==(const Dyadic&) const = default;
  auto operator<=>(const Dyadic& o) const {
    const unsigned e = std::max(exp_, o.exp_);
    return (num_ << (e - exp_)) <=> (o.num_ << (e - o.exp_));
  }

 private:
  void normalize() {
    if (num_ == 0) {
      exp_ = 0;
      return;
    }
    const unsigned z = std::min<unsigned>(static_cast<unsigned>(std::countr_zero(num_)), exp_);
    num_ >>= z;
    exp_ -= z;
  }

  std::uint64_t num_ = 0;
  unsigned exp_ = 0;
};

struct EnumerationLimits {
  std::size_t max_nodes = 4;
  Round max_horizon = 10;
  std::size_t max_configurations = std::size_t{1} << 20;  // distinct live configurations per round
};

struct EnumerationReport {
  /// Terminal configurations: node states in id order, with their exact probability.
  std::map<std::vector<StateId>, Dyadic> terminal;
  /// Round at which each terminal configuration was first reached.
  std::map<std::vector<StateId>, Round> first_reached;
  Dyadic residual;  // mass still running at the horizon
  std::vector<NodeId> nodes;  // the ids the terminal vectors refer to
  std::vector<std::string> violations;
  std::size_t branches = 0;  // successor configurations explored, before merging

  Dyadic total() const {
    Dyadic s = residual;
    for (const auto& [cfg, pr] : terminal) s += pr;
    return s;
  }
};

namespace detail {

inline std::string world_key(const World& w) {
  std::string k;
  for (NodeId v : w.nodes()) {
    k += std::to_string(v) + ':' + std::to_string(w.state(v)) + ',' + std::to_string(w.pending(v));
    for (const auto& [u, l] : w.ports(v)) k += ' ' + std::to_string(u) + '=' + std::to_string(l);
    k += ';';
  }
  return k;
}

}  // namespace detail

/// Explores every coin outcome of `p` on (g1, schedule) for `horizon` rounds, merging identical
/// configurations. A configuration is terminal once no changes remain and its output is correct.
/// The MIS invariants are checked on every branch when `p` is the MIS protocol.
inline EnumerationReport enumerate_small(const Graph& g1, const Schedule& schedule, Round horizon,
                                         const Protocol& p = mis::protocol(), const EnumerationLimits& lim = {}) {
  if (g1.node_count() > lim.max_nodes) throw Error("enumeration supports at most " + std::to_string(lim.max_nodes) + " nodes");
  if (horizon > lim.max_horizon) throw Error("enumeration horizon is at most " + std::to_string(lim.max_horizon));
  validate_schedule(g1, schedule);
  const bool check = mis::compatible(p);
  const bool static_run = schedule.total() == 0;

  EnumerationReport rep;
  std::map<std::string, std::pair<World, Dyadic>> live;
  World w0(p, g1);
  live.emplace(detail::world_key(w0), std::make_pair(w0, Dyadic::one()));

  auto settle = [&](Round r) {
    // Move configurations that are finished at the start of round r out of the live set.
    for (auto it = live.begin(); it != live.end();) {
      const World& w = it->second.first;
      if (schedule.last_round() < r && w.correct_output(p)) {
        std::vector<StateId> cfg;
        for (NodeId v : w.nodes()) cfg.push_back(w.state(v));
        rep.terminal[cfg] += it->second.second;
        rep.first_reached.emplace(cfg, r);
        it = live.erase(it);
      } else {
        ++it;
      }
    }
  };

  for (Round r = 1; r <= horizon; ++r) {
    settle(r);
    std::map<std::string, std::pair<World, Dyadic>> next_live;
    for (auto& [key, entry] : live) {
      World pre = entry.first;
      const Graph g = pre.graph();
      pre.deliver();
      std::vector<NodeStep> gone;
      for (const TopologyChange& c : schedule.at(r)) {
        if (c.kind == ChangeKind::node_delete) gone.push_back({c.u, pre.state(c.u), pre.state(c.u), kEpsilon, -1, -1, StepKind::deleted});
        pre.apply(c, p.initial);
      }
      const Graph next = pre.graph();

      // Outcome-set sizes per node; every branch is one choice per randomized node.
      std::vector<std::pair<NodeId, std::size_t>> random;
      for (NodeId v : pre.nodes()) {
        const auto rule = match_rule(p, pre.state(v), pre.port_counts(v));
        if (!rule) throw Error("no matching guard for node " + std::to_string(v));
        const std::size_t outcomes = p.rules[pre.state(v)][*rule].outcomes.size();
        if (outcomes > 1) {
          if (!std::has_single_bit(outcomes)) throw Error("enumeration needs outcome-sets of power-of-two size");
          random.emplace_back(v, outcomes);
        }
      }
      std::vector<std::size_t> choice(random.size(), 0);
      unsigned bits = 0;
      for (const auto& [v, k] : random) bits += static_cast<unsigned>(std::countr_zero(k));
      while (true) {
        FixedCoins coins;
        for (std::size_t i = 0; i < random.size(); ++i) coins.set(random[i].first, r, choice[i]);
        World w = pre;
        RoundRecord rec;
        rec.round = r;
        rec.changes = schedule.at(r);
        w.transition(p, coins, rec.steps);
        rec.steps.insert(rec.steps.end(), gone.begin(), gone.end());
        std::sort(rec.steps.begin(), rec.steps.end(), [](const NodeStep& a, const NodeStep& b) { return a.id < b.id; });
        w.advance_round();
        ++rep.branches;
        if (check) {
          if (auto v = round_violation(rec, g, next, static_run)) {
            rep.violations.push_back("round " + std::to_string(r) + ": " + *v);
          }
        }
        const Dyadic pr = entry.second.halved(bits);
        auto [it, fresh] = next_live.try_emplace(detail::world_key(w), w, Dyadic{});
        it->second.second += pr;
        if (next_live.size() > lim.max_configurations) throw Error("enumeration state-space budget exceeded");

        std::size_t i = 0;
        while (i < random.size() && ++choice[i] == random[i].second) choice[i++] = 0;
        if (i == random.size()) break;
      }
    }
    live = std::move(next_live);
  }
  settle(horizon + 1);
  for (const auto& [key, entry] : live) rep.residual += entry.second;
  rep.nodes = g1.nodes();
  return rep;
}

}  // namespace stoneage::verify
