#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stoneage/types.hpp"

namespace stoneage {

/// Threshold test on one entry of the bounded count vector: min <= x[letter] <= max.
struct LetterTest {
  LetterId letter = 0;
  std::uint32_t min = 0;
  std::uint32_t max = 0;

  bool operator==(const LetterTest&) const = default;
};

/// One (next-state, emission) pair of an outcome-set. `emit` may be kEpsilon.
struct Outcome {
  StateId next = 0;
  LetterId emit = kEpsilon;

  bool operator==(const Outcome&) const = default;
};

/// Guarded rule: a conjunction of letter tests and a nonempty outcome-set drawn uniformly.
struct Rule {
  std::vector<LetterTest> guard;
  std::vector<Outcome> outcomes;

  bool operator==(const Rule&) const = default;
};

/// A complete Stone Age machine. Rules are kept per state, ordered, first match wins.
struct Protocol {
  std::vector<std::string> states;
  std::vector<std::string> letters;
  StateId initial = 0;
  StateId yes = 0;
  StateId no = 0;
  LetterId initial_letter = 0;
  std::uint32_t bound = 1;
  std::vector<std::vector<Rule>> rules;

  bool operator==(const Protocol&) const = default;

  std::size_t alphabet_size() const { return letters.size(); }
  bool is_output(StateId q) const { return q == yes || q == no; }

  std::optional<StateId> find_state(std::string_view name) const {
    auto it = std::find(states.begin(), states.end(), name);
    if (it == states.end()) return std::nullopt;
    return static_cast<StateId>(it - states.begin());
  }

  std::optional<LetterId> find_letter(std::string_view name) const {
    auto it = std::find(letters.begin(), letters.end(), name);
    if (it == letters.end()) return std::nullopt;
    return static_cast<LetterId>(it - letters.begin());
  }

  std::string letter_name(LetterId l) const { return l == kEpsilon ? "eps" : letters.at(l); }
};

/// Bounded count vector: entry for letter s is min(#ports holding s, b).
using CountVector = std::vector<std::uint32_t>;

/// Builds the bounded count vector of a port map.
inline CountVector observe(const std::map<NodeId, LetterId>& ports, std::size_t alphabet,
                           std::uint32_t bound) {
  CountVector counts(alphabet, 0);
  for (const auto& [peer, letter] : ports) {
    if (letter >= alphabet) throw Error("port holds a letter outside the alphabet");
    if (counts[letter] < bound) ++counts[letter];
  }
  return counts;
}

/// Tests a guard against raw (unbounded) counts; the bound is applied per entry.
inline bool guard_matches(std::span<const LetterTest> guard, std::span<const std::uint32_t> counts,
                          std::uint32_t bound) {
  for (const LetterTest& t : guard) {
    const std::uint32_t x = std::min(counts[t.letter], bound);
    if (x < t.min || x > t.max) return false;
  }
  return true;
}

/// Index of the first rule of `state` whose guard matches, if any.
inline std::optional<std::size_t> match_rule(const Protocol& p, StateId state,
                                             std::span<const std::uint32_t> counts) {
  const auto& rules = p.rules[state];
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (guard_matches(rules[i].guard, counts, p.bound)) return i;
  }
  return std::nullopt;
}

/// Result of applying the transition function once.
struct Transition {
  std::uint16_t rule = 0;
  std::int16_t outcome = -1;  // -1: singleton outcome-set, no randomness consumed
  StateId next = 0;
  LetterId emit = kEpsilon;
};

/// Applies delta to (state, counts). `draw(faces)` must return an index in [0, faces);
/// it is only called for outcome-sets with more than one element.
template <class Draw>
Transition select_transition(const Protocol& p, StateId state, std::span<const std::uint32_t> counts,
                             Draw&& draw) {
  const auto rule = match_rule(p, state, counts);
  if (!rule) throw Error("no matching guard in state " + p.states.at(state));
  const Rule& r = p.rules[state][*rule];
  Transition t;
  t.rule = static_cast<std::uint16_t>(*rule);
  std::size_t pick = 0;
  if (r.outcomes.size() > 1) {
    pick = draw(r.outcomes.size());
    if (pick >= r.outcomes.size()) throw Error("coin source returned an out-of-range outcome");
    t.outcome = static_cast<std::int16_t>(pick);
  }
  t.next = r.outcomes[pick].next;
  t.emit = r.outcomes[pick].emit;
  return t;
}

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  malformed,
  bound,
  initial_letter,
  totality,
  shadowed_rule,
  output_unique,
  output_emits,
  output_determinism,
  output_target,
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::malformed: return "malformed";
    case ViolationKind::bound: return "bound";
    case ViolationKind::initial_letter: return "initial letter";
    case ViolationKind::totality: return "totality";
    case ViolationKind::shadowed_rule: return "shadowed rule";
    case ViolationKind::output_unique: return "output uniqueness";
    case ViolationKind::output_emits: return "output self-transition emits";
    case ViolationKind::output_determinism: return "output determinism";
    case ViolationKind::output_target: return "output target";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::optional<StateId> state;
  std::optional<std::size_t> rule;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(),
                       [k](const Violation& v) { return v.kind == k; });
  }
};

namespace detail {

// Calls f(counts) for every vector in {0..b}^alphabet. Returns false if the space exceeds limit.
template <class F>
bool for_each_count_vector(std::size_t alphabet, std::uint32_t bound, std::size_t limit, F&& f) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < alphabet; ++i) {
    if (total > limit / (bound + 1)) return false;
    total *= bound + 1;
  }
  std::vector<std::uint32_t> x(alphabet, 0);
  for (std::size_t n = 0; n < total; ++n) {
    f(std::span<const std::uint32_t>(x));
    for (std::size_t i = 0; i < alphabet; ++i) {
      if (++x[i] <= bound) break;
      x[i] = 0;
    }
  }
  return true;
}

}  // namespace detail

/// Checks well-formedness, totality, reachability of every rule and the four output restrictions.
/// Totality is decided by enumerating {0..b}^|Sigma|; overlapping guards are legal (first match
/// wins) but a rule that can never be the first match is reported as shadowed.
inline ValidationReport validate_protocol(const Protocol& p, std::size_t enumeration_limit = 1u << 22) {
  ValidationReport rep;
  auto add = [&](ViolationKind k, std::optional<StateId> q, std::optional<std::size_t> r, std::string msg) {
    rep.violations.push_back({k, q, r, std::move(msg)});
  };

  const std::size_t nq = p.states.size();
  const std::size_t ns = p.letters.size();
  if (p.bound < 1) add(ViolationKind::bound, {}, {}, "bounding parameter must be >= 1");
  if (p.initial_letter >= ns) add(ViolationKind::initial_letter, {}, {}, "initial letter is not in the alphabet");
  if (p.initial >= nq) add(ViolationKind::malformed, {}, {}, "initial state out of range");
  if (p.yes >= nq || p.no >= nq) add(ViolationKind::malformed, {}, {}, "output state out of range");
  if (p.rules.size() != nq) add(ViolationKind::malformed, {}, {}, "rule table size differs from state count");
  if (!rep.ok()) return rep;

  if (p.yes == p.no) add(ViolationKind::output_unique, p.yes, {}, "yes and no share one state");

  bool structurally_sound = true;
  for (StateId q = 0; q < nq; ++q) {
    for (std::size_t i = 0; i < p.rules[q].size(); ++i) {
      const Rule& r = p.rules[q][i];
      if (r.outcomes.empty()) {
        add(ViolationKind::totality, q, i, "empty outcome-set");
        structurally_sound = false;
      }
      for (const LetterTest& t : r.guard) {
        if (t.letter >= ns) {
          add(ViolationKind::malformed, q, i, "guard references an unknown letter");
          structurally_sound = false;
        }
      }
      for (const Outcome& o : r.outcomes) {
        if (o.next >= nq || (o.emit != kEpsilon && o.emit >= ns)) {
          add(ViolationKind::malformed, q, i, "outcome references an unknown state or letter");
          structurally_sound = false;
        }
      }
      if (!p.is_output(q)) continue;
      if (r.outcomes.size() != 1) {
        add(ViolationKind::output_determinism, q, i, "transition out of an output state is randomized");
      }
      for (const Outcome& o : r.outcomes) {
        if (o.next == q && o.emit != kEpsilon) {
          add(ViolationKind::output_emits, q, i, "output self-transition transmits a letter");
        }
        if (o.next != q && p.is_output(o.next)) {
          add(ViolationKind::output_target, q, i, "output state moves directly to the other output state");
        }
      }
    }
  }
  if (!structurally_sound) return rep;

  for (StateId q = 0; q < nq; ++q) {
    std::vector<bool> used(p.rules[q].size(), false);
    bool total = true;
    const bool enumerable = detail::for_each_count_vector(ns, p.bound, enumeration_limit, [&](auto x) {
      auto m = match_rule(p, q, x);
      if (m) {
        used[*m] = true;
      } else {
        total = false;
      }
    });
    if (!enumerable) {
      add(ViolationKind::malformed, q, {}, "count-vector space too large to enumerate");
      continue;
    }
    if (!total) add(ViolationKind::totality, q, {}, "some count vector matches no guard in state " + p.states[q]);
    for (std::size_t i = 0; i < used.size(); ++i) {
      if (!used[i]) add(ViolationKind::shadowed_rule, q, i, "rule is never the first match");
    }
  }
  return rep;
}

}  // namespace stoneage
