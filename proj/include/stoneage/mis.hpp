#pragma once

#include <array>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "stoneage/protocol.hpp"

namespace stoneage::mis {

/// States of the dynamic MIS protocol. The alphabet is the state set, in the same order.
enum class MisState : StateId { S, D1, D2, U0, U1, U2, W, L, Dp, Up };

inline constexpr std::size_t kStateCount = 10;

inline constexpr StateId id(MisState q) { return static_cast<StateId>(q); }
inline constexpr LetterId letter(MisState q) { return static_cast<LetterId>(q); }

inline const std::array<std::string, kStateCount>& names() {
  static const std::array<std::string, kStateCount> kNames{"S", "D1", "D2", "U0", "U1", "U2", "W", "L", "D'", "U'"};
  return kNames;
}

enum class StateClass { proportional_active, greedy_active, output_yes, output_no };

inline StateClass state_class(MisState q) {
  switch (q) {
    case MisState::W: return StateClass::output_yes;
    case MisState::L: return StateClass::output_no;
    case MisState::Dp:
    case MisState::Up: return StateClass::greedy_active;
    default: return StateClass::proportional_active;
  }
}

inline StateClass state_class(StateId q) { return state_class(static_cast<MisState>(q)); }

inline bool is_proportional(StateId q) { return state_class(q) == StateClass::proportional_active; }
inline bool is_greedy(StateId q) { return state_class(q) == StateClass::greedy_active; }
inline bool is_u_state(StateId q) { return q == id(MisState::U0) || q == id(MisState::U1) || q == id(MisState::U2); }

namespace detail {

using Q = MisState;

inline LetterTest at_least_one(Q l) { return {letter(l), 1, 1}; }
inline LetterTest none(Q l) { return {letter(l), 0, 0}; }

inline Rule go(std::initializer_list<LetterTest> guard, Q to) {
  return Rule{guard, {{id(to), letter(to)}}};
}
inline Rule stay(std::initializer_list<LetterTest> guard, Q self) {
  return Rule{guard, {{id(self), kEpsilon}}};
}
inline Rule coin(Q heads, Q tails, Q self) {
  auto out = [self](Q to) { return Outcome{id(to), to == self ? kEpsilon : letter(to)}; };
  return Rule{{}, {out(heads), out(tails)}};
}

// U_j: exclusion, W-detection, delay by predecessors, win when alone, else fair coin.
inline std::vector<Rule> u_rules(Q self, Q predecessor, Q next) {
  std::vector<Rule> r;
  r.push_back(go({at_least_one(Q::S)}, Q::Dp));
  r.push_back(go({at_least_one(Q::W)}, Q::L));
  r.push_back(stay({at_least_one(predecessor)}, self));
  if (self == Q::U0) r.push_back(stay({at_least_one(Q::D1)}, self));
  r.push_back(go({none(Q::U0), none(Q::U1), none(Q::U2), none(Q::Up)}, Q::W));
  r.push_back(coin(next, Q::D2, self));
  return r;
}

}  // namespace detail

/// Builds the two-component MIS protocol: b = 1, Sigma = Q, sigma_0 = S, q_yes = W, q_no = L.
/// Every state change emits the destination letter; every self-transition emits epsilon.
inline Protocol build() {
  using namespace detail;
  Protocol p;
  p.states.assign(names().begin(), names().end());
  p.letters = p.states;
  p.initial = id(Q::S);
  p.yes = id(Q::W);
  p.no = id(Q::L);
  p.initial_letter = letter(Q::S);
  p.bound = 1;
  p.rules.resize(kStateCount);

  p.rules[id(Q::S)] = {go({}, Q::D1)};

  p.rules[id(Q::D1)] = {
      go({at_least_one(Q::S)}, Q::Dp),
      go({at_least_one(Q::W)}, Q::L),
      stay({at_least_one(Q::D2)}, Q::D1),
      go({}, Q::U0),
  };

  // U0 is delayed by D1 and U2, U1 by U0, U2 by U1.
  p.rules[id(Q::U0)] = u_rules(Q::U0, Q::U2, Q::U1);
  p.rules[id(Q::U1)] = u_rules(Q::U1, Q::U0, Q::U2);
  p.rules[id(Q::U2)] = u_rules(Q::U2, Q::U1, Q::U0);

  p.rules[id(Q::D2)] = {
      go({at_least_one(Q::S)}, Q::Dp),
      stay({at_least_one(Q::U0)}, Q::D2),
      stay({at_least_one(Q::U1)}, Q::D2),
      stay({at_least_one(Q::U2)}, Q::D2),
      go({at_least_one(Q::W)}, Q::L),
      go({}, Q::D1),
  };

  p.rules[id(Q::Dp)] = {
      go({at_least_one(Q::W)}, Q::L),
      stay({at_least_one(Q::D1)}, Q::Dp),
      stay({at_least_one(Q::D2)}, Q::Dp),
      stay({at_least_one(Q::U0)}, Q::Dp),
      stay({at_least_one(Q::U1)}, Q::Dp),
      stay({at_least_one(Q::U2)}, Q::Dp),
      stay({at_least_one(Q::Up)}, Q::Dp),
      go({}, Q::Up),
  };

  p.rules[id(Q::Up)] = {
      go({at_least_one(Q::S)}, Q::Dp),
      go({at_least_one(Q::W)}, Q::L),
      go({none(Q::Up), none(Q::U0), none(Q::U1), none(Q::U2), none(Q::D1), none(Q::D2)}, Q::W),
      coin(Q::Up, Q::Dp, Q::Up),
  };

  p.rules[id(Q::W)] = {
      go({at_least_one(Q::S)}, Q::Dp),
      go({at_least_one(Q::W)}, Q::Dp),
      stay({}, Q::W),
  };

  // L also leaves on reading S. A silent L would keep the S of an inserted edge in its neighbor's
  // port forever, and a D'/U' neighbor would cycle D' -> U' -> D' on it. Via D' the node is back
  // in L a round later if it is still covered, and both moves overwrite the stale letter.
  p.rules[id(Q::L)] = {
      go({none(Q::W)}, Q::Dp),
      go({at_least_one(Q::S)}, Q::Dp),
      stay({}, Q::L),
  };
  return p;
}

/// The shared instance.
inline const Protocol& protocol() {
  static const Protocol kProtocol = build();
  return kProtocol;
}

/// True when `p` uses this protocol's state numbering (metrics rely on it).
inline bool compatible(const Protocol& p) {
  return p.states.size() == kStateCount && std::equal(p.states.begin(), p.states.end(), names().begin()) &&
         p.yes == id(MisState::W) && p.no == id(MisState::L);
}

/// Rules of D1/U_j that move to L on reading W. They cannot fire on a static graph.
inline bool is_defensive_rule(StateId q, std::size_t rule) {
  return (q == id(MisState::D1) || is_u_state(q)) && rule == 1;
}

}  // namespace stoneage::mis
