#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stoneage/engine.hpp"
#include "stoneage/graph.hpp"
#include "stoneage/protocol.hpp"

namespace stoneage::io {

using nlohmann::json;

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

// ---------------------------------------------------------------------------
// Graph file: "n <count>" then one "u v" edge per line, 0-based ids.

inline Graph read_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> n;
  std::vector<std::pair<NodeId, NodeId>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::istringstream ls(line);
    if (!n) {
      std::string tag;
      long long count = -1;
      if (!(ls >> tag >> count) || tag != "n" || count < 0) throw ParseError("expected header 'n <count>'", lineno);
      n = static_cast<std::size_t>(count);
    } else {
      long long u = -1, v = -1;
      if (!(ls >> u >> v)) throw ParseError("expected 'u v'", lineno);
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= *n || static_cast<std::size_t>(v) >= *n) {
        throw ParseError("node id out of range", lineno);
      }
      if (u == v) throw ParseError("self-loop", lineno);
      edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    std::string extra;
    if (ls >> extra) throw ParseError("trailing token '" + extra + "'", lineno);
  }
  if (!n) throw ParseError("missing header 'n <count>'");
  try {
    return Graph::from_edges(*n, edges);
  } catch (const TopologyError& e) {
    throw ParseError(e.what());
  }
}

inline Graph read_graph_file(const std::string& path) {
  auto in = open_in(path);
  return read_graph(in);
}

/// Writes a graph with ids 0..n-1; other id sets are rejected.
inline void write_graph(std::ostream& out, const Graph& g) {
  const auto nodes = g.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] != i) throw Error("graph file format needs contiguous ids 0..n-1");
  }
  out << "n " << nodes.size() << "\n";
  for (auto [u, v] : g.edges()) out << u << " " << v << "\n";
}

// ---------------------------------------------------------------------------
// Schedule file: one JSON object per line, {"round":r,"op":"edge_del","u":a,"v":b}; '#' starts a comment line.

inline ChangeKind parse_op(const std::string& op, std::size_t lineno) {
  if (op == "edge_del") return ChangeKind::edge_delete;
  if (op == "edge_ins") return ChangeKind::edge_insert;
  if (op == "node_del") return ChangeKind::node_delete;
  if (op == "node_ins") return ChangeKind::node_insert;
  throw ParseError("unknown op '" + op + "'", lineno);
}

inline json change_json(const TopologyChange& c) {
  json j = json::array({op_name(c.kind), c.u});
  if (c.is_edge()) j.push_back(c.v);
  return j;
}

inline TopologyChange change_from_json(const json& j, std::size_t lineno = 0) {
  if (!j.is_array() || j.size() < 2) throw ParseError("malformed change", lineno);
  const ChangeKind k = parse_op(j.at(0).get<std::string>(), lineno);
  TopologyChange c{k, j.at(1).get<NodeId>(), 0};
  if (c.is_edge()) {
    if (j.size() != 3) throw ParseError("edge change needs two endpoints", lineno);
    c.v = j.at(2).get<NodeId>();
  } else if (j.size() != 2) {
    throw ParseError("node change takes one node", lineno);
  }
  return c;
}

inline Schedule read_schedule(std::istream& in) {
  Schedule s;
  std::string line;
  std::size_t lineno = 0;
  Round last = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    try {
      const auto r = j.at("round").get<long long>();
      if (r < 1) throw ParseError("round must be >= 1", lineno);
      if (static_cast<Round>(r) < last) throw ParseError("rounds must be nondecreasing", lineno);
      last = static_cast<Round>(r);
      TopologyChange c{parse_op(j.at("op").get<std::string>(), lineno), j.at("u").get<NodeId>(), 0};
      if (c.is_edge()) {
        if (!j.contains("v")) throw ParseError("edge change needs 'v'", lineno);
        c.v = j.at("v").get<NodeId>();
        if (c.u == c.v) throw ParseError("edge endpoints must differ", lineno);
      } else if (j.contains("v")) {
        throw ParseError("node change takes no 'v'", lineno);
      }
      s.add(last, c);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad record: ") + e.what(), lineno);
    }
  }
  return s;
}

inline Schedule read_schedule_file(const std::string& path) {
  auto in = open_in(path);
  return read_schedule(in);
}

inline void write_schedule(std::ostream& out, const Schedule& s) {
  for (const auto& [r, changes] : s.rounds()) {
    for (const TopologyChange& c : changes) {
      json j{{"round", r}, {"op", op_name(c.kind)}, {"u", c.u}};
      if (c.is_edge()) j["v"] = c.v;
      out << j.dump() << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Protocol file: one JSON document, letters and states by name, epsilon as "eps".

inline constexpr const char* kProtocolSchema = "stoneage-protocol/1";

inline json protocol_json(const Protocol& p) {
  json j;
  j["schema"] = kProtocolSchema;
  j["states"] = p.states;
  j["letters"] = p.letters;
  j["initial"] = p.states.at(p.initial);
  j["yes"] = p.states.at(p.yes);
  j["no"] = p.states.at(p.no);
  j["initial_letter"] = p.letters.at(p.initial_letter);
  j["bound"] = p.bound;
  json rules = json::array();
  for (StateId q = 0; q < p.rules.size(); ++q) {
    for (const Rule& r : p.rules[q]) {
      json guard = json::array();
      for (const LetterTest& t : r.guard) guard.push_back({p.letters.at(t.letter), t.min, t.max});
      json outcomes = json::array();
      for (const Outcome& o : r.outcomes) outcomes.push_back({p.states.at(o.next), p.letter_name(o.emit)});
      rules.push_back({{"from", p.states[q]}, {"guard", guard}, {"outcomes", outcomes}});
    }
  }
  j["rules"] = rules;
  return j;
}

inline Protocol protocol_from_json(const json& j) {
  try {
    if (j.value("schema", std::string{}) != kProtocolSchema) throw ParseError("unsupported protocol schema");
    Protocol p;
    p.states = j.at("states").get<std::vector<std::string>>();
    p.letters = j.at("letters").get<std::vector<std::string>>();
    for (const auto& l : p.letters) {
      if (l == "eps") throw ParseError("'eps' is reserved for the empty emission");
    }
    auto state = [&](const std::string& name) {
      auto q = p.find_state(name);
      if (!q) throw ParseError("unknown state '" + name + "'");
      return *q;
    };
    auto letter = [&](const std::string& name) {
      auto l = p.find_letter(name);
      if (!l) throw ParseError("unknown letter '" + name + "'");
      return *l;
    };
    p.initial = state(j.at("initial").get<std::string>());
    p.yes = state(j.at("yes").get<std::string>());
    p.no = state(j.at("no").get<std::string>());
    p.initial_letter = letter(j.at("initial_letter").get<std::string>());
    p.bound = j.at("bound").get<std::uint32_t>();
    p.rules.resize(p.states.size());
    for (const json& r : j.at("rules")) {
      Rule rule;
      for (const json& t : r.at("guard")) {
        rule.guard.push_back({letter(t.at(0).get<std::string>()), t.at(1).get<std::uint32_t>(), t.at(2).get<std::uint32_t>()});
      }
      for (const json& o : r.at("outcomes")) {
        const auto emit = o.at(1).get<std::string>();
        rule.outcomes.push_back({state(o.at(0).get<std::string>()), emit == "eps" ? kEpsilon : letter(emit)});
      }
      p.rules[state(r.at("from").get<std::string>())].push_back(std::move(rule));
    }
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad protocol: ") + e.what());
  }
}

inline void write_protocol(std::ostream& out, const Protocol& p) { out << protocol_json(p).dump(2) << "\n"; }

inline Protocol read_protocol(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return protocol_from_json(j);
}

inline Protocol read_protocol_file(const std::string& path) {
  auto in = open_in(path);
  return read_protocol(in);
}

// ---------------------------------------------------------------------------
// Trace file: JSON lines. Header, one record per round, trailer.
//   {"schema":"stoneage-trace/1","seed":..,"states":[..],"yes":..,"no":..,"initial":{..}}
//   {"round":r,"changes":[[op,u,(v)]],"steps":[[id,before,after,emit,rule,outcome,kind]]}
//   {"end":"silence"|"budget","rounds":N}
// Emissions use -1 for epsilon; kind is 0 resident, 1 inserted, 2 deleted.

inline constexpr const char* kTraceSchema = "stoneage-trace/1";

inline json world_json(const World& w) {
  json nodes = json::array();
  json edges = json::array();
  json ports = json::array();
  for (NodeId v : w.nodes()) {
    nodes.push_back({v, w.state(v), w.pending(v) == kEpsilon ? -1 : int{w.pending(v)}});
    for (const auto& [u, l] : w.ports(v)) {
      if (v < u) edges.push_back({v, u});
      if (l != w.initial_letter()) ports.push_back({v, u, l});
    }
  }
  return {{"round", w.round()}, {"alphabet", w.alphabet()}, {"initial_letter", w.initial_letter()},
          {"nodes", nodes}, {"edges", edges}, {"ports", ports}};
}

inline void write_trace(std::ostream& out, const Trace& t) {
  json header{{"schema", kTraceSchema}, {"seed", t.seed}, {"states", t.state_names}, {"yes", t.yes}, {"no", t.no},
              {"initial", world_json(t.initial)}};
  out << header.dump() << "\n";
  for (const RoundRecord& r : t.rounds) {
    json changes = json::array();
    for (const TopologyChange& c : r.changes) changes.push_back(change_json(c));
    json steps = json::array();
    for (const NodeStep& s : r.steps) {
      steps.push_back({s.id, s.before, s.after, s.emission == kEpsilon ? -1 : int{s.emission}, s.rule, s.outcome,
                       static_cast<int>(s.kind)});
    }
    json rec{{"round", r.round}, {"changes", changes}, {"steps", steps}};
    if (!r.skipped.empty()) rec["skipped"] = r.skipped;
    out << rec.dump() << "\n";
  }
  out << json{{"end", to_string(t.termination)}, {"rounds", t.rounds.size()}}.dump() << "\n";
}

inline std::string trace_string(const Trace& t) {
  std::ostringstream os;
  write_trace(os, t);
  return os.str();
}

namespace detail {

// Minimal protocol shell so a World can be rebuilt from a trace header.
inline World world_from_json(const json& j) {
  Protocol shell;
  const auto alphabet = j.at("alphabet").get<std::size_t>();
  shell.letters.resize(alphabet);
  shell.initial_letter = j.at("initial_letter").get<LetterId>();
  Graph g;
  for (const json& n : j.at("nodes")) g.add_node(n.at(0).get<NodeId>());
  for (const json& e : j.at("edges")) g.add_edge(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
  World w(shell, g);
  for (const json& n : j.at("nodes")) {
    const NodeId v = n.at(0).get<NodeId>();
    w.set_state(v, n.at(1).get<StateId>());
    const int pend = n.at(2).get<int>();
    w.set_pending(v, pend < 0 ? kEpsilon : static_cast<LetterId>(pend));
  }
  for (const json& p : j.at("ports")) w.set_port(p.at(0).get<NodeId>(), p.at(1).get<NodeId>(), p.at(2).get<LetterId>());
  const auto round = j.at("round").get<Round>();
  while (w.round() < round) w.advance_round();
  return w;
}

}  // namespace detail

inline Trace read_trace(std::istream& in) {
  Trace t;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  bool ended = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (ended) throw ParseError("content after trailer", lineno);
    try {
      const json j = json::parse(line);
      if (!header) {
        if (j.at("schema").get<std::string>() != kTraceSchema) throw ParseError("unsupported trace schema", lineno);
        t.seed = j.at("seed").get<std::uint64_t>();
        t.state_names = j.at("states").get<std::vector<std::string>>();
        t.yes = j.at("yes").get<StateId>();
        t.no = j.at("no").get<StateId>();
        t.initial = detail::world_from_json(j.at("initial"));
        t.initial_graph = t.initial.graph();
        header = true;
        continue;
      }
      if (j.contains("end")) {
        const auto end = j.at("end").get<std::string>();
        if (end != "silence" && end != "budget") throw ParseError("unknown termination '" + end + "'", lineno);
        t.termination = end == "silence" ? Termination::silence : Termination::budget;
        if (j.at("rounds").get<std::size_t>() != t.rounds.size()) throw ParseError("round count mismatch", lineno);
        ended = true;
        continue;
      }
      RoundRecord r;
      r.round = j.at("round").get<Round>();
      for (const json& c : j.at("changes")) r.changes.push_back(change_from_json(c, lineno));
      if (j.contains("skipped")) r.skipped = j.at("skipped").get<std::vector<std::string>>();
      for (const json& s : j.at("steps")) {
        NodeStep st;
        st.id = s.at(0).get<NodeId>();
        st.before = s.at(1).get<StateId>();
        st.after = s.at(2).get<StateId>();
        const int emit = s.at(3).get<int>();
        st.emission = emit < 0 ? kEpsilon : static_cast<LetterId>(emit);
        st.rule = s.at(4).get<std::int16_t>();
        st.outcome = s.at(5).get<std::int16_t>();
        const int kind = s.at(6).get<int>();
        if (kind < 0 || kind > 2) throw ParseError("bad step kind", lineno);
        st.kind = static_cast<StepKind>(kind);
        if (st.before >= t.state_names.size() || st.after >= t.state_names.size()) throw ParseError("state out of range", lineno);
        r.steps.push_back(st);
      }
      if (!t.rounds.empty() && r.round != t.rounds.back().round + 1) throw ParseError("rounds are not consecutive", lineno);
      t.rounds.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad trace record: ") + e.what(), lineno);
    } catch (const TopologyError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!header) throw ParseError("empty trace");
  if (!ended) throw ParseError("truncated trace (no trailer)");
  return t;
}

inline Trace read_trace_file(const std::string& path) {
  auto in = open_in(path);
  return read_trace(in);
}

}  // namespace stoneage::io
