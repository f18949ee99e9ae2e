#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stoneage/metrics.hpp"
#include "stoneage/verifier.hpp"

namespace stoneage::report {

using nlohmann::json;

inline constexpr const char* kRunReportSchema = "stoneage-report/1";
inline constexpr const char* kVerifyReportSchema = "stoneage-verify/1";
inline constexpr const char* kRoundTableSchema = "stoneage-rounds/1";

namespace detail {

template <class Map, class F>
json keyed(const Map& m, F&& value) {
  json out = json::object();
  for (const auto& [k, v] : m) out[std::to_string(k)] = value(v);
  return out;
}

inline json ids(const std::set<NodeId>& s) { return json(std::vector<NodeId>(s.begin(), s.end())); }

}  // namespace detail

inline json to_json(const metrics::RunReport& r, std::uint64_t seed) {
  json silent = json::array();
  for (bool b : r.classification.silent) silent.push_back(b ? 1 : 0);
  const auto& c = r.confinement;
  auto same = [](const auto& x) { return x; };
  return {
      {"schema", kRunReportSchema},
      {"seed", seed},
      {"rounds", r.rounds},
      {"termination", to_string(r.termination)},
      {"n", r.n},
      {"C", c.changes},
      {"global_runtime", c.global_runtime},
      {"runtime_per_change", c.amortized_runtime},
      {"max_non_affected_runtime", c.max_non_affected_runtime},
      {"silent_mask", silent},
      {"local_runtime", detail::keyed(c.local_runtime, same)},
      {"C_u", detail::keyed(c.local_changes, same)},
      {"affected", detail::ids(c.affected)},
      {"tournaments", detail::keyed(r.tournaments,
                                    [](const std::vector<metrics::Tournament>& ts) {
                                      json a = json::array();
                                      for (const auto& t : ts) a.push_back({{"start", t.start}, {"u_turns", t.u_turns}});
                                      return a;
                                    })},
      {"greedy_tournaments", detail::keyed(r.greedy,
                                           [](const metrics::GreedyTournament& g) {
                                             return json{{"participants", g.participants},
                                                         {"active_length", g.active_length}};
                                           })},
      {"quality", detail::keyed(r.quality.quality, same)},
      {"released", detail::ids(r.released)},
  };
}

inline json to_json(const verify::CheckReport& c) {
  json j{{"check", c.check}, {"verdict", verify::to_string(c.verdict)}};
  if (c.round) j["round"] = *c.round;
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

inline json to_json(const std::vector<verify::CheckReport>& checks) {
  json a = json::array();
  for (const auto& c : checks) a.push_back(to_json(c));
  return {{"schema", kVerifyReportSchema}, {"passed", verify::passed(checks)}, {"checks", a}};
}

inline json to_json(const verify::EnumerationReport& e, const std::vector<std::string>& state_names) {
  json terminal = json::array();
  for (const auto& [cfg, pr] : e.terminal) {
    json states = json::array();
    for (StateId q : cfg) states.push_back(state_names.at(q));
    terminal.push_back({{"states", states},
                        {"probability", pr.to_string()},
                        {"first_reached", e.first_reached.at(cfg)}});
  }
  return {{"schema", kVerifyReportSchema},
          {"passed", e.violations.empty() && e.total() == verify::Dyadic::one()},
          {"nodes", e.nodes},
          {"terminal", terminal},
          {"residual", e.residual.to_string()},
          {"branches", e.branches},
          {"violations", e.violations}};
}

/// One row per round: round, silent flag, #active, #W, #L, #changes.
inline void write_round_table(std::ostream& out, const std::vector<metrics::RoundRow>& rows) {
  out << "# " << kRoundTableSchema << "\n";
  out << "round,silent,active,W,L,changes\n";
  for (const auto& r : rows) {
    out << r.round << "," << (r.silent ? 1 : 0) << "," << r.active << "," << r.yes << "," << r.no << "," << r.changes
        << "\n";
  }
}

}  // namespace stoneage::report
