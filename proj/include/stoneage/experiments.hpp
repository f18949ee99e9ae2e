#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <locale>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stoneage/engine.hpp"
#include "stoneage/generators.hpp"
#include "stoneage/metrics.hpp"
#include "stoneage/mis.hpp"
#include "stoneage/random.hpp"
#include "stoneage/verifier.hpp"

namespace stoneage::experiments {

/// Round budget 50 (C+1) ceil(log2 n)^2, with log2 n floored at 1 so tiny graphs still run.
inline Round default_budget(std::size_t n, std::size_t changes) {
  const std::uint64_t lg = std::max(1u, ceil_log2(n));
  return static_cast<Round>(std::min<std::uint64_t>(50 * (changes + 1) * lg * lg, 0xFFFFFFFFu));
}

inline double log2_squared(std::size_t n) {
  const double lg = std::max(1u, ceil_log2(n));
  return lg * lg;
}

/// Independent sub-seeds for the graph, the schedule and the coins of trial k.
struct TrialSeeds {
  std::uint64_t graph, schedule, coins;

  static TrialSeeds of(std::uint64_t base, std::uint64_t k) {
    const std::uint64_t s = detail::splitmix64(base ^ detail::splitmix64(k + 0x51ED270B27A1F3ULL));
    return {detail::splitmix64(s + 1), detail::splitmix64(s + 2), detail::splitmix64(s + 3)};
  }
};

// ---------------------------------------------------------------------------
// Statistics and tables

struct Stats {
  std::size_t count = 0;
  double mean = 0, median = 0, min = 0, max = 0;
};

inline Stats summarize(std::vector<double> xs) {
  Stats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  s.min = xs.front();
  s.max = xs.back();
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const std::size_t h = xs.size() / 2;
  s.median = xs.size() % 2 ? xs[h] : (xs[h - 1] + xs[h]) / 2;
  return s;
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(6);
  os << x;
  return os.str();
}

inline std::string fmt(std::size_t x) { return std::to_string(x); }

/// CSV with a versioned schema string as its first line, then a header row.
struct Table {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// `meta` is appended to the schema line, e.g. the seed list.
  void write_csv(std::ostream& out, const std::string& meta = "") const {
    out << "# " << schema << (meta.empty() ? "" : " ") << meta << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
  }
};

// ---------------------------------------------------------------------------
// Trials

/// Worker count used by the suites; 0 means one per hardware thread.
inline unsigned& worker_threads() {
  static unsigned n = 0;
  return n;
}

/// Runs f(k) for k in [0, count) on up to `threads` workers; results come back in k order.
template <class F>
auto parallel_map(std::size_t count, F&& f, unsigned threads = 0)
    -> std::vector<decltype(f(std::size_t{}))> {
  std::vector<decltype(f(std::size_t{}))> out(count);
  if (threads == 0) threads = worker_threads() ? worker_threads() : std::thread::hardware_concurrency();
  threads = std::max(1u, static_cast<unsigned>(std::min<std::size_t>(threads, count)));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) out[k] = f(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count && !failed; k = next++) {
        try {
          out[k] = f(k);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// The per-trial numbers every suite draws from.
struct Trial {
  std::size_t n = 0;
  std::size_t changes = 0;
  std::size_t global_runtime = 0;
  std::size_t max_non_affected = 0;
  bool budget_hit = false;
  bool greedy_confined = true;
  std::map<NodeId, std::size_t> local_runtime;
  std::set<NodeId> affected;
  std::map<NodeId, StateId> final_states;
};

inline Trial evaluate(const Trace& t, const Graph& g, const Schedule& s) {
  Trial out;
  out.n = max_node_count(g, s);
  out.changes = s.total();
  out.budget_hit = t.termination == Termination::budget;
  out.global_runtime = metrics::classify_rounds(t).global_runtime;
  out.local_runtime = metrics::local_runtimes(t);
  out.affected = affected_nodes(g, s);
  for (const auto& [v, rt] : out.local_runtime) {
    if (!out.affected.count(v)) out.max_non_affected = std::max(out.max_non_affected, rt);
  }
  out.greedy_confined = !verify::check_greedy_confinement(t, out.affected).failed();
  if (!t.rounds.empty()) {
    for (const NodeStep& st : t.rounds.back().steps) {
      if (st.kind != StepKind::deleted) out.final_states[st.id] = st.after;
    }
  }
  return out;
}

inline Trace simulate(const Graph& g, const Schedule& s, std::uint64_t coin_seed) {
  StopPolicy stop;
  stop.max_rounds = default_budget(max_node_count(g, s), s.total());
  return run_seeded(g, s, mis::protocol(), coin_seed, stop);
}

inline Trial trial(const Graph& g, const Schedule& s, std::uint64_t coin_seed) {
  return evaluate(simulate(g, s, coin_seed), g, s);
}

/// Named graph families: gnp_half (p = 1/2), gnp_sparse (p = 4/n), clique, path, ring, star.
inline Graph family_graph(const std::string& family, std::size_t n, std::uint64_t seed) {
  if (family == "gnp_half") return gen::gnp(n, 0.5, seed);
  if (family == "gnp_sparse") return gen::gnp(n, std::min(1.0, 4.0 / static_cast<double>(n)), seed);
  if (family == "clique") return gen::clique(n);
  if (family == "path") return gen::path(n);
  if (family == "ring") return gen::ring(n);
  if (family == "star") return gen::star(n);
  throw Error("unknown graph family '" + family + "'");
}

// ---------------------------------------------------------------------------
// Suites

struct ScalingRow {
  std::string family;
  std::size_t n = 0;
  Stats runtime;
  double ratio = 0;  // median runtime / ceil(log2 n)^2
  std::size_t budget_hits = 0;
};

inline std::vector<ScalingRow> static_scaling(const std::vector<std::string>& families, const std::vector<std::size_t>& ns,
                                              std::size_t seeds, std::uint64_t base_seed) {
  std::vector<ScalingRow> out;
  for (const auto& family : families) {
    for (std::size_t n : ns) {
      const auto trials = parallel_map(seeds, [&](std::size_t k) {
        const TrialSeeds ts = TrialSeeds::of(base_seed ^ n, k);
        const Graph g = family_graph(family, n, ts.graph);
        const Trace t = simulate(g, Schedule{}, ts.coins);
        return std::make_pair(static_cast<double>(metrics::classify_rounds(t).global_runtime),
                              t.termination == Termination::budget);
      });
      ScalingRow row{family, n, {}, 0, 0};
      std::vector<double> xs;
      for (const auto& [rt, hit] : trials) {
        xs.push_back(rt);
        row.budget_hits += hit;
      }
      row.runtime = summarize(xs);
      row.ratio = row.runtime.median / log2_squared(n);
      out.push_back(row);
    }
  }
  return out;
}

inline Table table(const std::vector<ScalingRow>& rows) {
  Table t{"stoneage-static_scaling/1",
          {"family", "n", "log2sq", "seeds", "median_runtime", "mean_runtime", "max_runtime", "median_runtime_over_log2sq",
           "budget_hits"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.family, fmt(r.n), fmt(log2_squared(r.n)), fmt(r.runtime.count), fmt(r.runtime.median),
                      fmt(r.runtime.mean), fmt(r.runtime.max), fmt(r.ratio), fmt(r.budget_hits)});
  }
  return t;
}

struct DynamicParams {
  std::size_t n = 256;
  std::string family = "gnp_sparse";
  std::vector<std::size_t> changes{0, 1, 4, 16, 64};
  std::size_t seeds = 100;
  Round spacing = 8;
  Round start = 1;
  std::uint64_t base_seed = 1;
};

struct DynamicRow {
  std::size_t changes = 0;
  Stats global;
  Stats amortized;
  double normalized = 0;  // mean amortized / ceil(log2 n)^2
  Stats non_affected_max;
  std::size_t confinement_failures = 0;
  std::size_t budget_hits = 0;
};

inline std::vector<DynamicRow> dynamic_amortized(const DynamicParams& p) {
  std::vector<DynamicRow> out;
  for (std::size_t c : p.changes) {
    const auto trials = parallel_map(p.seeds, [&](std::size_t k) {
      const TrialSeeds ts = TrialSeeds::of(p.base_seed, k);
      const Graph g = family_graph(p.family, p.n, ts.graph);
      gen::ScheduleParams sp;
      sp.changes = c;
      sp.spacing = p.spacing;
      sp.start = p.start;
      return trial(g, gen::random_mix(g, sp, ts.schedule), ts.coins);
    });
    DynamicRow row;
    row.changes = c;
    std::vector<double> g, a, m;
    for (const Trial& t : trials) {
      g.push_back(static_cast<double>(t.global_runtime));
      a.push_back(static_cast<double>(t.global_runtime) / static_cast<double>(c + 1));
      m.push_back(static_cast<double>(t.max_non_affected));
      row.confinement_failures += !t.greedy_confined;
      row.budget_hits += t.budget_hit;
    }
    row.global = summarize(g);
    row.amortized = summarize(a);
    row.normalized = row.amortized.mean / log2_squared(p.n);
    row.non_affected_max = summarize(m);
    out.push_back(row);
  }
  return out;
}

inline Table table(const std::vector<DynamicRow>& rows) {
  Table t{"stoneage-dynamic_amortized/1",
          {"C", "seeds", "mean_global", "median_global", "max_global", "mean_runtime_per_change", "median_runtime_per_change",
           "normalized_per_change", "mean_non_affected_max", "median_non_affected_max", "max_non_affected_max",
           "confinement_failures", "budget_hits"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({fmt(r.changes), fmt(r.global.count), fmt(r.global.mean), fmt(r.global.median), fmt(r.global.max),
                      fmt(r.amortized.mean), fmt(r.amortized.median), fmt(r.normalized), fmt(r.non_affected_max.mean),
                      fmt(r.non_affected_max.median), fmt(r.non_affected_max.max), fmt(r.confinement_failures),
                      fmt(r.budget_hits)});
  }
  return t;
}

struct LowerBoundRow {
  std::size_t l = 0;
  Stats non_silent;
  double bound = 0;  // C/3 - 2 sqrt(C)
};

inline std::vector<LowerBoundRow> lower_bound(const std::vector<std::size_t>& ls, std::size_t seeds, std::uint64_t base_seed) {
  std::vector<LowerBoundRow> out;
  for (std::size_t l : ls) {
    const auto [g, s] = gen::lower_bound(l);
    const auto xs = parallel_map(seeds, [&, &g = g, &s = s](std::size_t k) {
      const Trace t = simulate(g, s, TrialSeeds::of(base_seed ^ l, k).coins);
      return static_cast<double>(metrics::classify_rounds(t).global_runtime);
    });
    const double c = static_cast<double>(l);
    out.push_back({l, summarize(xs), c / 3 - 2 * std::sqrt(c)});
  }
  return out;
}

inline Table table(const std::vector<LowerBoundRow>& rows) {
  Table t{"stoneage-lower_bound/1",
          {"l", "C", "seeds", "mean_non_silent", "median_non_silent", "min_non_silent", "max_non_silent", "C_over_3_minus_2sqrtC"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({fmt(r.l), fmt(r.l), fmt(r.non_silent.count), fmt(r.non_silent.mean), fmt(r.non_silent.median),
                      fmt(r.non_silent.min), fmt(r.non_silent.max), fmt(r.bound)});
  }
  return t;
}

struct PseudoLocalParams {
  std::size_t m = 64;
  double p = 0.5;
  std::size_t changes = 16;
  std::size_t seeds = 100;
  Round spacing = 4;
  Round start = 1;
  std::uint64_t base_seed = 1;
};

struct PseudoLocalRow {
  std::size_t changes = 0;
  std::size_t n = 0;
  std::size_t path_length = 0;
  Stats max_a;  // per seed: max local runtime over cluster A
  Stats max_b;
  Stats local_changes_b;  // per seed: max C_u over cluster B
};

inline PseudoLocalRow pseudo_local(const PseudoLocalParams& p) {
  const std::size_t len = gen::dumbbell_path_length(p.m);
  const auto trials = parallel_map(p.seeds, [&](std::size_t k) {
    const TrialSeeds ts = TrialSeeds::of(p.base_seed, k);
    const gen::Dumbbell d = gen::dumbbell(p.m, p.p, len, ts.graph);
    gen::ScheduleParams sp;
    sp.changes = p.changes;
    sp.spacing = p.spacing;
    sp.start = p.start;
    sp.restrict_to = std::set<NodeId>(d.cluster_a.begin(), d.cluster_a.end());
    sp.restrict_to->erase(d.a_anchor);
    const Schedule s = gen::random_mix(d.graph, sp, ts.schedule);
    const Trace t = simulate(d.graph, s, ts.coins);
    const auto rt = metrics::local_runtimes(t);
    const auto cu = change_counts_within(d.graph, s);
    std::array<double, 3> out{0, 0, 0};
    for (NodeId v : d.cluster_a) {
      if (rt.count(v)) out[0] = std::max(out[0], static_cast<double>(rt.at(v)));
    }
    for (NodeId v : d.cluster_b) {
      out[1] = std::max(out[1], static_cast<double>(rt.at(v)));
      out[2] = std::max(out[2], static_cast<double>(cu.at(v)));
    }
    return out;
  });
  PseudoLocalRow row;
  row.changes = p.changes;
  row.path_length = len;
  row.n = 2 * p.m + len - 1;
  std::vector<double> a, b, c;
  for (const auto& t : trials) {
    a.push_back(t[0]);
    b.push_back(t[1]);
    c.push_back(t[2]);
  }
  row.max_a = summarize(a);
  row.max_b = summarize(b);
  row.local_changes_b = summarize(c);
  return row;
}

inline Table table(const std::vector<PseudoLocalRow>& rows) {
  Table t{"stoneage-pseudo_local/1",
          {"C", "n", "path_length", "seeds", "mean_max_runtime_A", "median_max_runtime_A", "mean_max_runtime_B",
           "median_max_runtime_B", "max_max_runtime_B", "max_C_u_B"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({fmt(r.changes), fmt(r.n), fmt(r.path_length), fmt(r.max_b.count), fmt(r.max_a.mean), fmt(r.max_a.median),
                      fmt(r.max_b.mean), fmt(r.max_b.median), fmt(r.max_b.max), fmt(r.local_changes_b.max)});
  }
  return t;
}

/// Per node: fraction of seeds in which it ends in W on K_n.
inline std::vector<double> clique_symmetry(std::size_t n, std::size_t seeds, std::uint64_t base_seed) {
  const Graph g = gen::clique(n);
  const auto winners = parallel_map(seeds, [&](std::size_t k) {
    const Trace t = simulate(g, Schedule{}, TrialSeeds::of(base_seed, k).coins);
    for (const NodeStep& s : t.rounds.back().steps) {
      if (s.after == mis::id(mis::MisState::W)) return static_cast<long>(s.id);
    }
    return -1L;
  });
  std::vector<double> freq(n, 0);
  for (long w : winners) {
    if (w >= 0) freq[static_cast<std::size_t>(w)] += 1;
  }
  for (double& f : freq) f /= static_cast<double>(seeds);
  return freq;
}

inline Table clique_symmetry_table(const std::vector<double>& freq, std::size_t seeds) {
  Table t{"stoneage-clique_symmetry/1", {"node", "seeds", "mis_frequency"}, {}};
  for (std::size_t v = 0; v < freq.size(); ++v) t.rows.push_back({fmt(v), fmt(seeds), fmt(freq[v])});
  return t;
}

struct TournamentRow {
  std::size_t n = 0;
  std::size_t seeds = 0;
  std::size_t max_tournaments = 0;  // over nodes and seeds
  double mean_tournaments = 0;      // per node
  std::size_t max_u_turns = 0;      // over tournaments, nodes and seeds
  double mean_u_turns = 0;          // per tournament
};

inline TournamentRow tournament_counts(const Graph& g, std::size_t seeds, std::uint64_t base_seed) {
  struct Acc {
    std::size_t max_t = 0, sum_t = 0, nodes = 0, max_u = 0, sum_u = 0, tours = 0;
  };
  const auto accs = parallel_map(seeds, [&](std::size_t k) {
    const Trace t = simulate(g, Schedule{}, TrialSeeds::of(base_seed, k).coins);
    Acc a;
    for (const auto& [v, ts] : metrics::tournaments(t)) {
      a.max_t = std::max(a.max_t, ts.size());
      a.sum_t += ts.size();
      ++a.nodes;
      for (const auto& x : ts) {
        a.max_u = std::max(a.max_u, x.u_turns);
        a.sum_u += x.u_turns;
        ++a.tours;
      }
    }
    return a;
  });
  TournamentRow row;
  row.n = g.node_count();
  row.seeds = seeds;
  std::size_t sum_t = 0, nodes = 0, sum_u = 0, tours = 0;
  for (const Acc& a : accs) {
    row.max_tournaments = std::max(row.max_tournaments, a.max_t);
    row.max_u_turns = std::max(row.max_u_turns, a.max_u);
    sum_t += a.sum_t;
    nodes += a.nodes;
    sum_u += a.sum_u;
    tours += a.tours;
  }
  row.mean_tournaments = nodes ? static_cast<double>(sum_t) / static_cast<double>(nodes) : 0;
  row.mean_u_turns = tours ? static_cast<double>(sum_u) / static_cast<double>(tours) : 0;
  return row;
}

inline Table table(const std::vector<TournamentRow>& rows) {
  Table t{"stoneage-tournaments/1",
          {"n", "seeds", "max_tournaments_per_node", "mean_tournaments_per_node", "max_u_turns_per_tournament",
           "mean_u_turns_per_tournament", "log2n"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({fmt(r.n), fmt(r.seeds), fmt(r.max_tournaments), fmt(r.mean_tournaments), fmt(r.max_u_turns),
                      fmt(r.mean_u_turns), fmt(std::size_t{ceil_log2(r.n)})});
  }
  return t;
}

struct QualityRow {
  std::size_t n = 0;
  std::size_t seeds = 0;
  std::size_t winners = 0;
  double mean_over_winners = 0;
  double mean_over_nodes = 0;  // the per-node expectation, averaged over every node and seed
  std::size_t max_q = 0;
};

inline QualityRow quality(const Graph& g, std::size_t seeds, std::uint64_t base_seed) {
  const auto reps = parallel_map(seeds, [&](std::size_t k) {
    return metrics::quality(simulate(g, Schedule{}, TrialSeeds::of(base_seed, k).coins));
  });
  QualityRow row;
  row.n = g.node_count();
  row.seeds = seeds;
  std::size_t sum_w = 0, sum_all = 0, nodes = 0;
  for (const auto& rep : reps) {
    for (const auto& [v, q] : rep.quality) {
      sum_all += q;
      ++nodes;
      row.max_q = std::max(row.max_q, q);
    }
    for (NodeId v : rep.proportional_winners) {
      sum_w += rep.quality.at(v);
      ++row.winners;
    }
  }
  row.mean_over_winners = row.winners ? static_cast<double>(sum_w) / static_cast<double>(row.winners) : 0;
  row.mean_over_nodes = nodes ? static_cast<double>(sum_all) / static_cast<double>(nodes) : 0;
  return row;
}

inline Table table(const std::vector<QualityRow>& rows) {
  Table t{"stoneage-quality/1", {"n", "seeds", "winners", "mean_q_over_winners", "mean_q_over_nodes", "max_q", "log2n"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({fmt(r.n), fmt(r.seeds), fmt(r.winners), fmt(r.mean_over_winners), fmt(r.mean_over_nodes), fmt(r.max_q),
                      fmt(std::size_t{ceil_log2(r.n)})});
  }
  return t;
}

/// Per-node (C_u, local runtime) pairs for scatter plots.
inline Table local_pairs(const DynamicParams& p) {
  Table t{"stoneage-local_pairs/1", {"C", "seed", "node", "C_u", "local_runtime", "affected"}, {}};
  for (std::size_t c : p.changes) {
    for (std::size_t k = 0; k < p.seeds; ++k) {
      const TrialSeeds ts = TrialSeeds::of(p.base_seed, k);
      const Graph g = family_graph(p.family, p.n, ts.graph);
      gen::ScheduleParams sp;
      sp.changes = c;
      sp.spacing = p.spacing;
      sp.start = p.start;
      const Schedule s = gen::random_mix(g, sp, ts.schedule);
      const Trial tr = trial(g, s, ts.coins);
      const auto cu = change_counts_within(g, s);
      for (const auto& [v, rt] : tr.local_runtime) {
        t.rows.push_back({fmt(c), fmt(k), fmt(std::size_t{v}), fmt(cu.at(v)), fmt(rt), tr.affected.count(v) ? "1" : "0"});
      }
    }
  }
  return t;
}

}  // namespace stoneage::experiments
