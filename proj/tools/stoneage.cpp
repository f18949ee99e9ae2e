// stoneage: run, verify and batch-experiment the Stone Age MIS protocol on dynamic graphs.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stoneage/stoneage.hpp"
#include "stoneage/report.hpp"

namespace sa = stoneage;

namespace {

enum Exit : int { kOk = 0, kError = 1, kBudget = 2, kFailed = 3 };

struct InputFlags {
  std::string graph_file, gen_spec, schedule_file, sched_spec, protocol_file;
  std::uint64_t seed = 1;
  long long max_rounds = -1;

  void add_to(CLI::App& app) {
    auto* g = app.add_option("--graph", graph_file, "graph file ('n N' then 'u v' per line)");
    app.add_option("--gen", gen_spec, "graph generator KIND:PARAMS, e.g. gnp:n=64,p=0.5,seed=3")->excludes(g);
    auto* s = app.add_option("--schedule", schedule_file, "schedule file (JSON lines)");
    app.add_option("--sched", sched_spec, "schedule generator: none | mix:c=..,spacing=.. | burst:c=..,round=..")->excludes(s);
    app.add_option("--seed", seed, "coin seed");
    app.add_option("--max-rounds", max_rounds, "round budget (default 50 (C+1) ceil(log2 n)^2)");
    app.add_option("--protocol", protocol_file, "protocol file (default: built-in MIS)");
  }
};

struct Instance {
  sa::Graph graph;
  sa::Schedule schedule;
  sa::Protocol protocol;
  sa::StopPolicy stop;
};

Instance load(const InputFlags& f) {
  Instance in;
  std::optional<sa::Schedule> bundled;
  if (!f.graph_file.empty()) {
    in.graph = sa::io::read_graph_file(f.graph_file);
  } else if (!f.gen_spec.empty()) {
    auto inst = sa::gen::instance_from_spec(sa::GenSpec::parse(f.gen_spec));
    in.graph = std::move(inst.graph);
    bundled = std::move(inst.schedule);
  } else {
    throw sa::Error("need --graph FILE or --gen KIND:PARAMS");
  }
  if (!f.schedule_file.empty()) {
    in.schedule = sa::io::read_schedule_file(f.schedule_file);
  } else if (!f.sched_spec.empty()) {
    in.schedule = sa::gen::schedule_from_spec(sa::GenSpec::parse(f.sched_spec), in.graph);
  } else if (bundled) {
    in.schedule = *bundled;
  }
  sa::validate_schedule(in.graph, in.schedule);
  in.protocol = f.protocol_file.empty() ? sa::mis::protocol() : sa::io::read_protocol_file(f.protocol_file);
  in.stop.max_rounds = f.max_rounds >= 0 ? static_cast<sa::Round>(f.max_rounds)
                                         : sa::experiments::default_budget(sa::max_node_count(in.graph, in.schedule),
                                                                           in.schedule.total());
  return in;
}

sa::Trace simulate(const Instance& in, std::uint64_t seed) {
  return sa::run_seeded(in.graph, in.schedule, in.protocol, seed, in.stop);
}

template <class F>
void write_file(const std::string& path, F&& f) {
  if (path.empty()) return;
  if (path == "-") {
    f(std::cout);
    return;
  }
  auto out = sa::io::open_out(path);
  f(out);
}

bool is_mis(const sa::Protocol& p) { return p.states == sa::mis::protocol().states; }

// ---------------------------------------------------------------------------
// run

int cmd_run(const InputFlags& f, const std::string& trace_out, const std::string& report_out, const std::string& rounds_out) {
  const Instance in = load(f);
  const sa::Trace t = simulate(in, f.seed);
  write_file(trace_out, [&](std::ostream& os) { sa::io::write_trace(os, t); });
  write_file(rounds_out, [&](std::ostream& os) { sa::report::write_round_table(os, sa::metrics::round_table(t)); });

  std::size_t yes = 0, no = 0;
  for (const sa::NodeStep& s : t.rounds.empty() ? std::vector<sa::NodeStep>{} : t.rounds.back().steps) {
    if (s.kind == sa::StepKind::deleted) continue;
    yes += s.after == t.yes;
    no += s.after == t.no;
  }
  if (is_mis(in.protocol)) {
    const auto rep = sa::metrics::make_report(t);
    write_file(report_out, [&](std::ostream& os) { os << sa::report::to_json(rep, f.seed).dump(2) << "\n"; });
    std::cout << "rounds " << rep.rounds << "  termination " << sa::to_string(rep.termination) << "  global_runtime "
              << rep.confinement.global_runtime << "  C " << rep.confinement.changes << "  W " << yes << "  L " << no
              << "\n";
  } else {
    const auto cls = sa::metrics::classify_rounds(t);
    write_file(report_out, [&](std::ostream& os) {
      os << sa::io::json{{"schema", sa::report::kRunReportSchema}, {"seed", f.seed}, {"rounds", t.rounds.size()},
                         {"termination", sa::to_string(t.termination)}, {"global_runtime", cls.global_runtime},
                         {"C", in.schedule.total()}}
                .dump(2)
         << "\n";
    });
    std::cout << "rounds " << t.rounds.size() << "  termination " << sa::to_string(t.termination)
              << "  global_runtime " << cls.global_runtime << "  yes " << yes << "  no " << no << "\n";
  }
  return t.termination == sa::Termination::silence ? kOk : kBudget;
}

// ---------------------------------------------------------------------------
// verify

int verdict_exit(const std::vector<sa::verify::CheckReport>& reps) {
  bool inconclusive = false;
  for (const auto& r : reps) {
    if (r.failed()) return kFailed;
    inconclusive |= r.verdict == sa::verify::Verdict::inconclusive;
  }
  return inconclusive ? kBudget : kOk;
}

int cmd_verify(const InputFlags& f, const std::string& trace_in, bool exhaustive, sa::Round horizon,
               const std::string& report_out) {
  if (exhaustive) {
    const Instance in = load(f);
    const auto rep = sa::verify::enumerate_small(in.graph, in.schedule, horizon, in.protocol);
    const auto j = sa::report::to_json(rep, in.protocol.states);
    write_file(report_out, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    for (const auto& entry : j["terminal"]) {
      std::cout << "terminal";
      for (const auto& s : entry["states"]) std::cout << " " << s.get<std::string>();
      std::cout << "  p=" << entry["probability"].get<std::string>() << "\n";
    }
    std::cout << "residual " << rep.residual.to_string() << "  branches " << rep.branches << "\n";
    for (const auto& v : rep.violations) std::cout << "violation: " << v << "\n";
    const bool ok = j["passed"].get<bool>();
    std::cout << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? kOk : kFailed;
  }
  sa::Trace t;
  if (!trace_in.empty()) {
    t = sa::io::read_trace_file(trace_in);
  } else {
    t = simulate(load(f), f.seed);
  }
  const auto reps = sa::verify::check_all(t);
  write_file(report_out, [&](std::ostream& os) { os << sa::report::to_json(reps).dump(2) << "\n"; });
  for (const auto& r : reps) {
    std::cout << sa::verify::to_string(r.verdict) << "  " << r.check;
    if (r.round) std::cout << "  round " << *r.round;
    if (!r.detail.empty()) std::cout << "  " << r.detail;
    std::cout << "\n";
  }
  return verdict_exit(reps);
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentFlags {
  std::string suite;
  std::size_t seeds = 100;
  std::uint64_t base_seed = 1;
  std::vector<std::size_t> ns;
  std::vector<std::size_t> cs;
  std::vector<std::string> families;
  std::size_t m = 64;
  double p = 0.5;
  sa::Round spacing = 8;
  unsigned threads = 0;
  std::string out = "-";
};

template <class T>
std::vector<T> or_default(const std::vector<T>& v, std::vector<T> fallback) {
  return v.empty() ? fallback : v;
}

int cmd_experiment(const ExperimentFlags& f) {
  namespace ex = sa::experiments;
  if (f.seeds == 0) throw sa::Error("--seeds must be positive");
  ex::worker_threads() = f.threads;
  sa::experiments::Table table;
  if (f.suite == "static_scaling") {
    table = ex::table(ex::static_scaling(or_default(f.families, {"gnp_half", "gnp_sparse"}),
                                         or_default(f.ns, {32, 64, 128, 256, 512, 1024}), f.seeds, f.base_seed));
  } else if (f.suite == "dynamic_amortized" || f.suite == "local_pairs") {
    ex::DynamicParams p;
    p.n = f.ns.empty() ? 256 : f.ns.front();
    p.family = f.families.empty() ? "gnp_sparse" : f.families.front();
    p.changes = or_default(f.cs, {0, 1, 4, 16, 64});
    p.seeds = f.seeds;
    p.spacing = f.spacing;
    p.base_seed = f.base_seed;
    table = f.suite == "local_pairs" ? ex::local_pairs(p) : ex::table(ex::dynamic_amortized(p));
  } else if (f.suite == "lower_bound") {
    table = ex::table(ex::lower_bound(or_default(f.ns, {8, 32, 128}), f.seeds, f.base_seed));
  } else if (f.suite == "pseudo_local") {
    std::vector<ex::PseudoLocalRow> rows;
    for (std::size_t c : or_default(f.cs, {0, 16})) {
      ex::PseudoLocalParams p;
      p.m = f.m;
      p.p = f.p;
      p.changes = c;
      p.seeds = f.seeds;
      p.base_seed = f.base_seed;
      rows.push_back(ex::pseudo_local(p));
    }
    table = ex::table(rows);
  } else if (f.suite == "clique_symmetry") {
    const std::size_t n = f.ns.empty() ? 3 : f.ns.front();
    table = ex::clique_symmetry_table(ex::clique_symmetry(n, f.seeds, f.base_seed), f.seeds);
  } else if (f.suite == "tournaments") {
    std::vector<ex::TournamentRow> rows;
    for (std::size_t n : or_default(f.ns, {64, 256, 1024})) rows.push_back(ex::tournament_counts(sa::gen::clique(n), f.seeds, f.base_seed));
    table = ex::table(rows);
  } else if (f.suite == "quality") {
    std::vector<ex::QualityRow> rows;
    for (std::size_t n : or_default(f.ns, {16, 64, 256})) rows.push_back(ex::quality(sa::gen::clique(n), f.seeds, f.base_seed));
    table = ex::table(rows);
  } else {
    throw sa::Error("unknown suite '" + f.suite + "'");
  }
  const std::string meta = "seeds=" + std::to_string(f.seeds) + " base_seed=" + std::to_string(f.base_seed);
  write_file(f.out, [&](std::ostream& os) { table.write_csv(os, meta); });
  return kOk;
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const std::vector<std::string>& args, const InputFlags& input, const std::string& out, const std::string& prefix) {
  if (args.empty()) throw sa::Error("gen needs: graph SPEC | schedule SPEC | protocol mis | INSTANCE_SPEC");
  const std::string what = args[0];
  auto need = [&](std::size_t k) {
    if (args.size() <= k) throw sa::Error("gen " + what + " needs a spec argument");
    return args[k];
  };
  auto header = [](std::ostream& os, const std::string& spec) { os << "# stoneage gen " << spec << "\n"; };
  if (what == "graph") {
    const std::string spec = need(1);
    const sa::Graph g = sa::gen::instance_from_spec(sa::GenSpec::parse(spec)).graph;
    write_file(out.empty() ? "-" : out, [&](std::ostream& os) {
      header(os, "graph " + spec);
      sa::io::write_graph(os, g);
    });
    return kOk;
  }
  if (what == "schedule") {
    const std::string spec = need(1);
    InputFlags f = input;
    f.sched_spec.clear();
    f.schedule_file.clear();
    const Instance in = load(f);
    const sa::Schedule s = sa::gen::schedule_from_spec(sa::GenSpec::parse(spec), in.graph);
    write_file(out.empty() ? "-" : out, [&](std::ostream& os) {
      header(os, "schedule " + spec);
      sa::io::write_schedule(os, s);
    });
    return kOk;
  }
  if (what == "protocol") {
    if (need(1) != "mis") throw sa::Error("only the built-in protocol 'mis' can be generated");
    write_file(out.empty() ? "-" : out, [&](std::ostream& os) { sa::io::write_protocol(os, sa::mis::protocol()); });
    return kOk;
  }
  // An instance spec: graph plus its bundled schedule, if any.
  const auto inst = sa::gen::instance_from_spec(sa::GenSpec::parse(what));
  const std::string base = prefix.empty() ? sa::GenSpec::parse(what).kind : prefix;
  write_file(base + ".graph", [&](std::ostream& os) {
    header(os, what);
    sa::io::write_graph(os, inst.graph);
  });
  std::cout << base << ".graph\n";
  if (inst.schedule) {
    write_file(base + ".schedule", [&](std::ostream& os) {
      header(os, what);
      sa::io::write_schedule(os, *inst.schedule);
    });
    std::cout << base << ".schedule\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stone Age MIS simulator for dynamic graphs"};
  app.require_subcommand(1);

  InputFlags run_in;
  std::string trace_out, report_out, rounds_out;
  auto* run = app.add_subcommand("run", "simulate one run; exit 0 on silence, 2 on budget exhaustion");
  run_in.add_to(*run);
  run->add_option("--trace-out", trace_out, "write the trace (JSON lines; '-' for stdout)");
  run->add_option("--report-out", report_out, "write the run report (JSON)");
  run->add_option("--rounds-out", rounds_out, "write the per-round table (CSV)");

  InputFlags ver_in;
  std::string trace_in, ver_report;
  bool exhaustive = false;
  sa::Round horizon = 8;
  auto* ver = app.add_subcommand("verify", "check a run (or all coin outcomes with --exhaustive); exit 3 on failure");
  ver_in.add_to(*ver);
  ver->add_option("--trace", trace_in, "verify a stored trace instead of simulating");
  ver->add_flag("--exhaustive", exhaustive, "enumerate every coin outcome (n <= 4)");
  ver->add_option("--horizon", horizon, "enumeration horizon in rounds (<= 10)");
  ver->add_option("--report-out", ver_report, "write the verification report (JSON)");

  ExperimentFlags ex;
  auto* exp = app.add_subcommand("experiment", "batch trials; writes a CSV table");
  exp->add_option("suite", ex.suite,
                  "static_scaling | dynamic_amortized | lower_bound | pseudo_local | clique_symmetry | tournaments | "
                  "quality | local_pairs")
      ->required();
  exp->add_option("--seeds", ex.seeds, "trials per configuration");
  exp->add_option("--base-seed", ex.base_seed, "seed all trial seeds derive from");
  exp->add_option("--n", ex.ns, "graph sizes (for lower_bound: l values)")->delimiter(',');
  exp->add_option("--C", ex.cs, "numbers of topology changes")->delimiter(',');
  exp->add_option("--family", ex.families, "gnp_half | gnp_sparse | clique | path | ring | star")->delimiter(',');
  exp->add_option("--m", ex.m, "pseudo_local: cluster size");
  exp->add_option("--p", ex.p, "pseudo_local: cluster edge probability");
  exp->add_option("--spacing", ex.spacing, "empty rounds between changes");
  exp->add_option("--threads", ex.threads, "worker threads (default: all cores)");
  exp->add_option("--out", ex.out, "output CSV ('-' for stdout)");

  std::vector<std::string> gen_args;
  InputFlags gen_in;
  std::string gen_out, gen_prefix;
  auto* gen = app.add_subcommand("gen", "write graph, schedule or protocol files");
  gen->add_option("what", gen_args, "graph SPEC | schedule SPEC | protocol mis | INSTANCE_SPEC")->required();
  gen->add_option("--graph", gen_in.graph_file, "schedule: base graph file");
  gen->add_option("--gen", gen_in.gen_spec, "schedule: base graph generator");
  gen->add_option("-o,--out", gen_out, "output file (default stdout)");
  gen->add_option("--prefix", gen_prefix, "instance: output path prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_in, trace_out, report_out, rounds_out);
    if (*ver) return cmd_verify(ver_in, trace_in, exhaustive, horizon, ver_report);
    if (*exp) return cmd_experiment(ex);
    if (*gen) return cmd_gen(gen_args, gen_in, gen_out, gen_prefix);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
