// pmrun: run particle method instances with either interpreter, verify their
// equivalence and the lemma suite, emit speedup tables, generate instances.
//
// Exit status: 0 success, 1 verification failure or constraint violation,
// 2 input or usage error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pm/pm.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kInput = 2;

using pm::Json;

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pm::InputError("cannot write '" + path + "'");
  out << text;
}

pm::ExecMode parse_mode(const std::string& m) {
  if (m == "reference") return pm::ExecMode::ReferenceSequentialPhases;
  if (m == "concurrent") return pm::ExecMode::ConcurrentWorkers;
  throw pm::UsageError("unknown mode '" + m + "' (expected reference or concurrent)");
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  std::string instance;
  std::string engine = "seq";
  std::string mode = "reference";
  std::string out = "final_state.json";
  std::string trace;
  std::string audit = "comm_audit.csv";
  bool procs_view = false;
  std::int64_t max_steps = 10'000'000;
};

int cmd_run(const RunArgs& a) {
  const pm::Instance inst = pm::load_instance(a.instance);
  const pm::AlgorithmSpec spec = pm::instantiate(inst);
  Json report;
  report["engine"] = a.engine;
  std::optional<std::ofstream> trace;
  if (!a.trace.empty()) {
    trace.emplace(a.trace, std::ios::binary);
    if (!*trace) throw pm::InputError("cannot write '" + a.trace + "'");
  }
  auto trace_state = [&](const pm::State& s) {
    if (trace) *trace << pm::instance_to_json(pm::with_state(inst, s)).dump() << '\n';
  };
  Json timings = Json::array();
  pm::State final_state;
  std::int64_t T = 1;

  if (a.engine == "seq") {
    pm::State s = inst.state;
    trace_state(s);
    while (!spec.stop(s.g)) {
      if (T > a.max_steps) throw pm::NonTermination("stopping condition not reached after " + std::to_string(a.max_steps) + " steps");
      const auto t0 = std::chrono::steady_clock::now();
      pm::State next = pm::step(s, spec, inst.domain);
      timings.push_back(ms_since(t0));
      const pm::MotionReport motion = pm::check_motion_constraints({s, next}, inst.domain, inst.cutoff);
      if (!motion.ok())
        throw pm::ConstraintViolation("movement bound violated at step t=" + std::to_string(s.g.t) + ": particle " +
                                      std::to_string(motion.violations.front().id) + " " + motion.violations.front().what);
      s = std::move(next);
      ++T;
      trace_state(s);
    }
    final_state = std::move(s);
  } else if (a.engine == "par") {
    const pm::ExecMode mode = parse_mode(a.mode);
    const pm::CellGrid grid = pm::build_grid(inst.domain, inst.cutoff);
    const pm::DistributedRuntime<> rt(spec, grid, mode);
    pm::DistributedState ds = pm::distribute_initial(inst, grid);
    pm::CommLog log;
    trace_state(pm::gather_centers(ds));
    while (!spec.stop(ds.globals.front())) {
      if (T > a.max_steps) throw pm::NonTermination("stopping condition not reached after " + std::to_string(a.max_steps) + " steps");
      const auto t0 = std::chrono::steady_clock::now();
      ds = rt.parallel_step(std::move(ds), &log);
      timings.push_back(ms_since(t0));
      ++T;
      trace_state(pm::gather_centers(ds));
    }
    std::ostringstream csv;
    pm::write_audit_csv(csv, log.events);
    write_text(a.audit, csv.str());
    const pm::AuditReport audit = pm::audit_communications(log.events);
    report["mode"] = pm::to_string(mode);
    report["n_cell"] = grid.n_cell();
    report["audit"] = {{"path", a.audit}, {"events", audit.events}, {"phases", audit.phases},
                       {"violations", audit.violations.size()}};
    if (a.procs_view) report["processes"] = pm::distributed_to_json(ds, grid);
    final_state = pm::gather_centers(ds);
  } else {
    throw pm::UsageError("unknown engine '" + a.engine + "' (expected seq or par)");
  }

  const pm::Instance out = pm::with_state(inst, final_state);
  write_text(a.out, pm::dump_instance(out));
  report["digest"] = pm::state_digest(inst, final_state);
  report["T"] = T;
  report["particles"] = final_state.particles.size();
  report["step_ms"] = timings;
  report["out"] = a.out;
  if (!a.trace.empty()) report["trace"] = a.trace;
  std::cout << report.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string instance;
  std::string suite;
  std::int64_t max_cells = 729;
  int max_d = 3;
  std::uint64_t seed = 1;
  std::int64_t trials = 10'000;
  std::string mode = "reference";
  std::string out;
};

int cmd_verify(const VerifyArgs& a) {
  Json report;
  bool ok = true;
  if (!a.suite.empty()) {
    if (a.suite != "lemmas") throw pm::UsageError("unknown suite '" + a.suite + "' (expected lemmas)");
    if (a.max_cells < 1) throw pm::UsageError("--max-cells must be positive");
    pm::LemmaOptions opts;
    opts.max_cells = a.max_cells;
    opts.max_d = a.max_d;
    opts.seed = a.seed;
    const auto t0 = std::chrono::steady_clock::now();
    const pm::LemmaReport rep = pm::lemma_suite(opts);
    report = pm::to_json(rep);
    report["max_cells"] = a.max_cells;
    report["seconds"] = ms_since(t0) / 1000.0;
    ok = rep.ok();
  } else {
    if (a.instance.empty()) throw pm::UsageError("verify needs an instance file or --suite lemmas");
    const pm::Instance inst = pm::load_instance(a.instance);
    const pm::AlgorithmSpec spec = pm::instantiate(inst);
    const pm::Tolerance tol = pm::Tolerance::for_spec(spec);

    const pm::LawReport laws = pm::check_interaction_laws(spec, inst.domain, a.seed, a.trials, tol);
    report["laws"] = pm::to_json(laws);
    ok = ok && laws.ok();

    try {
      const pm::RunResult seq = pm::run(inst, spec, {.keep_trace = true});
      const pm::MotionReport motion = pm::check_motion_constraints(seq.trace, inst.domain, inst.cutoff);
      report["motion"] = pm::to_json(motion);
      ok = ok && motion.ok();
      const pm::CellGrid grid = pm::build_grid(inst.domain, inst.cutoff);
      const pm::DistributedRuntime<> rt(spec, grid, parse_mode(a.mode));
      const pm::ParallelRunResult par = rt.parallel_run(inst, {.keep_log = true});
      const pm::EquivalenceReport eq = pm::equivalent_up_to_permutation(seq.final, par.final, tol, seq.T, par.T);
      report["equivalence"] = pm::to_json(eq);
      const pm::AuditReport audit = pm::audit_communications(par.log.events);
      report["audit"] = {{"events", audit.events}, {"violations", audit.violations.size()}};
      ok = ok && eq.match && audit.ok();
    } catch (const pm::ConstraintViolation& e) {
      report["error"] = std::string("constraint violation: ") + e.what();
      ok = false;
    }
  }
  report["ok"] = ok;
  const std::string text = report.dump(2) + "\n";
  if (!a.out.empty()) write_text(a.out, text);
  std::cout << text;
  return ok ? kOk : kFail;
}

// ---------------------------------------------------------------------------
// speedup

struct SpeedupArgs {
  std::string model;
  std::string sweep;
  std::string out = "-";
  pm::ComplexityParams p = pm::ComplexityParams::figure3();
};

int cmd_speedup(const SpeedupArgs& a) {
  const pm::SpeedupModel model = pm::parse_speedup_model(a.model);
  const pm::Sweep sweep = pm::Sweep::parse(a.sweep);
  const auto pts = pm::speedup(model, a.p, sweep);
  std::ostringstream csv;
  pm::write_speedup_csv(csv, model, pts);
  write_text(a.out, csv.str());
  return kOk;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string method = "ExchangeDiffusion";
  std::uint64_t seed = 1;
  std::size_t n = 100;
  int d = 2;
  std::int64_t cells = 5;
  double cutoff = 1.0;
  std::int64_t t_max = 10;
  std::string out = "-";
};

int cmd_generate(const GenerateArgs& a) {
  if (a.d < 1 || a.d > pm::kMaxDim) throw pm::UsageError("--d must be in 1.." + std::to_string(pm::kMaxDim));
  pm::Domain dom;
  dom.d = a.d;
  if (a.cells < 1) throw pm::UsageError("--cells must be positive");
  // extent (cells - 1/2) r_c gives exactly `cells` cells per dimension
  for (int l = 0; l < a.d; ++l) dom.max[l] = (static_cast<double>(a.cells) - 0.5) * a.cutoff;
  pm::MethodParams mp{a.method, {}};
  if (a.method == "LatticeWalk" || a.method == "SphDensity") mp.values["seed"] = static_cast<std::int64_t>(a.seed >> 1);
  const pm::CellGrid grid = pm::build_grid(dom, a.cutoff);
  write_text(a.out, pm::dump_instance(pm::random_instance(mp, a.seed, grid, a.n, a.t_max)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmrun: particle method interpreters, verification and complexity models"};
  app.require_subcommand(1);

  RunArgs run;
  auto* r = app.add_subcommand("run", "run an instance with the sequential or the distributed interpreter");
  r->add_option("instance", run.instance, "instance JSON file")->required();
  r->add_option("--engine", run.engine, "seq or par")->capture_default_str();
  r->add_option("--mode", run.mode, "reference or concurrent (par only)")->capture_default_str();
  r->add_option("--out", run.out, "final state JSON ('-' for stdout)")->capture_default_str();
  r->add_option("--trace", run.trace, "write every visited state as JSON lines");
  r->add_option("--audit", run.audit, "communication audit CSV (par only)")->capture_default_str();
  r->add_flag("--procs-view", run.procs_view, "include the per-process storage view in the report (par only)");
  r->add_option("--max-steps", run.max_steps, "non-termination guard")->capture_default_str();

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "check an instance or run the lemma suite");
  v->add_option("instance", ver.instance, "instance JSON file");
  v->add_option("--suite", ver.suite, "lemmas");
  v->add_option("--max-cells", ver.max_cells, "largest grid for the lemma suite")->capture_default_str();
  v->add_option("--max-d", ver.max_d, "largest dimension for the lemma suite")->capture_default_str()->check(CLI::Range(1, 3));
  v->add_option("--seed", ver.seed, "seed for randomized checks")->capture_default_str();
  v->add_option("--trials", ver.trials, "interaction-law trials")->capture_default_str();
  v->add_option("--mode", ver.mode, "reference or concurrent")->capture_default_str();
  v->add_option("--out", ver.out, "also write the JSON report here");

  SpeedupArgs sp;
  auto* s = app.add_subcommand("speedup", "emit a speedup table as CSV");
  s->add_option("--model", sp.model, "cell, amdahl or gustafson")->required();
  s->add_option("--sweep", sp.sweep, "a:b:step over n_CPU (N_p_max for cell)")->required();
  s->add_option("--out", sp.out, "CSV path ('-' for stdout)")->capture_default_str();
  s->add_option("--d", sp.p.d, "dimension")->capture_default_str();
  s->add_option("--n-cell", sp.p.N_cell, "N_cell (cells per CPU for gustafson)")->capture_default_str();
  s->add_option("--n-max", sp.p.n_max, "particles per cell")->capture_default_str();
  s->add_option("--tau-i", sp.p.tau_i)->capture_default_str();
  s->add_option("--tau-e", sp.p.tau_e)->capture_default_str();
  s->add_option("--tau-f", sp.p.tau_f)->capture_default_str();
  s->add_option("--tau-edot", sp.p.tau_edot)->capture_default_str();
  s->add_option("--c-u", sp.p.C_u)->capture_default_str();
  s->add_option("--c-alpha", sp.p.C_alpha)->capture_default_str();
  s->add_option("--c-beta", sp.p.C_beta)->capture_default_str();
  s->add_option("--c-gamma", sp.p.C_gamma)->capture_default_str();
  s->add_option("--c-c", sp.p.C_c)->capture_default_str();
  s->add_option("--T", sp.p.T, "number of states")->capture_default_str();

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a random instance");
  g->add_option("--method", gen.method)->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--n", gen.n, "number of particles")->capture_default_str();
  g->add_option("--d", gen.d)->capture_default_str();
  g->add_option("--cells", gen.cells, "cells per dimension")->capture_default_str();
  g->add_option("--cutoff", gen.cutoff)->capture_default_str();
  g->add_option("--t-max", gen.t_max)->capture_default_str();
  g->add_option("--out", gen.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*r) return cmd_run(run);
    if (*v) return cmd_verify(ver);
    if (*s) return cmd_speedup(sp);
    if (*g) return cmd_generate(gen);
  } catch (const pm::InputError& e) {
    std::cerr << "pmrun: input error: " << e.what() << '\n';
    return kInput;
  } catch (const pm::UsageError& e) {
    std::cerr << "pmrun: usage error: " << e.what() << '\n';
    return kInput;
  } catch (const pm::ConstraintViolation& e) {
    std::cerr << "pmrun: constraint violation: " << e.what() << '\n';
    return kFail;
  } catch (const pm::NonTermination& e) {
    std::cerr << "pmrun: " << e.what() << '\n';
    return kFail;
  } catch (const pm::Error& e) {
    std::cerr << "pmrun: " << e.what() << '\n';
    return kFail;
  }
  return kInput;
}
