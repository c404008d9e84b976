// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pm/pm.hpp"

using namespace pm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

// ---------------------------------------------------------------------------
// random instance sweep shared by criteria 1, 2 and 9

struct SweepCase {
  Instance inst;
  GridDims dims;
};

SweepCase sweep_case(const std::string& method, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + static_cast<std::uint64_t>(d));
  const double cutoffs[] = {0.5, 0.75, 1.0, 1.5};
  const double rc = cutoffs[bounded_draw(rng, 4)];
  Domain dom;
  dom.d = d;
  for (int l = 0; l < d; ++l) {
    const auto cells = static_cast<double>(1 + bounded_draw(rng, 5));
    // lower corner on a dyadic lattice, extent strictly between (cells-1) and cells cutoffs
    dom.min[l] = (static_cast<double>(bounded_draw(rng, 9)) - 4.0) * 0.25;
    dom.max[l] = dom.min[l] + (cells - 0.5) * rc;
  }
  const CellGrid grid = build_grid(dom, rc);
  MethodParams mp{method, {}};
  if (method == "LatticeWalk") {
    mp.values["seed"] = static_cast<std::int64_t>(rng() >> 1);
    const double fractions[] = {0.25, 0.5, 1.0};
    mp.values["step_fraction"] = fractions[bounded_draw(rng, 3)];
  } else if (method == "SphDensity") {
    mp.values["seed"] = static_cast<std::int64_t>(rng() >> 1);
    mp.values["speed"] = bounded_draw(rng, 2) == 0 ? 0.0 : 0.5;
  }
  const auto n = static_cast<std::size_t>(bounded_draw(rng, 201));
  const auto t_max = static_cast<std::int64_t>(1 + bounded_draw(rng, 20));
  Instance inst = random_instance(mp, rng(), grid, n, t_max);
  if (method == "SphDensity")
    for (Particle& p : inst.state.particles) p.props[sph::kRho] = 1.0 / 3.0 + static_cast<double>(bounded_draw(rng, 100));
  return {std::move(inst), grid.dims};
}

struct SweepStats {
  int runs = 0;
  int mismatches = 0;
  int digest_mismatches = 0;
  std::string first;
};

void run_case(const SweepCase& c, const Tolerance& tol, bool modes, SweepStats& st) {
  const AlgorithmSpec spec = instantiate(c.inst);
  const CellGrid grid = build_grid(c.inst.domain, c.inst.cutoff);
  const RunResult seq = run(c.inst, spec);
  const ParallelRunResult par =
      DistributedRuntime<>(spec, grid, ExecMode::ReferenceSequentialPhases).parallel_run(c.inst);
  const EquivalenceReport eq = equivalent_up_to_permutation(seq.final, par.final, tol, seq.T, par.T);
  ++st.runs;
  if (!eq.match) {
    ++st.mismatches;
    if (st.first.empty()) st.first = to_json(eq).dump();
  }
  if (modes) {
    const ParallelRunResult conc = DistributedRuntime<>(spec, grid, ExecMode::ConcurrentWorkers).parallel_run(c.inst);
    if (state_digest(c.inst, gather_centers(par.final)) != state_digest(c.inst, gather_centers(conc.final)) ||
        par.T != conc.T)
      ++st.digest_mismatches;
  }
}

// ---------------------------------------------------------------------------
// independent overlap oracle for the communication log of one phase

bool phase_conflict_free(const std::vector<CommEvent>& events, std::string& why) {
  std::set<std::int64_t> readers;
  std::map<std::int64_t, std::int64_t> target_reader;
  for (const CommEvent& e : events) readers.insert(e.reader);
  for (const CommEvent& e : events) {
    auto [it, fresh] = target_reader.emplace(e.target, e.reader);
    if (!fresh && it->second != e.reader) {
      why = "target " + std::to_string(e.target) + " read by " + std::to_string(it->second) + " and " +
            std::to_string(e.reader);
      return false;
    }
    if (e.target != e.reader && readers.count(e.target)) {
      why = "reader " + std::to_string(e.target) + " is read by " + std::to_string(e.reader);
      return false;
    }
  }
  return true;
}

}  // namespace

int main() {
  const auto t_all = Clock::now();

  // 1 and 9: exact methods, bit-exact equivalence and mode determinism
  {
    const auto t0 = Clock::now();
    SweepStats st;
    for (const std::string method : {"ExchangeDiffusion", "LatticeWalk"})
      for (int d = 1; d <= 3; ++d)
        for (std::uint64_t seed = 1; seed <= 50; ++seed) run_case(sweep_case(method, d, seed), Tolerance::bit_exact(), true, st);
    const double secs = seconds_since(t0);
    report(1, st.mismatches == 0 && st.runs == 300 && secs < 300.0,
           "sequential and distributed runs agree bit-exactly on exact methods",
           std::to_string(st.runs) + " runs, " + std::to_string(st.mismatches) + " mismatches, " +
               std::to_string(secs) + " s including concurrent runs" + (st.first.empty() ? "" : ", first: " + st.first));
    report(9, st.digest_mismatches == 0 && st.runs == 300, "reference and concurrent modes give identical digests",
           std::to_string(st.runs) + " runs, " + std::to_string(st.digest_mismatches) + " digest mismatches");
  }

  // 2: SphDensity within rel 1e-9, abs 1e-12
  {
    SweepStats st;
    const Tolerance tol{1e-9, 1e-12};
    for (int d = 1; d <= 3; ++d)
      for (std::uint64_t seed = 1; seed <= 50; ++seed) run_case(sweep_case("SphDensity", d, seed), tol, false, st);
    report(2, st.mismatches == 0 && st.runs == 150, "SphDensity equivalence within tolerance",
           std::to_string(st.runs) + " runs, " + std::to_string(st.mismatches) + " mismatches" +
               (st.first.empty() ? "" : ", first: " + st.first));
  }

  // 3: index round trip, all shapes with at most 1e4 cells, d <= 4
  {
    const LemmaResult r = lemma_index_roundtrip(10'000, 4);
    report(3, r.ok() && r.checks > 0, "index round trip over all grids up to 10^4 cells, d <= 4",
           std::to_string(r.checks) + " checks, " + std::to_string(r.failures) + " failures");
  }

  // 4: every copy and collect phase of a full step is overlap free, checked
  // by the oracle above against the runtime's own log
  {
    std::int64_t grids = 0, phases = 0, bad = 0;
    std::string first;
    for (int d = 1; d <= 3; ++d)
      for_each_grid_shape(d, 729, [&](const GridDims& dims) {
        ++grids;
        Domain dom;
        dom.d = d;
        for (int l = 0; l < d; ++l) dom.max[l] = static_cast<double>(dims[l]) - 0.5;
        const CellGrid grid = build_grid(dom, 1.0);
        const AlgorithmSpec spec = instantiate({"ExchangeDiffusion", {}}, dom, 1.0);
        const DistributedRuntime<> rt(spec, grid, ExecMode::ReferenceSequentialPhases);
        CommLog log;
        rt.parallel_step(distribute_initial(State{GlobalVar{1, 2, {}}, {}}, grid), &log);
        std::map<std::int64_t, std::vector<CommEvent>> by_phase;
        for (const CommEvent& e : log.events) by_phase[e.phase].push_back(e);
        if (log.next_phase - 1 != 2 * pow3(d)) {
          ++bad;
          if (first.empty()) first = "grid " + to_string(dims.extents()) + ": " + std::to_string(log.next_phase - 1) + " phases";
        }
        for (const auto& [ph, evs] : by_phase) {
          ++phases;
          std::string why;
          if (!phase_conflict_free(evs, why)) {
            ++bad;
            if (first.empty()) first = "grid " + to_string(dims.extents()) + " phase " + std::to_string(ph) + ": " + why;
          }
        }
      });
    const LemmaReport suite = lemma_suite(LemmaOptions{729, 1, 3, 4, 40});
    const LemmaResult& l3 = suite.lemmas.at("lemma3_no_overlap");
    report(4, bad == 0 && l3.ok(), "no overlapping communications in any copy or collect phase, grids up to 729 cells",
           std::to_string(grids) + " grids, " + std::to_string(phases) + " phases by oracle, " + std::to_string(bad) +
               " bad; lemma suite audit " + std::to_string(l3.checks) + " checks, " + std::to_string(l3.failures) +
               " failures" + (first.empty() ? "" : ", first: " + first));
  }

  // 5: lemma suite over the same family, timed
  {
    const auto t0 = Clock::now();
    const LemmaReport r = lemma_suite(LemmaOptions{729, 1, 3, 1, 40});
    const double secs = seconds_since(t0);
    std::string detail = std::to_string(r.grids) + " grids, " + std::to_string(secs) + " s";
    for (const char* name : {"lemma4_neighbors_present", "lemma5_compartment_exists", "lemma6_inside_domain", "lemma7_placement"}) {
      const LemmaResult& l = r.lemmas.at(name);
      detail += std::string(", ") + name + " " + std::to_string(l.checks) + "/" + std::to_string(l.failures);
      if (!l.ok() && !l.examples.empty()) detail += " [" + l.examples.front() + "]";
    }
    report(5, r.ok() && secs < 60.0, "lemma suite passes on all grids up to 729 cells in under 60 s", detail);
  }

  // 6: gamma enumerates the processes exactly once
  {
    std::int64_t grids = 0, bad = 0;
    for (int d = 1; d <= 4; ++d)
      for_each_grid_shape(d, d == 4 ? 256 : 729, [&](const GridDims& dims) {
        ++grids;
        std::vector<int> hits(static_cast<std::size_t>(dims.count()), 0);
        for (std::int64_t k = 1; k <= pow3(d); ++k) {
          const std::int64_t m = checkerboard_dims(k, dims).active_count;
          for (std::int64_t j = 1; j <= m; ++j) {
            const std::int64_t w = active_process(k, j, dims);
            if (w >= 1 && w <= dims.count()) ++hits[static_cast<std::size_t>(w - 1)];
            else ++bad;
          }
        }
        for (int h : hits)
          if (h != 1) {
            ++bad;
            break;
          }
      });
    report(6, bad == 0, "gamma is a bijection onto the processes", std::to_string(grids) + " grids, " + std::to_string(bad) + " bad");
  }

  // 7: saturation above N_cell
  {
    std::int64_t checked = 0, bad = 0;
    for (std::int64_t N : {9, 36, 900})
      for (std::int64_t n = N + 1; n <= 2 * N; ++n) {
        ++checked;
        if (xi_calc(N, n, 2) != 1 || xi_com(N, n, 2) != 9 || xi_branch(N, n, 2) != XiBranch::Saturated) ++bad;
      }
    report(7, bad == 0, "xi_calc = 1 and xi_com = 9 for n_CPU in (N_cell, 2 N_cell], d = 2",
           std::to_string(checked) + " points, " + std::to_string(bad) + " bad");
  }

  // 8: speedup curve shapes with the figure constants
  {
    const ComplexityParams p = ComplexityParams::figure3();
    const auto am = speedup(SpeedupModel::Amdahl, p, Sweep{1, 1800, 1});
    const auto gu = speedup(SpeedupModel::Gustafson, p, Sweep{1, 1800, 1});
    bool am_mono = true, am_flat = true, gu_mono = true;
    std::set<double> levels;
    for (std::size_t i = 0; i < am.size(); ++i) {
      levels.insert(am[i].speedup);
      if (i > 0 && am[i].speedup < am[i - 1].speedup) am_mono = false;
      if (i > 0 && gu[i].speedup < gu[i - 1].speedup) gu_mono = false;
      if (am[i].x >= 900 && am[i].speedup != am[899].speedup) am_flat = false;
    }
    // step shaped: far fewer distinct values than sample points
    const bool am_steps = levels.size() > 2 && levels.size() * 4 < am.size();
    const double g900 = gu[899].speedup;
    const double ratio = speedup_cell(p, 2e4) / speedup_cell(p, 1e4);
    const bool ok = am_mono && am_flat && am_steps && gu_mono && g900 > 0.5 * 900.0 / 9.0 && std::abs(ratio - 2.0) <= 0.2;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "amdahl monotone %d, %zu levels, plateau %.6g from 900; gustafson monotone %d, %.6g at 900; cell ratio %.6g",
                  am_mono, levels.size(), am[899].speedup, gu_mono, g900, ratio);
    report(8, ok, "speedup curves have the expected shape", buf);
  }

  // 10: interaction law checker
  {
    bool ok = true;
    std::string detail;
    const Domain dom = [] {
      Domain d;
      d.d = 2;
      d.max[0] = d.max[1] = 4.0;
      return d;
    }();
    for (const std::string& name : list_methods()) {
      const AlgorithmSpec spec = instantiate({name, {}}, dom, 1.0);
      const LawReport r = check_interaction_laws(spec, dom, 11, 10'000, Tolerance::for_spec(spec));
      ok = ok && r.ok();
      detail += name + (r.ok() ? " ok, " : " FAILED, ");
    }
    AlgorithmSpec mutant = instantiate({"ExchangeDiffusion", {}}, dom, 1.0);
    mutant.interact = [](const GlobalVar&, const Particle& j, const Particle& k) {
      Particle out = j;
      detail::iprop(out, exchange::kH) =
          wrapping_add(wrapping_mul(2, detail::iprop(j, exchange::kH)), detail::iprop(k, exchange::kH));
      return out;
    };
    const LawReport m = check_interaction_laws(mutant, dom, 11, 10'000, Tolerance::bit_exact());
    ok = ok && !m.ok() && m.failures("order") > 0;
    detail += "order-dependent mutant " + std::string(m.ok() ? "missed" : "detected with " + std::to_string(m.failures("order")) + " order failures");
    report(10, ok, "law checker passes the built-ins over 10^4 trials and flags the mutant", detail);
  }

  std::printf("%s: %d of 10 criteria failed, %.1f s\n", failures ? "FAIL" : "PASS", failures, seconds_since(t_all));
  return failures ? 1 : 0;
}
