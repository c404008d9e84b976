#pragma once

// Executable checks: state equivalence up to particle order, the interaction
// laws a method has to satisfy, motion bounds over a trace, and brute-force
// checks of the index and redistribution lemmata over whole grid families.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pm/cell_grid.hpp"
#include "pm/core.hpp"
#include "pm/dist_runtime.hpp"
#include "pm/index_space.hpp"
#include "pm/methods.hpp"
#include "pm/sequential.hpp"

namespace pm {

// ---------------------------------------------------------------------------
// tolerance

struct Tolerance {
  double rel = 0.0;
  double abs = 0.0;

  bool exact() const { return rel == 0.0 && abs == 0.0; }
  static Tolerance bit_exact() { return {}; }
  static Tolerance floating() { return {1e-9, 1e-12}; }
  static Tolerance for_spec(const AlgorithmSpec& s) { return s.exact() ? bit_exact() : floating(); }

  bool close(double a, double b) const {
    if (exact()) return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
    if (a == b) return true;
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
  }

  bool close(const Scalar& a, const Scalar& b) const {
    if (is_integer(a) || is_integer(b)) return bit_equal(a, b);
    return close(std::get<double>(a), std::get<double>(b));
  }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// equivalence

struct ParticleDiff {
  std::uint64_t id = 0;
  std::string field;
  std::string seq;
  std::string par;
};

struct EquivalenceReport {
  bool match = false;
  std::int64_t T_seq = 0;
  std::int64_t T_par = 0;
  bool global_match = false;
  std::vector<ParticleDiff> particle_diff;
  Tolerance tolerance;
};

inline std::vector<ParticleDiff> diff_particles(const std::vector<Particle>& a, const std::vector<Particle>& b,
                                                const Tolerance& tol) {
  std::vector<ParticleDiff> out;
  auto index = [&](const std::vector<Particle>& ps, const char* side) {
    std::unordered_map<std::uint64_t, const Particle*> m;
    for (const Particle& p : ps)
      if (!m.emplace(p.id, &p).second) out.push_back({p.id, "duplicate", side, side});
    return m;
  };
  const auto ma = index(a, "seq");
  const auto mb = index(b, "par");
  std::vector<std::uint64_t> ids;
  for (const auto& [id, p] : ma) ids.push_back(id);
  for (const auto& [id, p] : mb)
    if (!ma.count(id)) ids.push_back(id);
  std::sort(ids.begin(), ids.end());

  for (std::uint64_t id : ids) {
    auto ia = ma.find(id);
    auto ib = mb.find(id);
    if (ia == ma.end() || ib == mb.end()) {
      out.push_back({id, "presence", ia == ma.end() ? "missing" : "present", ib == mb.end() ? "missing" : "present"});
      continue;
    }
    const Particle& p = *ia->second;
    const Particle& q = *ib->second;
    for (int l = 0; l < kMaxDim; ++l)
      if (!tol.close(p.x[l], q.x[l]))
        out.push_back({id, "x" + std::to_string(l + 1), format_double(p.x[l]), format_double(q.x[l])});
    if (p.props.size() != q.props.size()) {
      out.push_back({id, "props", std::to_string(p.props.size()), std::to_string(q.props.size())});
      continue;
    }
    for (std::size_t i = 0; i < p.props.size(); ++i)
      if (!tol.close(p.props[i], q.props[i]))
        out.push_back({id, "prop" + std::to_string(i), to_string(p.props[i]), to_string(q.props[i])});
  }
  return out;
}

inline bool globals_close(const GlobalVar& a, const GlobalVar& b, const Tolerance& tol) {
  if (a.t != b.t || a.t_max != b.t_max || a.extras.size() != b.extras.size()) return false;
  for (const auto& [k, v] : a.extras) {
    auto it = b.extras.find(k);
    if (it == b.extras.end() || !tol.close(v, it->second)) return false;
  }
  return true;
}

/// Pairs particles by id and compares fields under the tolerance.
inline EquivalenceReport compare_states(const State& seq, const State& par, const Tolerance& tol,
                                        std::int64_t T_seq = 0, std::int64_t T_par = 0) {
  EquivalenceReport r;
  r.tolerance = tol;
  r.T_seq = T_seq;
  r.T_par = T_par;
  r.global_match = globals_close(seq.g, par.g, tol);
  r.particle_diff = diff_particles(seq.particles, par.particles, tol);
  r.match = r.global_match && r.particle_diff.empty() && T_seq == T_par;
  return r;
}

/// The sequential state against the union of center compartments and the
/// first process's global variable.
inline EquivalenceReport equivalent_up_to_permutation(const State& seq, const DistributedState& dist,
                                                      const Tolerance& tol, std::int64_t T_seq = 0,
                                                      std::int64_t T_par = 0) {
  EquivalenceReport r = compare_states(seq, gather_centers(dist), tol, T_seq, T_par);
  for (const GlobalVar& g : dist.globals)
    if (!(g == dist.globals.front())) r.global_match = false;
  r.match = r.global_match && r.particle_diff.empty() && T_seq == T_par;
  return r;
}

inline nlohmann::ordered_json to_json(const EquivalenceReport& r) {
  nlohmann::ordered_json diffs = nlohmann::ordered_json::array();
  for (const ParticleDiff& d : r.particle_diff)
    diffs.push_back({{"id", d.id}, {"field", d.field}, {"seq", d.seq}, {"par", d.par}});
  return {{"match", r.match},
          {"T_seq", r.T_seq},
          {"T_par", r.T_par},
          {"global_match", r.global_match},
          {"tolerance", {{"rel", r.tolerance.rel}, {"abs", r.tolerance.abs}}},
          {"particle_diff", diffs}};
}

// ---------------------------------------------------------------------------
// interaction laws

struct LawCounterexample {
  std::string law;
  std::int64_t trial = 0;
  std::string detail;
};

struct LawReport {
  std::int64_t trials = 0;
  std::map<std::string, std::int64_t> checks;
  std::vector<LawCounterexample> counterexamples;

  bool ok() const { return counterexamples.empty(); }
  std::int64_t failures(const std::string& law) const {
    return std::count_if(counterexamples.begin(), counterexamples.end(),
                         [&](const LawCounterexample& c) { return c.law == law; });
  }
};

namespace detail {

inline Particle random_particle(const AlgorithmSpec& spec, const Domain& domain, std::mt19937_64& rng,
                                std::uint64_t id) {
  Particle p;
  p.id = id;
  for (int l = 0; l < domain.d; ++l) {
    const double u = static_cast<double>(bounded_draw(rng, std::uint64_t{1} << 20)) / 1048576.0;
    p.x[l] = domain.min[l] + (domain.max[l] - domain.min[l]) * u;
    if (!(p.x[l] < domain.max[l])) p.x[l] = domain.min[l];
  }
  for (const PropertyDesc& d : spec.properties) {
    if (d.kind == PropertyKind::Integer)
      p.props.push_back(static_cast<std::int64_t>(bounded_draw(rng, std::uint64_t{1} << 21)) - (std::int64_t{1} << 20));
    else
      p.props.push_back(static_cast<double>(static_cast<std::int64_t>(bounded_draw(rng, 1u << 24)) - (1 << 23)) / 65536.0);
  }
  return p;
}

inline bool same_particle(const Particle& a, const Particle& b, const Tolerance& tol) {
  return a.id == b.id && diff_particles({a}, {b}, tol).empty();
}

}  // namespace detail

/// Random (g, p_j, p_k, p_k') triples checked against:
///  pull          interact keeps the identity of its first argument
///  independence  i(p_j, i(p_k, p_k')) = i(p_j, p_k)
///  order         i(i(p_j, p_k), p_k') = i(i(p_j, p_k'), p_k)
///  neighborhood  interact changes neither position nor the Omega relation
///  fold          folding over a permuted neighbor tuple gives the same particle
inline LawReport check_interaction_laws(const AlgorithmSpec& spec, const Domain& domain, std::uint64_t seed,
                                        std::int64_t trials, const Tolerance& tol) {
  LawReport rep;
  rep.trials = trials;
  std::mt19937_64 rng(seed);
  auto fail = [&](const char* law, std::int64_t trial, const std::string& what) {
    if (rep.failures(law) < 16) rep.counterexamples.push_back({law, trial, what});
    else rep.counterexamples.push_back({law, trial, {}});
  };
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    GlobalVar g;
    g.t = 1 + static_cast<std::int64_t>(bounded_draw(rng, 1000));
    g.t_max = g.t + 1 + static_cast<std::int64_t>(bounded_draw(rng, 1000));
    const Particle pj = detail::random_particle(spec, domain, rng, 3 * static_cast<std::uint64_t>(trial));
    const Particle pk = detail::random_particle(spec, domain, rng, 3 * static_cast<std::uint64_t>(trial) + 1);
    const Particle pk2 = detail::random_particle(spec, domain, rng, 3 * static_cast<std::uint64_t>(trial) + 2);

    const Particle jk = spec.interact(g, pj, pk);
    ++rep.checks["pull"];
    if (jk.id != pj.id) fail("pull", trial, "interact changed the id of its first argument");

    ++rep.checks["independence"];
    if (!detail::same_particle(spec.interact(g, pj, spec.interact(g, pk, pk2)), jk, tol))
      fail("independence", trial, "result depends on an interaction already applied to the partner");

    ++rep.checks["order"];
    const Particle a = spec.interact(g, jk, pk2);
    const Particle b = spec.interact(g, spec.interact(g, pj, pk2), pk);
    if (!detail::same_particle(a, b, tol)) fail("order", trial, "two interactions do not commute");

    ++rep.checks["neighborhood"];
    if (jk.x != pj.x || spec.omega(g, jk, pk) != spec.omega(g, pj, pk) || spec.omega(g, pk, jk) != spec.omega(g, pk, pj))
      fail("neighborhood", trial, "interaction changes the neighborhood relation");

    ++rep.checks["fold"];
    std::vector<Particle> partners;
    const auto m = 2 + bounded_draw(rng, 7);
    for (std::uint64_t i = 0; i < m; ++i)
      partners.push_back(detail::random_particle(spec, domain, rng, (std::uint64_t{1} << 40) + i));
    std::vector<Particle> shuffled = partners;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[bounded_draw(rng, i)]);
    Particle f1 = pj, f2 = pj;
    for (const Particle& q : partners) f1 = spec.interact(g, f1, q);
    for (const Particle& q : shuffled) f2 = spec.interact(g, f2, q);
    if (!detail::same_particle(f1, f2, tol)) fail("fold", trial, "fold depends on the order of the neighbor tuple");
  }
  return rep;
}

inline nlohmann::ordered_json to_json(const LawReport& r) {
  nlohmann::ordered_json laws = nlohmann::ordered_json::object();
  for (const auto& [law, n] : r.checks) laws[law] = {{"checks", n}, {"failures", r.failures(law)}};
  nlohmann::ordered_json ex = nlohmann::ordered_json::array();
  for (const LawCounterexample& c : r.counterexamples)
    if (!c.detail.empty()) ex.push_back({{"law", c.law}, {"trial", c.trial}, {"detail", c.detail}});
  return {{"ok", r.ok()}, {"trials", r.trials}, {"laws", laws}, {"counterexamples", ex}};
}

// ---------------------------------------------------------------------------
// motion

struct MotionViolation {
  std::size_t state = 0;  // index into the trace
  std::uint64_t id = 0;
  std::string what;
};

struct MotionReport {
  std::size_t states = 0;
  std::vector<MotionViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Flags positions outside [D_min, D_max) and displacements above r_c
/// between consecutive states (particles matched by id).
inline MotionReport check_motion_constraints(const std::vector<State>& trace, const Domain& domain, double cutoff) {
  MotionReport rep;
  rep.states = trace.size();
  std::unordered_map<std::uint64_t, Position> prev;
  for (std::size_t s = 0; s < trace.size(); ++s) {
    std::unordered_map<std::uint64_t, Position> cur;
    for (const Particle& p : trace[s].particles) {
      if (!domain.contains(p.x)) rep.violations.push_back({s, p.id, "position outside [D_min, D_max)"});
      auto it = prev.find(p.id);
      if (s > 0 && it != prev.end() && !within_cutoff(it->second, p.x, cutoff))
        rep.violations.push_back({s, p.id,
                                  "moved " + format_double(std::sqrt(squared_distance(it->second, p.x))) +
                                      " in one step, more than the cutoff radius " + format_double(cutoff)});
      cur.emplace(p.id, p.x);
    }
    prev = std::move(cur);
  }
  return rep;
}

inline nlohmann::ordered_json to_json(const MotionReport& r) {
  nlohmann::ordered_json v = nlohmann::ordered_json::array();
  for (const MotionViolation& m : r.violations) v.push_back({{"state", m.state}, {"id", m.id}, {"what", m.what}});
  return {{"ok", r.ok()}, {"states", r.states}, {"violations", v}};
}

// ---------------------------------------------------------------------------
// lemmata

/// Calls f(dims) for every extent vector of dimension d with product <= max_cells.
template <class F>
void for_each_grid_shape(int d, std::int64_t max_cells, F&& f) {
  IndexVec ext = IndexVec::filled(d, 1);
  auto rec = [&](auto&& self, int l, std::int64_t prod) -> void {
    if (l == d) {
      f(GridDims(ext));
      return;
    }
    for (std::int64_t i = 1; prod * i <= max_cells; ++i) {
      ext[l] = i;
      self(self, l + 1, prod * i);
    }
    ext[l] = 1;
  };
  rec(rec, 0, 1);
}

struct LemmaResult {
  std::int64_t checks = 0;
  std::int64_t failures = 0;
  std::vector<std::string> examples;  // first few failure messages

  bool ok() const { return failures == 0; }
  void fail(std::string msg) {
    ++failures;
    if (examples.size() < 8) examples.push_back(std::move(msg));
  }
  void absorb(const LemmaResult& o) {
    checks += o.checks;
    failures += o.failures;
    for (const std::string& e : o.examples)
      if (examples.size() < 8) examples.push_back(e);
  }
};

/// Round trip through to_vec and to_scalar for every index of one grid. The
/// expected pairing comes from an odometer that runs the first dimension
/// fastest.
inline void roundtrip_grid(const GridDims& dims, LemmaResult& r) {
  IndexVec v = IndexVec::filled(dims.d(), 1);
  const std::int64_t n = dims.count();
  for (std::int64_t j = 1; j <= n; ++j) {
    ++r.checks;
    if (to_vec(j, dims) != v || to_scalar(v, dims) != j)
      r.fail("grid " + to_string(dims.extents()) + ": index " + std::to_string(j) + " <-> " + to_string(v));
    for (int l = 0; l < dims.d(); ++l) {
      if (++v[l] <= dims[l]) break;
      v[l] = 1;
    }
  }
}

/// Lemma 1 over every grid of dimension 1..max_d with product <= max_cells.
inline LemmaResult lemma_index_roundtrip(std::int64_t max_cells, int max_d) {
  LemmaResult r;
  for (int d = 1; d <= max_d; ++d) for_each_grid_shape(d, max_cells, [&](const GridDims& g) { roundtrip_grid(g, r); });
  return r;
}

struct LemmaOptions {
  std::int64_t max_cells = 729;
  int min_d = 1;
  int max_d = 3;
  std::uint64_t seed = 1;
  std::size_t max_particles = 40;
};

struct LemmaReport {
  std::int64_t grids = 0;
  std::map<std::string, LemmaResult> lemmas;

  bool ok() const {
    return std::all_of(lemmas.begin(), lemmas.end(), [](const auto& kv) { return kv.second.ok(); });
  }
};

inline nlohmann::ordered_json to_json(const LemmaReport& r) {
  nlohmann::ordered_json lem = nlohmann::ordered_json::object();
  for (const auto& [name, res] : r.lemmas)
    lem[name] = {{"ok", res.ok()}, {"checks", res.checks}, {"failures", res.failures}, {"examples", res.examples}};
  return {{"ok", r.ok()}, {"grids", r.grids}, {"lemmas", lem}};
}

namespace detail {

/// Domain whose grid has exactly the extents `dims` at r_c = 1: a dyadic
/// lower corner and an extent of I_l - 1 plus a dyadic fraction.
inline Domain domain_for(const GridDims& dims, std::mt19937_64& rng) {
  Domain dom;
  dom.d = dims.d();
  for (int l = 0; l < dom.d; ++l) {
    dom.min[l] = static_cast<double>(static_cast<std::int64_t>(bounded_draw(rng, 33)) - 16) / 4.0;
    const double frac = static_cast<double>(1 + bounded_draw(rng, 15)) / 16.0;
    dom.max[l] = dom.min[l] + static_cast<double>(dims[l] - 1) + frac;
  }
  return dom;
}

/// Random particles plus particles on the domain border and on cell faces.
inline std::vector<Particle> fuzz_particles(const CellGrid& grid, std::mt19937_64& rng, std::size_t n) {
  std::vector<Particle> out;
  const int d = grid.d();
  for (std::size_t i = 0; i < n; ++i) {
    Particle p;
    p.id = i;
    for (int l = 0; l < d; ++l) {
      const double lo = grid.domain.min[l], hi = grid.domain.max[l];
      switch (bounded_draw(rng, 6)) {
        case 0: p.x[l] = lo; break;
        case 1: p.x[l] = std::nextafter(hi, lo); break;
        case 2: {
          const auto face = static_cast<double>(bounded_draw(rng, static_cast<std::uint64_t>(grid.dims[l])));
          p.x[l] = lo + face * grid.cutoff;
          if (!(p.x[l] < hi)) p.x[l] = lo;
          break;
        }
        default:
          p.x[l] = lo + (hi - lo) * static_cast<double>(bounded_draw(rng, 1u << 20)) / 1048576.0;
          if (!(p.x[l] < hi)) p.x[l] = lo;
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

/// 0-based cell coordinates computed directly from the floor formula.
inline IndexVec cell0_oracle(const Position& x, const CellGrid& grid) {
  IndexVec c(grid.d());
  for (int l = 0; l < grid.d(); ++l) c[l] = static_cast<std::int64_t>(std::floor((x[l] - grid.domain.min[l]) / grid.cutoff));
  return c;
}

template <class Topology>
void check_grid(const GridDims& dims, const LemmaOptions& opts, std::mt19937_64& rng, LemmaReport& rep) {
  const int d = dims.d();
  const std::int64_t n_cell = dims.count();
  const std::int64_t nk = pow3(d);
  const std::string tag = "grid " + to_string(dims.extents());
  LemmaResult& l1 = rep.lemmas["lemma1_index_roundtrip"];
  LemmaResult& l3 = rep.lemmas["lemma3_no_overlap"];
  LemmaResult& l4 = rep.lemmas["lemma4_neighbors_present"];
  LemmaResult& l5 = rep.lemmas["lemma5_compartment_exists"];
  LemmaResult& l6 = rep.lemmas["lemma6_inside_domain"];
  LemmaResult& l7 = rep.lemmas["lemma7_placement"];
  LemmaResult& gb = rep.lemmas["gamma_bijective"];

  roundtrip_grid(dims, l1);

  const Topology topo(dims);

  // gamma enumerates every process exactly once
  {
    std::vector<std::int64_t> hits(static_cast<std::size_t>(n_cell), 0);
    bool ok = true;
    for (std::int64_t k = 1; k <= nk; ++k)
      for (std::int64_t j = 1; j <= topo.pattern_size(k); ++j) {
        const std::int64_t w = topo.active(k, j);
        if (w < 1 || w > n_cell) ok = false;
        else ++hits[static_cast<std::size_t>(w - 1)];
      }
    ok = ok && std::all_of(hits.begin(), hits.end(), [](std::int64_t h) { return h == 1; });
    ++gb.checks;
    if (!ok) gb.fail(tag + ": gamma is not a bijection onto 1.." + std::to_string(n_cell));
  }

  // instance
  Domain dom = domain_for(dims, rng);
  CellGrid grid = build_grid(dom, 1.0);
  if (!(grid.dims == dims)) {
    ++l1.checks;
    l1.fail(tag + ": constructed domain produced grid " + to_string(grid.dims.extents()));
    return;
  }
  MethodParams mp{"LatticeWalk", {{"seed", static_cast<std::int64_t>(rng() >> 1)}}};
  const AlgorithmSpec spec = instantiate(mp, dom, 1.0);
  const std::size_t n = static_cast<std::size_t>(bounded_draw(rng, opts.max_particles + 1));
  State s0{GlobalVar{1, 2, {}}, fuzz_particles(grid, rng, n)};
  for (Particle& p : s0.particles) p.props = zero_props(spec);

  const DistributedRuntime<Topology> rt(spec, grid, topo, ExecMode::ReferenceSequentialPhases);
  DistributedState ds = distribute_initial(s0, grid);

  // copy, then every partner within r_c of a center particle is local
  CommLog log;
  try {
    ds = rt.copy_all(std::move(ds), &log);
  } catch (const Error& e) {
    ++l4.checks;
    l4.fail(tag + ": copy failed: " + e.what());
    return;
  }
  {
    const AuditReport audit = audit_communications(log.events);
    ++l3.checks;
    if (!audit.ok()) l3.fail(tag + " copy: " + audit.violations.front().what);
    std::vector<std::vector<std::int64_t>> holders(n);
    for (std::int64_t w = 1; w <= n_cell; ++w)
      for (const Compartment& comp : ds.storage(w).compartments)
        for (const Particle& p : comp) holders[p.id].push_back(w);
    for (std::int64_t w = 1; w <= n_cell; ++w)
      for (const Particle& p : ds.storage(w).center())
        for (const Particle& q : s0.particles) {
          if (!within_cutoff(p.x, q.x, grid.cutoff)) continue;
          ++l4.checks;
          const auto& h = holders[q.id];
          if (std::find(h.begin(), h.end(), w) == h.end())
            l4.fail(tag + ": particle " + std::to_string(q.id) + " is a partner of " + std::to_string(p.id) +
                    " but absent from process " + std::to_string(w));
        }
  }

  // step and dist
  std::vector<Particle> stepped;
  try {
    ds = rt.step_all(std::move(ds));
    for (const ProcessStorage& st : ds.storages) stepped.insert(stepped.end(), st.center().begin(), st.center().end());
    ds = rt.dist_all(std::move(ds));
    ++l5.checks;
  } catch (const Error& e) {
    ++l5.checks;
    l5.fail(tag + ": " + e.what());
    return;
  }
  for (std::int64_t w = 1; w <= n_cell; ++w) {
    const IndexVec wv = to_vec(w, dims);
    const ProcessStorage& st = ds.storage(w);
    for (std::int64_t l = 1; l <= nk; ++l) {
      const IndexVec a = to_vec(l, cube3(d));
      for (const Particle& p : st.at(l)) {
        // alpha from the formula, compared with where dist put the particle
        const IndexVec c0 = cell0_oracle(p.x, grid);
        ++l5.checks;
        for (int m = 0; m < d; ++m)
          if (c0[m] - wv[m] + 3 != a[m]) {
            l5.fail(tag + ": particle " + std::to_string(p.id) + " in compartment " + std::to_string(l) +
                    " of process " + std::to_string(w));
            break;
          }
        ++l6.checks;
        for (int m = 0; m < d; ++m)
          if ((wv[m] == 1 && a[m] == 1) || (wv[m] == dims[m] && a[m] == 3)) {
            l6.fail(tag + ": border process " + std::to_string(w) + " holds particle " + std::to_string(p.id) +
                    " in outer compartment " + std::to_string(l));
            break;
          }
      }
    }
  }

  // collect, then every center particle sits in its own cell, exactly once
  log = {};
  ds = rt.collect_all(std::move(ds), &log);
  {
    const AuditReport audit = audit_communications(log.events);
    ++l3.checks;
    if (!audit.ok()) l3.fail(tag + " collect: " + audit.violations.front().what);
  }
  std::vector<std::uint64_t> before, after;
  for (const Particle& p : stepped) before.push_back(p.id);
  for (std::int64_t w = 1; w <= n_cell; ++w)
    for (const Particle& p : ds.storage(w).center()) {
      after.push_back(p.id);
      ++l7.checks;
      IndexVec c = cell0_oracle(p.x, grid);
      for (int m = 0; m < d; ++m) c[m] += 1;
      if (!dims.contains(c) || to_scalar(c, dims) != w)
        l7.fail(tag + ": particle " + std::to_string(p.id) + " collected by process " + std::to_string(w) +
                " but lies in cell " + to_string(c));
    }
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  ++l7.checks;
  if (before != after)
    l7.fail(tag + ": collected particles (" + std::to_string(after.size()) + ") are not the stepped particles (" +
            std::to_string(before.size()) + ")");
}

}  // namespace detail

/// Lemmata 1 and 3 to 7 plus gamma bijectivity over every grid shape of
/// dimension min_d..max_d with at most max_cells cells, one seeded random
/// instance with border fuzzing per grid.
template <class Topology = CheckerboardTopology>
LemmaReport lemma_suite(const LemmaOptions& opts = {}) {
  LemmaReport rep;
  for (const char* name : {"lemma1_index_roundtrip", "lemma3_no_overlap", "lemma4_neighbors_present",
                           "lemma5_compartment_exists", "lemma6_inside_domain", "lemma7_placement", "gamma_bijective"})
    rep.lemmas[name];
  std::mt19937_64 rng(opts.seed);
  for (int d = opts.min_d; d <= opts.max_d; ++d)
    for_each_grid_shape(d, opts.max_cells, [&](const GridDims& dims) {
      ++rep.grids;
      detail::check_grid<Topology>(dims, opts, rng, rep);
    });
  return rep;
}

}  // namespace pm
