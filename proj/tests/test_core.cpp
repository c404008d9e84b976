#include <gtest/gtest.h>

#include "support.hpp"

using namespace pm;
using pmtest::exchange_particle;
using pmtest::h_of;

namespace {

AlgorithmSpec exchange_spec() { return exchange_diffusion({"ExchangeDiffusion", {}}, 1.0); }

AlgorithmSpec always_true(AlgorithmSpec s) {
  s.omega = [](const GlobalVar&, const Particle&, const Particle&) { return true; };
  return s;
}

State two_particles() {
  return State{GlobalVar{1, 2, {}}, {exchange_particle(1, {0.2}, 10), exchange_particle(2, {0.8}, 4)}};
}

}  // namespace

TEST(Neighborhood, PairWithinCutoff) {
  EXPECT_EQ(neighborhood(two_particles(), 1, exchange_spec()), (std::vector<std::size_t>{2}));
  EXPECT_EQ(neighborhood(two_particles(), 2, exchange_spec()), (std::vector<std::size_t>{1}));
}

TEST(Neighborhood, SingleParticleHasNoPartner) {
  State s{GlobalVar{}, {exchange_particle(7, {0.5}, 1)}};
  EXPECT_TRUE(neighborhood(s, 1, exchange_spec()).empty());
}

TEST(Neighborhood, TrueOmegaIncludesSelf) {
  State s{GlobalVar{}, {exchange_particle(7, {0.5}, 1)}};
  EXPECT_EQ(neighborhood(s, 1, always_true(exchange_spec())), (std::vector<std::size_t>{1}));
}

TEST(Neighborhood, TupleOrderAndCutoffBoundary) {
  State s{GlobalVar{}, {exchange_particle(1, {0.0}, 0), exchange_particle(2, {2.0}, 0), exchange_particle(3, {1.0}, 0),
                        exchange_particle(4, {0.5}, 0)}};
  // distance exactly r_c counts
  EXPECT_EQ(neighborhood(s, 1, exchange_spec()), (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(neighborhood(s, 3, exchange_spec()), (std::vector<std::size_t>{1, 2, 4}));
}

TEST(Neighborhood, IndexOutOfRange) {
  EXPECT_THROW(neighborhood(two_particles(), 0, exchange_spec()), IndexError);
  EXPECT_THROW(neighborhood(two_particles(), 3, exchange_spec()), IndexError);
}

TEST(InteractAll, ExchangeAccumulates) {
  const std::vector<Particle> p = interact_all(two_particles(), exchange_spec());
  EXPECT_EQ(std::get<std::int64_t>(p[0].props[exchange::kA]), 4);
  EXPECT_EQ(std::get<std::int64_t>(p[1].props[exchange::kA]), 10);
  EXPECT_EQ(std::get<std::int64_t>(p[0].props[exchange::kC]), 1);
  EXPECT_EQ(std::get<std::int64_t>(p[1].props[exchange::kC]), 1);
  EXPECT_EQ(std::get<std::int64_t>(p[0].props[exchange::kH]), 10);
  EXPECT_EQ(std::get<std::int64_t>(p[1].props[exchange::kH]), 4);
}

TEST(InteractAll, EmptyAndLonely) {
  EXPECT_TRUE(interact_all(State{}, exchange_spec()).empty());
  State s{GlobalVar{}, {exchange_particle(3, {0.1}, 5)}};
  EXPECT_EQ(interact_all(s, exchange_spec()), s.particles);
}

TEST(InteractAll, OnlyIteratedParticleChangesWithinFold) {
  AlgorithmSpec spec = exchange_spec();
  State s{GlobalVar{}, {exchange_particle(1, {0.1}, 3), exchange_particle(2, {0.4}, 5), exchange_particle(3, {0.9}, 7)}};
  std::vector<Particle> p = s.particles;
  for (std::size_t j = 1; j <= p.size(); ++j) {
    const std::vector<Particle> before = p;
    interact_one(s.g, p, j, spec);
    for (std::size_t k = 0; k < p.size(); ++k)
      if (k != j - 1) EXPECT_EQ(p[k], before[k]) << "fold of " << j << " touched " << k + 1;
  }
}

TEST(EvolveAll, ExchangeSwaps) {
  AlgorithmSpec spec = exchange_spec();
  State s = two_particles();
  State mid{s.g, interact_all(s, spec)};
  State out = evolve_all(mid, spec, pmtest::domain1(0.0, 1.0));
  EXPECT_EQ(h_of(out, 1), 4);
  EXPECT_EQ(h_of(out, 2), 10);
  for (const Particle& p : out.particles) {
    EXPECT_EQ(std::get<std::int64_t>(p.props[exchange::kA]), 0);
    EXPECT_EQ(std::get<std::int64_t>(p.props[exchange::kC]), 0);
  }
  EXPECT_EQ(out.g, s.g);
}

TEST(EvolveAll, DestructionAndIdentity) {
  AlgorithmSpec spec = exchange_spec();
  spec.evolve = [](const GlobalVar&, const Particle&) { return std::vector<Particle>{}; };
  EXPECT_TRUE(evolve_all(two_particles(), spec, pmtest::domain1(0.0, 1.0)).particles.empty());
  spec.evolve = [](const GlobalVar&, const Particle& p) { return std::vector<Particle>{p}; };
  EXPECT_EQ(evolve_all(two_particles(), spec, pmtest::domain1(0.0, 1.0)), two_particles());
}

TEST(EvolveAll, TupleAccountingWithCreation) {
  AlgorithmSpec spec = exchange_spec();
  spec.evolve = [](const GlobalVar& g, const Particle& p) {
    std::vector<Particle> out{p};
    for (std::uint64_t i = 0; i < p.id; ++i) {
      Particle c = p;
      c.id = child_id(p.id, i, g.t);
      out.push_back(c);
    }
    return out;
  };
  EXPECT_EQ(evolve_all(two_particles(), spec, pmtest::domain1(0.0, 1.0)).particles.size(), 2u + 1u + 2u);
}

TEST(EvolveAll, LeavingDomainIsViolation) {
  AlgorithmSpec spec = exchange_spec();
  spec.evolve = [](const GlobalVar&, const Particle& p) {
    Particle q = p;
    q.x[0] += 0.5;
    return std::vector<Particle>{q};
  };
  EXPECT_THROW(evolve_all(two_particles(), spec, pmtest::domain1(0.0, 1.0)), ConstraintViolation);
}

TEST(Step, SwapsAndAdvancesTime) {
  State s = step(two_particles(), exchange_spec(), pmtest::domain1(0.0, 1.0));
  EXPECT_EQ(h_of(s, 1), 4);
  EXPECT_EQ(h_of(s, 2), 10);
  EXPECT_EQ(s.g.t, 2);
}

TEST(Step, EmptyOnlyAdvancesTime) {
  State s = step(State{GlobalVar{1, 5, {}}, {}}, exchange_spec(), pmtest::domain1(0.0, 1.0));
  EXPECT_TRUE(s.particles.empty());
  EXPECT_EQ(s.g.t, 2);
}

TEST(Step, StoppedStateIsUsageError) {
  State s = two_particles();
  s.g.t = 2;
  EXPECT_THROW(step(s, exchange_spec(), pmtest::domain1(0.0, 1.0)), UsageError);
}

TEST(Step, DuplicateChildIdsRejected) {
  AlgorithmSpec spec = exchange_spec();
  spec.evolve = [](const GlobalVar&, const Particle& p) { return std::vector<Particle>{p, p}; };
  EXPECT_THROW(step(two_particles(), spec, pmtest::domain1(0.0, 1.0)), ConstraintViolation);
}

TEST(Step, LatticeWalkSingleParticleMovesWithinCutoff) {
  Domain dom = pmtest::box(2, 0.0, 4.0);
  AlgorithmSpec spec = lattice_walk({"LatticeWalk", {{"seed", std::int64_t{9}}}}, dom, 1.0);
  Particle p;
  p.id = 3;
  p.x = {2.0, 2.0, 0.0, 0.0};
  p.props = zero_props(spec);
  State s = step(State{GlobalVar{1, 2, {}}, {p}}, spec, dom);
  ASSERT_EQ(s.particles.size(), 1u);
  EXPECT_NE(s.particles[0].x, p.x);
  EXPECT_TRUE(within_cutoff(s.particles[0].x, p.x, 1.0));
  EXPECT_EQ(s.g.t, 2);
}

TEST(Run, DoubleSwapRestores) {
  RunResult r = run(pmtest::swap_instance(3), exchange_spec());
  EXPECT_EQ(r.T, 3);
  EXPECT_EQ(h_of(r.final, 1), 10);
  EXPECT_EQ(h_of(r.final, 2), 4);
}

TEST(Run, TMaxOneIsIdentity) {
  Instance inst = pmtest::swap_instance(1);
  RunResult r = run(inst, exchange_spec());
  EXPECT_EQ(r.T, 1);
  EXPECT_EQ(r.final, inst.state);
}

TEST(Run, TraceAndGlobalPreservation) {
  RunResult r = run(pmtest::swap_instance(4), exchange_spec(), RunOptions{100, true});
  ASSERT_EQ(r.trace.size(), 4u);
  for (std::size_t i = 0; i < r.trace.size(); ++i) EXPECT_EQ(r.trace[i].g.t, static_cast<std::int64_t>(i + 1));
  // evolve_all never touches g
  AlgorithmSpec spec = exchange_spec();
  for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) {
    State mid{r.trace[i].g, interact_all(r.trace[i], spec)};
    EXPECT_EQ(evolve_all(mid, spec, pmtest::domain1(0.0, 1.0)).g, r.trace[i].g);
  }
}

TEST(Run, NonTerminationGuard) {
  AlgorithmSpec spec = exchange_spec();
  spec.stop = [](const GlobalVar&) { return false; };
  EXPECT_THROW(run(pmtest::swap_instance(), spec, RunOptions{5, false}), NonTermination);
}

TEST(Run, LatticeWalkStaysInDomain) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CellGrid grid = build_grid(pmtest::box(2, 0.0, 3.0), 1.0);
    Instance inst = random_instance({"LatticeWalk", {{"seed", static_cast<std::int64_t>(seed)}}}, seed, grid, 10, 21);
    RunResult r = run(inst, instantiate(inst));
    EXPECT_EQ(r.T, 21);
    for (const Particle& p : r.final.particles) EXPECT_TRUE(inst.domain.contains(p.x));
  }
}

TEST(Run, Deterministic) {
  CellGrid grid = build_grid(pmtest::box(2, 0.0, 3.0), 1.0);
  Instance inst = random_instance({"LatticeWalk", {{"seed", std::int64_t{4}}}}, 11, grid, 30, 8);
  EXPECT_EQ(run(inst, instantiate(inst)).final, run(inst, instantiate(inst)).final);
}

TEST(Instance, ValidationErrors) {
  Instance inst = pmtest::swap_instance();
  inst.state.particles[1].x[0] = 1.0;
  EXPECT_THROW(validate(inst), DomainError);
  inst = pmtest::swap_instance();
  inst.state.particles[1].id = 1;
  EXPECT_THROW(validate(inst), ConstraintViolation);
  inst = pmtest::swap_instance();
  inst.cutoff = 0.0;
  EXPECT_THROW(validate(inst), DomainError);
}

TEST(ChildId, DependsOnlyOnArguments) {
  EXPECT_EQ(child_id(5, 0, 3), child_id(5, 0, 3));
  EXPECT_NE(child_id(5, 0, 3), child_id(5, 1, 3));
  EXPECT_NE(child_id(5, 0, 3), child_id(5, 0, 4));
  EXPECT_LT(child_id(~0ULL, 7, 9), 1ULL << 63);
}
