#pragma once

// The sequential reference interpreter: neighborhood, interact over all
// particles, evolve over all particles, the state transition step and the
// state transition function. Particle indices are 1-based.

#include <cstddef>
#include <string>
#include <vector>

#include "pm/core.hpp"

namespace pm {

/// u([g, p], j): every k in tuple order with |x_k - x_j| <= r_c and
/// Omega(g, p_k, p_j).
inline std::vector<std::size_t> neighborhood(const GlobalVar& g, const std::vector<Particle>& particles,
                                             std::size_t j, const AlgorithmSpec& spec) {
  if (j < 1 || j > particles.size())
    throw IndexError("particle index " + std::to_string(j) + " outside 1.." + std::to_string(particles.size()));
  const Particle& pj = particles[j - 1];
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < particles.size(); ++k) {
    const Particle& pk = particles[k];
    if (within_cutoff(pk.x, pj.x, spec.cutoff) && spec.omega(g, pk, pj)) out.push_back(k + 1);
  }
  return out;
}

inline std::vector<std::size_t> neighborhood(const State& state, std::size_t j, const AlgorithmSpec& spec) {
  return neighborhood(state.g, state.particles, j, spec);
}

/// One interaction fold of p_j over its neighborhood, applied in place.
/// Only entry j of the tuple can change.
inline void interact_one(const GlobalVar& g, std::vector<Particle>& particles, std::size_t j,
                         const AlgorithmSpec& spec) {
  for (std::size_t k : neighborhood(g, particles, j, spec)) particles[j - 1] = spec.interact(g, particles[j - 1], particles[k - 1]);
}

/// Interaction of all particles with all their neighbors, folding j = 1..|p|
/// over the tuple as it is being updated.
inline std::vector<Particle> interact_all(const State& state, const AlgorithmSpec& spec) {
  std::vector<Particle> p = state.particles;
  for (std::size_t j = 1; j <= p.size(); ++j) interact_one(state.g, p, j, spec);
  return p;
}

/// Concatenation of e(g, p_j) over the tuple. The global variable is
/// untouched; every resulting particle has to stay inside the domain.
inline State evolve_all(const State& state, const AlgorithmSpec& spec, const Domain& domain) {
  State out{state.g, {}};
  out.particles.reserve(state.particles.size());
  for (const Particle& p : state.particles) {
    for (Particle& q : spec.evolve(state.g, p)) {
      if (!domain.contains(q.x))
        throw ConstraintViolation("particle " + std::to_string(q.id) + " left the domain at step t=" +
                                  std::to_string(state.g.t));
      out.particles.push_back(std::move(q));
    }
  }
  return out;
}

/// s([g, p]) = [e_g(g), evolve_all(interact_all(p))].
inline State step(const State& state, const AlgorithmSpec& spec, const Domain& domain) {
  if (spec.stop(state.g)) throw UsageError("step called on a state whose stopping condition already holds");
  State next = evolve_all(State{state.g, interact_all(state, spec)}, spec, domain);
  require_unique_ids(next.particles);
  next.g = spec.evolve_global(state.g);
  return next;
}

struct RunOptions {
  std::int64_t max_steps = 10'000'000;
  bool keep_trace = false;
};

struct RunResult {
  State final;
  std::int64_t T = 1;          // number of states visited, including the initial one
  std::vector<State> trace;    // all visited states when requested
};

/// Applies step until the stopping condition holds.
inline RunResult run(const State& initial, const AlgorithmSpec& spec, const Domain& domain, const RunOptions& opts = {}) {
  RunResult r{initial, 1, {}};
  if (opts.keep_trace) r.trace.push_back(initial);
  while (!spec.stop(r.final.g)) {
    if (r.T > opts.max_steps)
      throw NonTermination("stopping condition not reached after " + std::to_string(opts.max_steps) + " steps");
    r.final = step(r.final, spec, domain);
    ++r.T;
    if (opts.keep_trace) r.trace.push_back(r.final);
  }
  return r;
}

inline RunResult run(const Instance& inst, const AlgorithmSpec& spec, const RunOptions& opts = {}) {
  validate(inst);
  return run(inst.state, spec, inst.domain, opts);
}

}  // namespace pm
