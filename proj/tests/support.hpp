#pragma once

#include <cstdint>
#include <initializer_list>

#include "pm/pm.hpp"

namespace pmtest {

inline pm::Domain domain1(double lo, double hi) {
  pm::Domain d;
  d.d = 1;
  d.min[0] = lo;
  d.max[0] = hi;
  return d;
}

inline pm::Domain box(int dim, double lo, double hi) {
  pm::Domain d;
  d.d = dim;
  for (int l = 0; l < dim; ++l) {
    d.min[l] = lo;
    d.max[l] = hi;
  }
  return d;
}

inline pm::Particle exchange_particle(std::uint64_t id, std::initializer_list<double> x, std::int64_t h) {
  pm::Particle p;
  p.id = id;
  int l = 0;
  for (double v : x) p.x[l++] = v;
  p.props = {h, std::int64_t{0}, std::int64_t{0}};
  return p;
}

/// Two mutual neighbors with h = (10, 4) on [0, 1), r_c = 1, so the grid is I = (2).
inline pm::Instance swap_instance(std::int64_t t_max = 2) {
  pm::Instance inst;
  inst.domain = domain1(0.0, 1.0);
  inst.cutoff = 1.0;
  inst.method.name = "ExchangeDiffusion";
  inst.state.g = pm::GlobalVar{1, t_max, {}};
  inst.state.particles = {exchange_particle(1, {0.25}, 10), exchange_particle(2, {0.75}, 4)};
  return inst;
}

inline std::int64_t h_of(const pm::State& s, std::uint64_t id) {
  for (const pm::Particle& p : s.particles)
    if (p.id == id) return std::get<std::int64_t>(p.props[pm::exchange::kH]);
  return INT64_MIN;
}

}  // namespace pmtest
