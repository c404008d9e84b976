#pragma once

// Built-in particle methods and random instances for them.
//
// All three use a read/accumulate split: interact reads only current fields
// of the partner and writes only accumulator fields of the first particle;
// evolve folds the accumulators into the current fields and clears them.
// Motion, where there is any, is a pure function of (seed, id, t).

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pm/cell_grid.hpp"
#include "pm/core.hpp"

namespace pm {

inline const std::vector<std::string>& list_methods() {
  static const std::vector<std::string> names{"ExchangeDiffusion", "LatticeWalk", "SphDensity"};
  return names;
}

namespace exchange {
inline constexpr std::size_t kH = 0, kA = 1, kC = 2;
}
namespace walk {
inline constexpr std::size_t kNb = 0, kNbAcc = 1, kIdSum = 2, kIdSumAcc = 3;
}
namespace sph {
inline constexpr std::size_t kRho = 0, kRhoAcc = 1;
}

/// Uniform integer in [0, n) from a 64-bit engine, by rejection. Written out
/// so that instances do not depend on the standard library's distributions.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw UsageError("bounded_draw over an empty range");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    const std::uint64_t v = rng();
    if (v < limit) return v % n;
  }
}

namespace detail {

inline double real_param(const MethodParams& p, const std::string& key, double fallback) {
  auto it = p.values.find(key);
  return it == p.values.end() ? fallback : as_double(it->second);
}

inline std::int64_t int_param(const MethodParams& p, const std::string& key, std::int64_t fallback) {
  auto it = p.values.find(key);
  if (it == p.values.end()) return fallback;
  if (!is_integer(it->second)) throw InputError("parameter '" + key + "' of " + p.name + " must be an integer");
  return std::get<std::int64_t>(it->second);
}

inline void allow_only(const MethodParams& p, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : p.values) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) throw InputError("unknown parameter '" + k + "' for method " + p.name);
  }
}

inline std::int64_t& iprop(Particle& p, std::size_t i) { return std::get<std::int64_t>(p.props.at(i)); }
inline std::int64_t iprop(const Particle& p, std::size_t i) { return std::get<std::int64_t>(p.props.at(i)); }
inline double& rprop(Particle& p, std::size_t i) { return std::get<double>(p.props.at(i)); }
inline double rprop(const Particle& p, std::size_t i) { return std::get<double>(p.props.at(i)); }

/// Largest k with k^2 * d < 2^20, so a vector of d components k/1024 has
/// length strictly below one.
inline std::int64_t walk_kmax(int d) {
  std::int64_t k = 0;
  while ((k + 1) * (k + 1) * d < (std::int64_t{1} << 20)) ++k;
  return k;
}

/// Hash displacement of particle `id` during step t. Every component is
/// scale * k / 1024 with |k| <= walk_kmax(d), so |offset| < scale.
inline Position walk_offset(std::uint64_t seed, std::uint64_t id, std::int64_t t, int d, double scale) {
  Position off{};
  const std::int64_t kmax = walk_kmax(d);
  const auto span = static_cast<std::uint64_t>(2 * kmax + 1);
  for (int l = 0; l < d; ++l) {
    const std::uint64_t h = splitmix64(splitmix64(seed) ^ splitmix64(id + 0x632be59bd9b4e019ULL) ^
                                       splitmix64(static_cast<std::uint64_t>(t) * 8 + static_cast<std::uint64_t>(l)));
    const auto k = static_cast<std::int64_t>(h % span) - kmax;
    off[l] = scale * static_cast<double>(k) / 1024.0;
  }
  return off;
}

/// Moves x by off; a component that would leave the domain is reflected
/// (x - off), and left as is if that leaves the domain as well.
inline Position displace(const Position& x, const Position& off, const Domain& domain) {
  Position y = x;
  for (int l = 0; l < domain.d; ++l) {
    const double fwd = x[l] + off[l];
    const double back = x[l] - off[l];
    if (fwd >= domain.min[l] && fwd < domain.max[l])
      y[l] = fwd;
    else if (back >= domain.min[l] && back < domain.max[l])
      y[l] = back;
  }
  return y;
}

inline void common_time(AlgorithmSpec& s) {
  s.omega = [](const GlobalVar&, const Particle& k, const Particle& j) { return k.id != j.id; };
  s.stop = [](const GlobalVar& g) { return g.t >= g.t_max; };
  s.evolve_global = [](const GlobalVar& g) {
    GlobalVar n = g;
    n.t = g.t + 1;
    return n;
  };
}

}  // namespace detail

/// h: exchanged value, a: sum of partner values, c: partner count. One step
/// sets h to a - (c - 1) h, so two mutual neighbors swap their values.
inline AlgorithmSpec exchange_diffusion(const MethodParams& params, double cutoff) {
  detail::allow_only(params, {});
  AlgorithmSpec s;
  s.name = "ExchangeDiffusion";
  s.cutoff = cutoff;
  s.properties = {{"h", PropertyKind::Integer}, {"a", PropertyKind::Integer}, {"c", PropertyKind::Integer}};
  detail::common_time(s);
  s.interact = [](const GlobalVar&, const Particle& j, const Particle& k) {
    Particle out = j;
    detail::iprop(out, exchange::kA) = wrapping_add(detail::iprop(j, exchange::kA), detail::iprop(k, exchange::kH));
    detail::iprop(out, exchange::kC) = wrapping_add(detail::iprop(j, exchange::kC), 1);
    return out;
  };
  s.evolve = [](const GlobalVar&, const Particle& p) {
    Particle out = p;
    const std::int64_t h = detail::iprop(p, exchange::kH);
    const std::int64_t a = detail::iprop(p, exchange::kA);
    const std::int64_t c = detail::iprop(p, exchange::kC);
    detail::iprop(out, exchange::kH) = wrapping_add(h, wrapping_sub(a, wrapping_mul(c, h)));
    detail::iprop(out, exchange::kA) = 0;
    detail::iprop(out, exchange::kC) = 0;
    return std::vector<Particle>{std::move(out)};
  };
  return s;
}

/// Counts neighbors and sums their ids, then takes a hashed step of length
/// below step_fraction * r_c.
inline AlgorithmSpec lattice_walk(const MethodParams& params, const Domain& domain, double cutoff) {
  detail::allow_only(params, {"seed", "step_fraction"});
  const auto seed = static_cast<std::uint64_t>(detail::int_param(params, "seed", 0));
  const double fraction = detail::real_param(params, "step_fraction", 1.0);
  if (!(fraction > 0.0) || !std::isfinite(fraction)) throw InputError("LatticeWalk step_fraction must be positive");
  AlgorithmSpec s;
  s.name = "LatticeWalk";
  s.cutoff = cutoff;
  s.properties = {{"nb", PropertyKind::Integer},
                  {"nb_acc", PropertyKind::Integer},
                  {"idsum", PropertyKind::Integer},
                  {"idsum_acc", PropertyKind::Integer}};
  detail::common_time(s);
  s.interact = [](const GlobalVar&, const Particle& j, const Particle& k) {
    Particle out = j;
    detail::iprop(out, walk::kNbAcc) = wrapping_add(detail::iprop(j, walk::kNbAcc), 1);
    detail::iprop(out, walk::kIdSumAcc) =
        wrapping_add(detail::iprop(j, walk::kIdSumAcc), static_cast<std::int64_t>(k.id));
    return out;
  };
  const double scale = cutoff * fraction;
  s.evolve = [seed, scale, domain](const GlobalVar& g, const Particle& p) {
    Particle out = p;
    detail::iprop(out, walk::kNb) = detail::iprop(p, walk::kNbAcc);
    detail::iprop(out, walk::kIdSum) = detail::iprop(p, walk::kIdSumAcc);
    detail::iprop(out, walk::kNbAcc) = 0;
    detail::iprop(out, walk::kIdSumAcc) = 0;
    out.x = detail::displace(p.x, detail::walk_offset(seed, p.id, g.t, domain.d, scale), domain);
    return std::vector<Particle>{std::move(out)};
  };
  return s;
}

/// Kernel density rho = sum m (1 - r/r_c)^2 over neighbors. Stationary unless
/// speed > 0, in which case particles walk with step below speed * r_c.
inline AlgorithmSpec sph_density(const MethodParams& params, const Domain& domain, double cutoff) {
  detail::allow_only(params, {"mass", "speed", "seed"});
  const double mass = detail::real_param(params, "mass", 1.0);
  const double speed = detail::real_param(params, "speed", 0.0);
  const auto seed = static_cast<std::uint64_t>(detail::int_param(params, "seed", 0));
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw InputError("SphDensity mass must be non-negative");
  if (!(speed >= 0.0 && speed <= 1.0)) throw InputError("SphDensity speed must lie in [0, 1]");
  AlgorithmSpec s;
  s.name = "SphDensity";
  s.cutoff = cutoff;
  s.properties = {{"rho", PropertyKind::Real}, {"rho_acc", PropertyKind::Real}};
  detail::common_time(s);
  s.interact = [mass, cutoff](const GlobalVar&, const Particle& j, const Particle& k) {
    Particle out = j;
    const double q = 1.0 - std::sqrt(squared_distance(j.x, k.x)) / cutoff;
    detail::rprop(out, sph::kRhoAcc) = detail::rprop(j, sph::kRhoAcc) + mass * q * q;
    return out;
  };
  const double scale = cutoff * speed;
  s.evolve = [seed, scale, domain](const GlobalVar& g, const Particle& p) {
    Particle out = p;
    detail::rprop(out, sph::kRho) = detail::rprop(p, sph::kRhoAcc);
    detail::rprop(out, sph::kRhoAcc) = 0.0;
    if (scale > 0.0) out.x = detail::displace(p.x, detail::walk_offset(seed, p.id, g.t, domain.d, scale), domain);
    return std::vector<Particle>{std::move(out)};
  };
  return s;
}

inline AlgorithmSpec instantiate(const MethodParams& params, const Domain& domain, double cutoff) {
  if (params.name == "ExchangeDiffusion") return exchange_diffusion(params, cutoff);
  if (params.name == "LatticeWalk") return lattice_walk(params, domain, cutoff);
  if (params.name == "SphDensity") return sph_density(params, domain, cutoff);
  throw InputError("unknown method '" + params.name + "'");
}

inline AlgorithmSpec instantiate(const Instance& inst) { return instantiate(inst.method, inst.domain, inst.cutoff); }

/// Zeroed property vector matching a spec's layout.
inline std::vector<Scalar> zero_props(const AlgorithmSpec& spec) {
  std::vector<Scalar> props;
  for (const PropertyDesc& d : spec.properties)
    props.push_back(d.kind == PropertyKind::Integer ? Scalar{std::int64_t{0}} : Scalar{0.0});
  return props;
}

/// n particles with ids 0..n-1 and positions D_min + extent * k / 2^20,
/// drawn from mt19937_64(seed). ExchangeDiffusion gets h in [-1000, 1000].
inline Instance random_instance(const MethodParams& params, std::uint64_t seed, const CellGrid& grid, std::size_t n,
                                std::int64_t t_max = 1) {
  const AlgorithmSpec spec = instantiate(params, grid.domain, grid.cutoff);
  Instance inst;
  inst.domain = grid.domain;
  inst.cutoff = grid.cutoff;
  inst.method = params;
  inst.state.g = GlobalVar{1, t_max, {}};
  std::mt19937_64 rng(seed);
  constexpr std::uint64_t kRes = std::uint64_t{1} << 20;
  for (std::size_t i = 0; i < n; ++i) {
    Particle p;
    p.id = i;
    for (int l = 0; l < grid.d(); ++l) {
      const double lo = grid.domain.min[l], ext = grid.domain.max[l] - grid.domain.min[l];
      do {
        p.x[l] = lo + ext * (static_cast<double>(bounded_draw(rng, kRes)) / static_cast<double>(kRes));
      } while (!(p.x[l] < grid.domain.max[l]));
    }
    p.props = zero_props(spec);
    if (params.name == "ExchangeDiffusion")
      p.props[exchange::kH] = static_cast<std::int64_t>(bounded_draw(rng, 2001)) - 1000;
    inst.state.particles.push_back(std::move(p));
  }
  return inst;
}

}  // namespace pm
