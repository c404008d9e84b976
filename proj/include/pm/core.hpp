#pragma once

// Value types shared by both interpreters: particles, the global variable,
// the algorithm description and the sequential state.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

namespace pm {

inline constexpr int kMaxDim = 4;

// ---------------------------------------------------------------------------
// errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IndexError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct ConstraintViolation : Error {
  using Error::Error;
};
struct UsageError : Error {
  using Error::Error;
};
struct NonTermination : Error {
  using Error::Error;
};
// malformed or inconsistent user input: instance files, method parameters
struct InputError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// scalars

/// A particle property or global extra: either an exact integer or a double.
using Scalar = std::variant<std::int64_t, double>;

inline bool is_integer(const Scalar& s) { return std::holds_alternative<std::int64_t>(s); }

inline double as_double(const Scalar& s) {
  return is_integer(s) ? static_cast<double>(std::get<std::int64_t>(s)) : std::get<double>(s);
}

/// Equality on the bit pattern, so that 0.0 and -0.0 differ and NaN == NaN.
inline bool bit_equal(const Scalar& a, const Scalar& b) {
  if (a.index() != b.index()) return false;
  if (is_integer(a)) return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
  return std::bit_cast<std::uint64_t>(std::get<double>(a)) ==
         std::bit_cast<std::uint64_t>(std::get<double>(b));
}

/// Two's-complement wrapping addition; exact methods use it so that every
/// summation order produces the same bits.
inline std::int64_t wrapping_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
inline std::int64_t wrapping_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}
inline std::int64_t wrapping_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}

inline std::string to_string(const Scalar& s) {
  if (is_integer(s)) return std::to_string(std::get<std::int64_t>(s));
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(s));
  return buf;
}

// ---------------------------------------------------------------------------
// particles and global variable

/// Unused trailing components stay zero, so distances never depend on d.
using Position = std::array<double, kMaxDim>;

struct Particle {
  std::uint64_t id = 0;
  Position x{};
  std::vector<Scalar> props;

  friend bool operator==(const Particle&, const Particle&) = default;
};

struct GlobalVar {
  std::int64_t t = 1;
  std::int64_t t_max = 1;
  std::map<std::string, Scalar> extras;

  friend bool operator==(const GlobalVar&, const GlobalVar&) = default;
};

inline double squared_distance(const Position& a, const Position& b) {
  double s = 0.0;
  for (int l = 0; l < kMaxDim; ++l) {
    const double diff = a[l] - b[l];
    s += diff * diff;
  }
  return s;
}

/// |a - b| <= r_c, evaluated on squares. Every neighborhood and movement test
/// in the library goes through this one predicate.
inline bool within_cutoff(const Position& a, const Position& b, double r_c) {
  return squared_distance(a, b) <= r_c * r_c;
}

// ---------------------------------------------------------------------------
// hashing

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Id for the ordinal-th particle created by `parent` during step t. Depends
/// only on its arguments, so both interpreters assign identical ids.
inline std::uint64_t child_id(std::uint64_t parent, std::uint64_t ordinal, std::int64_t t) {
  const std::uint64_t h =
      splitmix64(splitmix64(parent) ^ splitmix64(ordinal + 0x51ed270b27c3ULL) ^
                 static_cast<std::uint64_t>(t) * 0x2545f4914f6cdd1dULL);
  return h >> 1;  // keep ids in the non-negative int64 range for JSON
}

// ---------------------------------------------------------------------------
// domain

struct Domain {
  int d = 1;
  Position min{};
  Position max{};

  bool contains(const Position& x) const {
    for (int l = 0; l < d; ++l)
      if (!(x[l] >= min[l] && x[l] < max[l])) return false;
    for (int l = d; l < kMaxDim; ++l)
      if (x[l] != 0.0) return false;
    return true;
  }

  void validate() const {
    if (d < 1 || d > kMaxDim) throw DomainError("dimension must be in 1.." + std::to_string(kMaxDim));
    for (int l = 0; l < d; ++l) {
      if (!std::isfinite(min[l]) || !std::isfinite(max[l]) || !(min[l] < max[l]))
        throw DomainError("domain bounds must satisfy min < max in every dimension");
    }
  }

  friend bool operator==(const Domain&, const Domain&) = default;
};

// ---------------------------------------------------------------------------
// algorithm

enum class PropertyKind { Integer, Real };

struct PropertyDesc {
  std::string name;
  PropertyKind kind = PropertyKind::Integer;
};

/// A particle method: cutoff radius plus Omega generate the neighborhood
/// function; interact returns the updated first particle only (pull form);
/// evolve returns particles but never a global variable.
struct AlgorithmSpec {
  std::string name;
  double cutoff = 1.0;
  std::vector<PropertyDesc> properties;

  std::function<bool(const GlobalVar&, const Particle& k, const Particle& j)> omega;
  std::function<bool(const GlobalVar&)> stop;
  std::function<Particle(const GlobalVar&, const Particle& j, const Particle& k)> interact;
  std::function<std::vector<Particle>(const GlobalVar&, const Particle&)> evolve;
  std::function<GlobalVar(const GlobalVar&)> evolve_global;

  std::size_t property_index(const std::string& prop) const {
    for (std::size_t i = 0; i < properties.size(); ++i)
      if (properties[i].name == prop) return i;
    throw Error("unknown property '" + prop + "' for method " + name);
  }

  bool exact() const {
    return std::ranges::all_of(properties, [](const PropertyDesc& p) { return p.kind == PropertyKind::Integer; });
  }
};

// ---------------------------------------------------------------------------
// state and instance

struct State {
  GlobalVar g;
  std::vector<Particle> particles;

  friend bool operator==(const State&, const State&) = default;
};

struct MethodParams {
  std::string name;
  std::map<std::string, Scalar> values;

  friend bool operator==(const MethodParams&, const MethodParams&) = default;
};

struct Instance {
  Domain domain;
  double cutoff = 1.0;
  MethodParams method;
  State state;

  friend bool operator==(const Instance&, const Instance&) = default;
};

inline void require_unique_ids(const std::vector<Particle>& particles) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(particles.size());
  for (const Particle& p : particles)
    if (!seen.insert(p.id).second)
      throw ConstraintViolation("duplicate particle id " + std::to_string(p.id));
}

inline void validate(const Instance& inst) {
  inst.domain.validate();
  if (!(inst.cutoff > 0.0) || !std::isfinite(inst.cutoff)) throw DomainError("cutoff must be positive");
  if (inst.state.g.t < 1) throw DomainError("global t must be >= 1");
  for (const Particle& p : inst.state.particles)
    if (!inst.domain.contains(p.x))
      throw DomainError("particle " + std::to_string(p.id) + " lies outside [D_min, D_max)");
  require_unique_ids(inst.state.particles);
}

}  // namespace pm
