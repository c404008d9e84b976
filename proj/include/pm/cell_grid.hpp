#pragma once

// Cell grid of side r_c over the domain, particle-to-cell assignment and the
// initial distributed state (one process per cell, 3^d compartments each).

#include <cmath>
#include <string>
#include <vector>

#include "pm/core.hpp"
#include "pm/index_space.hpp"

namespace pm {

struct CellGrid {
  Domain domain;
  double cutoff = 1.0;
  GridDims dims;

  int d() const { return domain.d; }
  std::int64_t n_cell() const { return dims.count(); }
  std::int64_t compartments() const { return pow3(d()); }
  std::int64_t center() const { return center_compartment(d()); }

  friend bool operator==(const CellGrid&, const CellGrid&) = default;
};

/// I = floor((D_max - D_min) / r_c + 1).
inline CellGrid build_grid(const Domain& domain, double cutoff) {
  domain.validate();
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw DomainError("cutoff radius must be positive");
  IndexVec extents(domain.d);
  for (int l = 0; l < domain.d; ++l) {
    const double cells = std::floor((domain.max[l] - domain.min[l]) / cutoff + 1.0);
    if (!(cells >= 1.0) || cells > 9.0e15) throw DomainError("cell count along a dimension is not representable");
    extents[l] = static_cast<std::int64_t>(cells);
  }
  return CellGrid{domain, cutoff, GridDims(extents)};
}

/// 0-based cell coordinates floor((x - D_min) / r_c).
inline IndexVec cell_coords(const Position& x, const CellGrid& grid) {
  if (!grid.domain.contains(x)) throw DomainError("position outside [D_min, D_max)");
  IndexVec c(grid.d());
  for (int l = 0; l < grid.d(); ++l) {
    c[l] = static_cast<std::int64_t>(std::floor((x[l] - grid.domain.min[l]) / grid.cutoff));
    if (c[l] < 0 || c[l] >= grid.dims[l]) throw DomainError("cell coordinate outside the grid");
  }
  return c;
}

/// w = iota^{-1}(floor((x - D_min) / r_c) + 1).
inline std::int64_t cell_of(const Position& x, const CellGrid& grid) {
  IndexVec c = cell_coords(x, grid);
  for (int l = 0; l < grid.d(); ++l) c[l] += 1;
  return to_scalar(c, grid.dims);
}

/// alpha: compartment of position x in the storage of process w.
inline std::int64_t compartment_of(const Position& x, std::int64_t w, const CellGrid& grid) {
  return compartment_of_cell(cell_coords(x, grid), w, grid.dims);
}

// ---------------------------------------------------------------------------
// distributed storage

using Compartment = std::vector<Particle>;

struct ProcessStorage {
  std::vector<Compartment> compartments;  // 3^d entries, slot (3^d+1)/2 is the owned cell

  ProcessStorage() = default;
  explicit ProcessStorage(int d) : compartments(static_cast<std::size_t>(pow3(d))) {}

  /// 1-based compartment access.
  Compartment& at(std::int64_t l) { return compartments.at(static_cast<std::size_t>(l - 1)); }
  const Compartment& at(std::int64_t l) const { return compartments.at(static_cast<std::size_t>(l - 1)); }
  Compartment& center() { return compartments[compartments.size() / 2]; }
  const Compartment& center() const { return compartments[compartments.size() / 2]; }

  friend bool operator==(const ProcessStorage&, const ProcessStorage&) = default;
};

/// [G, P]: one global-variable copy and one storage per process.
struct DistributedState {
  std::vector<GlobalVar> globals;
  std::vector<ProcessStorage> storages;

  std::size_t processes() const { return storages.size(); }
  ProcessStorage& storage(std::int64_t w) { return storages.at(static_cast<std::size_t>(w - 1)); }
  const ProcessStorage& storage(std::int64_t w) const { return storages.at(static_cast<std::size_t>(w - 1)); }

  friend bool operator==(const DistributedState&, const DistributedState&) = default;
};

inline DistributedState empty_distributed_state(const GlobalVar& g, const CellGrid& grid) {
  DistributedState s;
  const auto n = static_cast<std::size_t>(grid.n_cell());
  s.globals.assign(n, g);
  s.storages.assign(n, ProcessStorage(grid.d()));
  return s;
}

/// Puts every particle into the center compartment of the process owning its
/// cell, preserving tuple order within a cell. All global copies equal g^1.
inline DistributedState distribute_initial(const State& state, const CellGrid& grid) {
  DistributedState s = empty_distributed_state(state.g, grid);
  for (const Particle& p : state.particles) s.storage(cell_of(p.x, grid)).center().push_back(p);
  return s;
}

inline DistributedState distribute_initial(const Instance& inst, const CellGrid& grid) {
  validate(inst);
  return distribute_initial(inst.state, grid);
}

/// Concatenation of all center compartments in process order, with the
/// first process's global variable.
inline State gather_centers(const DistributedState& s) {
  State out;
  if (!s.globals.empty()) out.g = s.globals.front();
  for (const ProcessStorage& st : s.storages)
    out.particles.insert(out.particles.end(), st.center().begin(), st.center().end());
  return out;
}

}  // namespace pm
