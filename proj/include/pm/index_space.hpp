#pragma once

// Scalar <-> vector index translation over a box of cells, and the
// checkerboard addressing built on it. All indices here are 1-based, as in
// the mathematical definitions: cells 1..N_cell, compartments 1..3^d,
// checkerboard patterns 1..3^d.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "pm/core.hpp"

namespace pm {

struct IndexVec {
  std::array<std::int64_t, kMaxDim> c{};
  int d = 0;

  IndexVec() = default;
  explicit IndexVec(int dim) : d(dim) {}
  IndexVec(std::initializer_list<std::int64_t> values) : d(static_cast<int>(values.size())) {
    if (d > kMaxDim) throw IndexError("index vector longer than kMaxDim");
    int l = 0;
    for (std::int64_t v : values) c[l++] = v;
  }

  std::int64_t& operator[](int l) { return c[l]; }
  std::int64_t operator[](int l) const { return c[l]; }

  static IndexVec filled(int dim, std::int64_t value) {
    IndexVec v(dim);
    for (int l = 0; l < dim; ++l) v.c[l] = value;
    return v;
  }

  friend bool operator==(const IndexVec&, const IndexVec&) = default;
};

inline std::string to_string(const IndexVec& v) {
  std::string s = "(";
  for (int l = 0; l < v.d; ++l) s += (l ? "," : "") + std::to_string(v[l]);
  return s + ")";
}

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw IndexError("index arithmetic overflow");
  return r;
}
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw IndexError("index arithmetic overflow");
  return r;
}

}  // namespace detail

/// Number of cells along each dimension, with cached prefix products
/// prefix[l] = I_1 * ... * I_l (prefix[0] = 1).
class GridDims {
 public:
  GridDims() = default;
  explicit GridDims(const IndexVec& extents) : extents_(extents) {
    if (extents.d < 1 || extents.d > kMaxDim) throw IndexError("grid dimension out of range");
    prefix_[0] = 1;
    for (int l = 0; l < extents.d; ++l) {
      if (extents[l] < 1) throw IndexError("grid extents must be positive");
      prefix_[l + 1] = detail::checked_mul(prefix_[l], extents[l]);
    }
    small_ = prefix_[extents.d] <= static_cast<std::int64_t>(UINT32_MAX);
  }
  GridDims(std::initializer_list<std::int64_t> extents) : GridDims(IndexVec(extents)) {}

  int d() const { return extents_.d; }
  std::int64_t operator[](int l) const { return extents_[l]; }
  const IndexVec& extents() const { return extents_; }
  std::int64_t count() const { return prefix_[extents_.d]; }
  std::int64_t prefix(int l) const { return prefix_[l]; }

  /// floor(n / prefix(l)) for 0 <= n < count().
  std::int64_t floor_div_prefix(std::int64_t n, int l) const {
    if (small_) return static_cast<std::uint32_t>(n) / static_cast<std::uint32_t>(prefix_[l]);
    return n / prefix_[l];
  }

  bool contains(const IndexVec& v) const {
    if (v.d != d()) return false;
    for (int l = 0; l < d(); ++l)
      if (v[l] < 1 || v[l] > extents_[l]) return false;
    return true;
  }

  friend bool operator==(const GridDims& a, const GridDims& b) { return a.extents_ == b.extents_; }

 private:
  IndexVec extents_;
  std::array<std::int64_t, kMaxDim + 1> prefix_{};
  bool small_ = true;
};

/// The 3 x ... x 3 box used to number compartments and checkerboard patterns.
inline const GridDims& cube3(int d) {
  static const std::array<GridDims, kMaxDim + 1> cubes = [] {
    std::array<GridDims, kMaxDim + 1> out{};
    for (int dim = 1; dim <= kMaxDim; ++dim) out[dim] = GridDims(IndexVec::filled(dim, 3));
    return out;
  }();
  if (d < 1 || d > kMaxDim) throw IndexError("dimension out of range");
  return cubes[d];
}

inline std::int64_t pow3(int d) {
  std::int64_t r = 1;
  for (int l = 0; l < d; ++l) r *= 3;
  return r;
}

/// Compartment number of the owned cell, (3^d + 1) / 2.
inline std::int64_t center_compartment(int d) { return (pow3(d) + 1) / 2; }

// ---------------------------------------------------------------------------
// translation

/// Scalar index j in 1..N to its vector index: component l is
/// floor((j-1)/P_{l-1}) - floor((j-1)/P_l) * I_l + 1, the last one
/// floor((j-1)/P_{d-1}) + 1.
inline IndexVec to_vec(std::int64_t j, const GridDims& dims) {
  if (j < 1 || j > dims.count())
    throw IndexError("scalar index " + std::to_string(j) + " outside 1.." + std::to_string(dims.count()));
  const int d = dims.d();
  IndexVec v(d);
  const std::int64_t n = j - 1;
  std::int64_t lower = n;  // floor(n / P_{l-1})
  for (int l = 0; l < d; ++l) {
    if (l + 1 < d) {
      const std::int64_t upper = dims.floor_div_prefix(n, l + 1);
      v[l] = lower - upper * dims[l] + 1;
      lower = upper;
    } else {
      v[l] = lower + 1;
    }
  }
  return v;
}

/// Vector index to scalar index: 1 + sum_l (v_l - 1) * P_{l-1}.
inline std::int64_t to_scalar(const IndexVec& v, const GridDims& dims) {
  if (!dims.contains(v))
    throw IndexError("vector index " + to_string(v) + " outside the grid " + to_string(dims.extents()));
  std::int64_t j = 1;
  for (int l = 0; l < dims.d(); ++l) j += (v[l] - 1) * dims.prefix(l);
  return j;
}

// ---------------------------------------------------------------------------
// checkerboard

struct CheckerboardPattern {
  IndexVec active_dims;  // may contain zeros for thin grids
  std::int64_t active_count = 0;
};

/// Active cells per dimension for pattern k: floor((I - iota3(k) + 3) / 3).
inline CheckerboardPattern checkerboard_dims(std::int64_t k, const GridDims& dims) {
  const int d = dims.d();
  if (k < 1 || k > pow3(d)) throw IndexError("checkerboard pattern " + std::to_string(k) + " out of range");
  const IndexVec offset = to_vec(k, cube3(d));
  CheckerboardPattern p{IndexVec(d), 1};
  for (int l = 0; l < d; ++l) {
    p.active_dims[l] = (dims[l] - offset[l] + 3) / 3;  // numerator >= 1, so this is floor
    p.active_count = detail::checked_mul(p.active_count, p.active_dims[l]);
  }
  return p;
}

/// gamma(k, j): the j-th active process of pattern k,
/// iota^{-1}( iota^{kI*}(j) * 3 + iota3(k) - 3 ).
inline std::int64_t active_process(std::int64_t k, std::int64_t j, const GridDims& dims) {
  const CheckerboardPattern p = checkerboard_dims(k, dims);
  if (j < 1 || j > p.active_count)
    throw IndexError("active index " + std::to_string(j) + " out of range for pattern " + std::to_string(k));
  const int d = dims.d();
  const IndexVec local = to_vec(j, GridDims(p.active_dims));
  const IndexVec offset = to_vec(k, cube3(d));
  IndexVec cell(d);
  for (int l = 0; l < d; ++l) cell[l] = local[l] * 3 + offset[l] - 3;
  return to_scalar(cell, dims);
}

/// beta(t, l): the l-th neighbor cell of process t, iota^{-1}(iota(t) + iota3(l) - 2),
/// or nothing when that cell lies outside the grid.
inline std::optional<std::int64_t> neighbor_process(std::int64_t t, std::int64_t l, const GridDims& dims) {
  const int d = dims.d();
  if (l < 1 || l > pow3(d)) throw IndexError("neighbor slot " + std::to_string(l) + " out of range");
  const IndexVec cell = to_vec(t, dims);
  const IndexVec offset = to_vec(l, cube3(d));
  IndexVec target(d);
  for (int m = 0; m < d; ++m) {
    target[m] = cell[m] + offset[m] - 2;
    if (target[m] < 1 || target[m] > dims[m]) return std::nullopt;
  }
  return to_scalar(target, dims);
}

/// Compartment facing the opposite way: iota3^{-1}(4 - iota3(l)).
inline std::int64_t mirror_compartment(std::int64_t l, int d) {
  const IndexVec v = to_vec(l, cube3(d));
  IndexVec m(d);
  for (int q = 0; q < d; ++q) m[q] = 4 - v[q];
  return to_scalar(m, cube3(d));
}

/// Compartment of a particle in cell `cell0` (0-based cell coordinates, i.e.
/// floor((x - D_min)/r_c)) as seen from process w:
/// iota3^{-1}(cell0 - iota(w) + 3). Throws when the particle is not in w's
/// 3^d neighborhood.
inline std::int64_t compartment_of_cell(const IndexVec& cell0, std::int64_t w, const GridDims& dims) {
  const int d = dims.d();
  const IndexVec own = to_vec(w, dims);
  IndexVec a(d);
  for (int l = 0; l < d; ++l) {
    a[l] = cell0[l] - own[l] + 3;
    if (a[l] < 1 || a[l] > 3)
      throw ConstraintViolation("compartment index " + std::to_string(a[l]) + " outside 1..3 in dimension " +
                                std::to_string(l + 1) + " for process " + std::to_string(w) +
                                " (particle moved farther than one cell)");
  }
  return to_scalar(a, cube3(d));
}

// ---------------------------------------------------------------------------

/// The checkerboard topology of a cell grid: pattern sizes, gamma and beta.
/// Runtime and verification code is templated on this interface so that
/// tests can substitute a deliberately broken topology.
class CheckerboardTopology {
 public:
  explicit CheckerboardTopology(GridDims dims) : dims_(std::move(dims)) {
    const int d = dims_.d();
    const std::int64_t patterns = pow3(d);
    for (std::int64_t k = 1; k <= patterns; ++k) {
      const CheckerboardPattern p = checkerboard_dims(k, dims_);
      counts_.push_back(p.active_count);
      active_dims_.push_back(p.active_count > 0 ? std::optional<GridDims>(GridDims(p.active_dims)) : std::nullopt);
      offsets_.push_back(to_vec(k, cube3(d)));
    }
    // small grids get a precomputed beta table (0 marks an absent neighbor)
    const std::int64_t n = dims_.count();
    if (n <= kTableLimit / patterns) {
      table_.resize(static_cast<std::size_t>(n * patterns));
      for (std::int64_t t = 1; t <= n; ++t) {
        const IndexVec cell = to_vec(t, dims_);
        for (std::int64_t l = 1; l <= patterns; ++l)
          table_[static_cast<std::size_t>((t - 1) * patterns + (l - 1))] = compute_neighbor(cell, l).value_or(0);
      }
    }
  }

  const GridDims& dims() const { return dims_; }
  int d() const { return dims_.d(); }
  std::int64_t cells() const { return dims_.count(); }
  std::int64_t compartments() const { return static_cast<std::int64_t>(counts_.size()); }
  std::int64_t pattern_size(std::int64_t k) const { return counts_.at(static_cast<std::size_t>(k - 1)); }

  /// gamma(k, j).
  std::int64_t active(std::int64_t k, std::int64_t j) const {
    const auto i = static_cast<std::size_t>(k - 1);
    if (j < 1 || j > counts_.at(i)) throw IndexError("active index out of range");
    const IndexVec local = to_vec(j, *active_dims_[i]);
    const IndexVec& offset = offsets_[i];
    IndexVec cell(d());
    for (int l = 0; l < d(); ++l) cell[l] = local[l] * 3 + offset[l] - 3;
    return to_scalar(cell, dims_);
  }

  /// beta(t, l).
  std::optional<std::int64_t> neighbor(std::int64_t t, std::int64_t l) const {
    if (l < 1 || l > compartments()) throw IndexError("neighbor slot " + std::to_string(l) + " out of range");
    if (!table_.empty()) {
      if (t < 1 || t > cells()) throw IndexError("process " + std::to_string(t) + " out of range");
      const std::int64_t v = table_[static_cast<std::size_t>((t - 1) * compartments() + (l - 1))];
      return v ? std::optional<std::int64_t>(v) : std::nullopt;
    }
    return compute_neighbor(to_vec(t, dims_), l);
  }

 private:
  static constexpr std::int64_t kTableLimit = std::int64_t{1} << 22;

  std::optional<std::int64_t> compute_neighbor(const IndexVec& cell, std::int64_t l) const {
    const IndexVec& offset = offsets_[static_cast<std::size_t>(l - 1)];
    IndexVec target(d());
    for (int m = 0; m < d(); ++m) {
      target[m] = cell[m] + offset[m] - 2;
      if (target[m] < 1 || target[m] > dims_[m]) return std::nullopt;
    }
    return to_scalar(target, dims_);
  }

  GridDims dims_;
  std::vector<std::int64_t> counts_;
  std::vector<std::optional<GridDims>> active_dims_;
  std::vector<IndexVec> offsets_;  // iota3(k), shared by patterns and neighbor slots
  std::vector<std::int64_t> table_;
};

}  // namespace pm
