#pragma once

// Time-complexity bounds of both interpreters and the speedup models built on
// them. Work counts (Xi) are exact integers; everything else is double.

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "pm/core.hpp"
#include "pm/index_space.hpp"

namespace pm {

struct ComplexityParams {
  int d = 2;
  std::int64_t N_cell = 900;
  double n_max = 1.0;      // particles per cell
  double N_p_max = 100.0;  // particles in the whole system
  double tau_i = 3.0, tau_e = 3.0, tau_f = 1.0, tau_edot = 1.0;
  double C_u = 1.0, C_alpha = 1.0, C_beta = 1.0, C_gamma = 1.0, C_c = 1.0;
  double T = 1.0;

  /// Constants of the figure: d = 2, every C = 1, tau_i = tau_e = 3,
  /// tau_f = tau_edot = 1, N_cell = 900.
  static ComplexityParams figure3() { return {}; }

  void validate() const {
    if (d < 1 || d > 16) throw UsageError("d must be in 1..16");
    if (N_cell < 1) throw UsageError("N_cell must be positive");
    for (double v : {n_max, N_p_max, tau_i, tau_e, tau_f, tau_edot, C_u, C_alpha, C_beta, C_gamma, C_c, T})
      if (!(v >= 0.0)) throw UsageError("complexity constants must be non-negative");
  }
};

struct AggregateConstants {
  double C_f, C_edot, C_collect, C_dist, C_step, C_copy;
};

inline AggregateConstants aggregate_constants(const ComplexityParams& p) {
  const double d = p.d;
  const double k = static_cast<double>(pow3(p.d));
  AggregateConstants c{};
  c.C_f = p.tau_f;
  c.C_edot = p.tau_edot;
  c.C_collect = p.C_gamma * d + k * (p.C_beta * d + p.C_c * d + p.n_max);
  c.C_dist = p.n_max * (p.C_alpha * d + 1.0);
  c.C_step = p.n_max * (p.tau_e + k * p.n_max * p.C_u * d + k * p.n_max * p.tau_i);
  c.C_copy = p.C_gamma * d + k * (p.C_beta * d + p.n_max);
  return c;
}

namespace detail {

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

inline std::int64_t patterns(int d, std::int64_t N_cell) {
  if (d < 1 || d > 16) throw UsageError("d must be in 1..16");
  const std::int64_t k = pow3(d);
  if (N_cell < 1 || N_cell % k != 0)
    throw UsageError("N_cell = " + std::to_string(N_cell) + " is not a positive multiple of 3^d = " + std::to_string(k));
  return k;
}

}  // namespace detail

enum class XiBranch { FewCpus = 1, Middle = 2, Saturated = 3 };

/// Computation work units when evaluated on a given branch.
inline std::int64_t xi_calc_branch(std::int64_t N_cell, std::int64_t n_cpu, int d, XiBranch b) {
  const std::int64_t k = detail::patterns(d, N_cell);
  if (n_cpu < 1) throw UsageError("n_CPU must be positive");
  switch (b) {
    case XiBranch::FewCpus: return detail::ceil_div(k, n_cpu) * (N_cell / k);
    case XiBranch::Middle: return detail::ceil_div(N_cell, k * (n_cpu / k));  // M2
    case XiBranch::Saturated: return 1;
  }
  return 0;
}

/// Communication work units when evaluated on a given branch.
inline std::int64_t xi_com_branch(std::int64_t N_cell, std::int64_t n_cpu, int d, XiBranch b) {
  const std::int64_t k = detail::patterns(d, N_cell);
  if (n_cpu < 1) throw UsageError("n_CPU must be positive");
  switch (b) {
    case XiBranch::FewCpus: return N_cell;
    case XiBranch::Middle: {
      const std::int64_t n1 = n_cpu % k;
      const std::int64_t n2 = k - n1;
      const std::int64_t m1 = detail::ceil_div(N_cell, k * detail::ceil_div(n_cpu, k));
      const std::int64_t m2 = detail::ceil_div(N_cell, k * (n_cpu / k));
      return n1 * m1 + n2 * m2;
    }
    case XiBranch::Saturated: return k;
  }
  return 0;
}

inline XiBranch xi_branch(std::int64_t N_cell, std::int64_t n_cpu, int d) {
  const std::int64_t k = pow3(d);
  if (n_cpu <= k) return XiBranch::FewCpus;
  if (n_cpu <= N_cell) return XiBranch::Middle;
  return XiBranch::Saturated;
}

inline std::int64_t xi_calc(std::int64_t N_cell, std::int64_t n_cpu, int d) {
  return xi_calc_branch(N_cell, n_cpu, d, xi_branch(N_cell, n_cpu, d));
}

inline std::int64_t xi_com(std::int64_t N_cell, std::int64_t n_cpu, int d) {
  return xi_com_branch(N_cell, n_cpu, d, xi_branch(N_cell, n_cpu, d));
}

struct BranchDiscrepancy {
  std::string quantity;  // "xi_calc" or "xi_com"
  std::int64_t n_cpu = 0;
  std::int64_t first = 0;   // value of the lower branch
  std::int64_t second = 0;  // value of the upper branch
};

/// n_CPU = 3^d belongs to both the first and the second branch; lists the
/// quantities on which the two branches disagree there.
inline std::vector<BranchDiscrepancy> branch_discrepancies(std::int64_t N_cell, int d) {
  std::vector<BranchDiscrepancy> out;
  const std::int64_t k = detail::patterns(d, N_cell);
  const std::int64_t a = xi_calc_branch(N_cell, k, d, XiBranch::FewCpus);
  const std::int64_t b = xi_calc_branch(N_cell, k, d, XiBranch::Middle);
  if (a != b) out.push_back({"xi_calc", k, a, b});
  const std::int64_t c = xi_com_branch(N_cell, k, d, XiBranch::FewCpus);
  const std::int64_t e = xi_com_branch(N_cell, k, d, XiBranch::Middle);
  if (c != e) out.push_back({"xi_com", k, c, e});
  return out;
}

/// T (N (N tau_i + N C_u d + tau_e) + tau_f + tau_edot), with all-pairs
/// neighborhood search: the neighborhood size and its cost both grow with N.
inline double time_bound_sequential(const ComplexityParams& p) {
  p.validate();
  const double N = p.N_p_max;
  return p.T * (N * (N * p.tau_i + N * p.C_u * p.d + p.tau_e) + p.tau_f + p.tau_edot);
}

inline double time_bound_parallel(const ComplexityParams& p, std::int64_t n_cpu) {
  p.validate();
  const AggregateConstants c = aggregate_constants(p);
  const auto calc = static_cast<double>(xi_calc(p.N_cell, n_cpu, p.d));
  const auto com = static_cast<double>(xi_com(p.N_cell, n_cpu, p.d));
  return p.T * (c.C_f + calc * (c.C_edot + c.C_dist + c.C_step) + com * (c.C_collect + c.C_copy));
}

/// Single-processor form T (C_f + N_cell (C_edot + C_collect + C_dist + C_step + C_copy)).
inline double time_bound_single(const ComplexityParams& p) {
  p.validate();
  const AggregateConstants c = aggregate_constants(p);
  return p.T * (c.C_f + static_cast<double>(p.N_cell) * (c.C_edot + c.C_collect + c.C_dist + c.C_step + c.C_copy));
}

// ---------------------------------------------------------------------------
// speedup

enum class SpeedupModel { Cell, Amdahl, Gustafson };

inline SpeedupModel parse_speedup_model(const std::string& s) {
  if (s == "cell") return SpeedupModel::Cell;
  if (s == "amdahl") return SpeedupModel::Amdahl;
  if (s == "gustafson") return SpeedupModel::Gustafson;
  throw UsageError("unknown speedup model '" + s + "' (expected cell, amdahl or gustafson)");
}

inline const char* to_string(SpeedupModel m) {
  switch (m) {
    case SpeedupModel::Cell: return "cell";
    case SpeedupModel::Amdahl: return "amdahl";
    case SpeedupModel::Gustafson: return "gustafson";
  }
  return "?";
}

/// Cell list on one processor against the all-pairs sequential method, as a
/// function of N = N_p_max.
inline double speedup_cell(const ComplexityParams& p, double N) {
  p.validate();
  const AggregateConstants c = aggregate_constants(p);
  const double k = static_cast<double>(pow3(p.d));
  const double d = p.d;
  const double num = N * N * p.C_u * d + N * (k * p.n_max * p.tau_i + p.tau_e) + p.tau_f + p.tau_edot;
  const double den = N * (k * p.n_max * p.C_u * d + k * p.n_max * p.tau_i + p.tau_e +
                          (p.tau_edot + c.C_collect + c.C_dist + c.C_copy) / p.n_max) +
                     p.tau_f;
  return num / den;
}

/// Fixed N_cell, growing processor count.
inline double speedup_amdahl(const ComplexityParams& p, std::int64_t n_cpu) {
  p.validate();
  const AggregateConstants c = aggregate_constants(p);
  const double all = c.C_edot + c.C_collect + c.C_dist + c.C_step + c.C_copy;
  const double num = c.C_f + static_cast<double>(p.N_cell) * all;
  const double den = c.C_f + static_cast<double>(xi_calc(p.N_cell, n_cpu, p.d)) * (c.C_edot + c.C_dist + c.C_step) +
                     static_cast<double>(xi_com(p.N_cell, n_cpu, p.d)) * (c.C_collect + c.C_copy);
  return num / den;
}

/// Cells per processor fixed at p.N_cell, i.e. n_CPU * N_cell cells in total.
inline double speedup_gustafson(const ComplexityParams& p, std::int64_t n_cpu) {
  p.validate();
  if (n_cpu < 1) throw UsageError("n_CPU must be positive");
  const AggregateConstants c = aggregate_constants(p);
  const double all = c.C_edot + c.C_collect + c.C_dist + c.C_step + c.C_copy;
  const std::int64_t cells = n_cpu * p.N_cell;
  const double num = c.C_f + static_cast<double>(cells) * all;
  const double den = c.C_f + static_cast<double>(xi_calc(cells, n_cpu, p.d)) * (c.C_edot + c.C_dist + c.C_step) +
                     static_cast<double>(xi_com(cells, n_cpu, p.d)) * (c.C_collect + c.C_copy);
  return num / den;
}

struct Sweep {
  std::int64_t from = 1, to = 1, step = 1;

  /// "a:b:step" or "a:b" (step 1).
  static Sweep parse(const std::string& s) {
    Sweep w;
    long long a = 0, b = 0, st = 1;
    char tail = 0;
    const int n = std::sscanf(s.c_str(), "%lld:%lld:%lld%c", &a, &b, &st, &tail);
    if (n == 2) {
      const int m = std::sscanf(s.c_str(), "%lld:%lld%c", &a, &b, &tail);
      if (m != 2) throw UsageError("malformed sweep '" + s + "' (expected a:b:step)");
      st = 1;
    } else if (n != 3) {
      throw UsageError("malformed sweep '" + s + "' (expected a:b:step)");
    }
    w = {a, b, st};
    w.validate();
    return w;
  }

  void validate() const {
    if (step < 1) throw UsageError("sweep step must be positive");
    if (from < 1) throw UsageError("sweep must start at 1 or above");
    if (to < from) throw UsageError("empty sweep");
  }

  std::vector<std::int64_t> points() const {
    validate();
    std::vector<std::int64_t> out;
    for (std::int64_t x = from; x <= to; x += step) out.push_back(x);
    return out;
  }
};

struct SpeedupPoint {
  std::int64_t x = 0;
  double speedup = 0.0;
};

inline std::vector<SpeedupPoint> speedup(SpeedupModel model, const ComplexityParams& p, const Sweep& sweep) {
  std::vector<SpeedupPoint> out;
  for (std::int64_t x : sweep.points()) {
    double s = 0.0;
    switch (model) {
      case SpeedupModel::Cell: s = speedup_cell(p, static_cast<double>(x)); break;
      case SpeedupModel::Amdahl: s = speedup_amdahl(p, x); break;
      case SpeedupModel::Gustafson: s = speedup_gustafson(p, x); break;
    }
    out.push_back({x, s});
  }
  return out;
}

inline std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void write_speedup_csv(std::ostream& os, SpeedupModel model, const std::vector<SpeedupPoint>& pts) {
  os << "model," << (model == SpeedupModel::Cell ? "N_p_max" : "n_CPU") << ",speedup\n";
  for (const SpeedupPoint& p : pts) os << to_string(model) << ',' << p.x << ',' << format_g6(p.speedup) << '\n';
}

}  // namespace pm
