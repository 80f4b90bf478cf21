#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qplab/energy.hpp"
#include "qplab/measures.hpp"
#include "qplab/perturbation.hpp"

namespace qplab {

/// u_t - div(a|grad u|^{p-2} grad u) + lambda G(u) = mu (absorption) or
/// u_t - div(...) = mu + lambda G(u) (source), u = 0 on the lateral boundary, u(0) = u0.
struct ParabolicProblem {
  Grid grid;
  SpaceTimeMeasure mu;
  Field u0;
  double p = 2.0;
  Perturbation perturbation;
  std::optional<Field> weight;
  double Lambda1 = 1.0;
  double Lambda2 = 1.0;
  /// Mollifier radius for mu; 0 means 2h.
  double mollify_radius = 0.0;
  /// Density added to the forcing without mollification (e.g. a lagged source).
  std::optional<SpaceTimeField> extra_forcing;
};

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct Solution {
  enum class Status { ok, blow_up };

  Grid grid;
  double p = 2.0;
  Perturbation perturbation;
  std::vector<double> weight;
  Field u0;
  /// u[s] approximates u(t_{s+1}).
  std::vector<Field> u;
  /// Forcing used in step s: mollified mu, extra forcing and the lagged source.
  SpaceTimeField forcing;
  /// ||grad_h u(t_{s+1})||_{L^p}.
  std::vector<double> gradient_norm;
  /// int_Omega |lambda G(u(t_{s+1}))| dx.
  std::vector<double> G_mass;
  std::vector<StepStats> stats;
  Status status = Status::ok;
  int blow_up_step = -1;
  std::vector<std::string> warnings;

  /// Space-time field with slice s = u[s].
  SpaceTimeField field() const;
  /// int_Q |lambda G(u)|.
  double G_mass_total() const;
  /// max over steps of ||u[s]||_inf.
  double sup_abs() const;
};

/// T_k(r) = max(min(r, k), -k).
double truncate(double r, double k);

/// Backward Euler with one convex minimization per step. Throws SolverError
/// on a non-converged step; a non-finite source iterate ends the run with
/// status blow_up instead.
Solution solve_parabolic(const ParabolicProblem& prob, const MinimizeOptions& opts = {});

struct DecayReport {
  bool defined = false;
  double C_hat = 0.0;
  double exponent = 0.0;
  std::vector<double> k;
  std::vector<double> m;
};

/// Level-set measures m(k) of u over Q on a log grid of k in [0.05, 0.8] sup|u|;
/// exponent is the least-squares slope of log m against log k and
/// C_hat = max_k m(k) k^{p_c} / data_mass^{(p+N)/N}.
DecayReport levelset_decay_check(const Solution& sol, double data_mass, int samples = 12);

/// Smoothed truncation: S' = 1 on [-k, k], S' = 1 - 3s^2 + 2s^3 with s = |r|/k - 1 on [k, 2k], 0 beyond.
struct SmoothTruncation {
  double k = 1.0;
  double S(double r) const;
  double dS(double r) const;
  double d2S(double r) const;
};

/// Space-time test function vanishing on the lateral boundary and at t = T.
struct TestFunction {
  std::string name;
  std::function<double(const Point&, double)> phi;
};

/// ((T - t)/T)^a prod_k sin(b pi (x_k - lo_k)/L_k) for a, b in {1, 2}.
std::vector<TestFunction> standard_test_functions(const Grid& grid);

struct ResidualEntry {
  double k = 0.0;
  std::string phi;
  double residual = 0.0;
  /// Sum of absolute values of the individual terms, for scale.
  double magnitude = 0.0;
};

/// Discrete weak identity of the renormalized formulation with S = S_k and
/// each test function; returns one entry per (k, phi).
std::vector<ResidualEntry> renormalized_residual(const Solution& sol, const std::vector<double>& k_list,
                                                 const std::vector<TestFunction>& phis);
std::vector<ResidualEntry> renormalized_residual(const Solution& sol, const std::vector<double>& k_list);

struct ConcentrationEntry {
  double m = 0.0;
  double value = 0.0;
};

/// (1/m) int_{m <= u < 2m} phi a |grad_h u|^p for each m.
std::vector<ConcentrationEntry> energy_concentration(const Solution& sol, const std::vector<double>& m_list,
                                                     const std::function<double(const Point&, double)>& phi = {});

struct ComparisonResult {
  Solution u;
  Solution v;
  bool holds = false;
  /// max over Q of u - v (positive means a violation of u <= v).
  double max_excess = 0.0;
};

/// Solves both problems with identical discretization and checks u <= v + 2 tol.
ComparisonResult comparison_solve(const ParabolicProblem& lower, const ParabolicProblem& upper,
                                  const MinimizeOptions& opts = {});

}  // namespace qplab
