#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qplab/elliptic.hpp"
#include "qplab/parabolic.hpp"
#include "qplab/potential.hpp"

namespace qplab {

struct SmallnessConstants {
  int N = 1;
  double p = 2.0, q = 2.0, K = 1.0, D = 1.0, M_hat = 1.0;
  double beta_p = 1.0;
  double c_p = 2.0;
  double A1 = 0.0, A2 = 0.0;
  double lambda0 = 0.0, b0 = 0.0;
};

SmallnessConstants smallness_constants(int N, double p, double q, double K, double D, double M_hat);

struct CompositionReport {
  double M_hat = 0.0;
  Field inner;  // W^{2D}[omega]
  Field outer;  // W^{2D}[(W^{2D}[omega])^q]
};

/// M_hat = max over cells with W[omega] > floor of
/// W[(W[omega])^q] / (lambda^{(q-p+1)/(p-1)^2} W[omega]).
CompositionReport wolff_composition_check(const SpatialMeasure& omega, double p, double q, double lambda,
                                          const RadialQuadrature& quad = {}, double floor = 1e-12);

/// Empirical kappa: elliptic solve with data omega followed by check_enca.
double estimate_kappa(const SpatialMeasure& omega, double p, const MinimizeOptions& opts = {},
                      const RadialQuadrature& quad = {});

// ---------------------------------------------------------------------------
// Subcritical absorption and source

struct LevelReport {
  int level = 0;
  double G_mass = 0.0;
  double bound = 0.0;
  bool bound_holds = false;
  /// (L, int_{|u| >= L} |lambda G(u)|) for dyadic L.
  std::vector<std::pair<double, double>> tail;
  /// ||u_n - u_{previous level}||_{L^1(Q)}; negative for the first level.
  double l1_distance = -1.0;
};

struct SubcriticalReport {
  std::vector<LevelReport> levels;
  Solution finest;
  bool mass_bound_holds = true;
  bool distances_decreasing = true;
};

/// Solves the absorption problem with the data mollified at each level n
/// (radius max(2h, D/n)) and reports the mass bound, tails and Cauchy distances.
SubcriticalReport subcritical_absorption(const ParabolicProblem& prob, const std::vector<int>& levels,
                                         const MinimizeOptions& opts = {}, double slack = 0.05);

struct IterationRecord {
  int m = 0;
  double sup = 0.0;
  double increment = 0.0;
  /// Envelope minus iterate, minimized over Q; NaN when no envelope applies.
  double margin = 0.0;
};

struct IterationTrace {
  enum class Status { converged, blow_up, cap };
  std::vector<IterationRecord> records;
  Status status = Status::cap;
  int blow_up_iteration = -1;
  /// u_m <= u_{m+1} + 2 tol at every cell and step.
  bool monotone = true;
};

const char* status_name(IterationTrace::Status s);

struct SourceReport {
  IterationTrace trace;
  Solution solution;
  /// (||u0||_1 + |mu|(Q) + lambda ||G(u_n)||_{L^1(Q)})^{(p+N)/N} per iterate.
  std::vector<double> K_surrogate;
};

/// Picard iteration u_{n+1} = solution with source lambda G(u_n), u_1 without
/// source. The source G and lambda come from prob.perturbation (role source).
SourceReport subcritical_source(const ParabolicProblem& prob, double eps_budget, int max_iter = 30,
                                double increment_tol = 1e-6, int window = 3, const MinimizeOptions& opts = {});

/// k_{n+1} = c (k_n^{exponent} + 1) from k_0, for `steps` steps.
std::vector<double> shadow_recursion(double c, double exponent, double k0, int steps);

// ---------------------------------------------------------------------------
// General absorption

struct AbsorptionInput {
  SpatialMeasure omega;
  std::vector<double> F;
  /// Density part f; empty means 0.
  std::optional<SpaceTimeField> f;
  /// Measure part with |mu| <= omega (x) F.
  SpaceTimeMeasure mu;
  Field u0;
  double p = 2.0;
  Nonlinearity G;
  double lambda = 1.0;
};

struct AbsorptionLevel {
  int level = 0;
  double G_mass = 0.0;
  double data_variation = 0.0;
  bool monotone = true;
};

struct AbsorptionReport {
  std::vector<AbsorptionLevel> levels;
  Solution finest;
  /// G mass against |mu|(Q) + |f|(Q) + ||u0||_1 at every level.
  double mass_bound = 0.0;
  bool mass_bound_holds = true;
  bool sequences_monotone = true;
  /// Bound |u| <= kappa W^{2D}[gamma] + ||u0||_inf with gamma = sup F omega; only when f = 0.
  bool bound_checked = false;
  bool bound_holds = false;
  double bound_margin = 0.0;
  double kappa = 0.0;
};

/// mu_{1,n} = T_n(chi_{Q_n} f^+) + inf{mu^+, omega_n (x) F_n}, mu_{2,n} likewise with minus parts,
/// omega_n = omega restricted to {d(x, boundary) > 1/n}; each level solved with absorption.
AbsorptionReport absorption_general(const AbsorptionInput& in, const std::vector<int>& levels,
                                    const MinimizeOptions& opts = {}, double slack = 0.05);

struct ExpGateReport {
  int mode = 1;
  bool pass = false;
  double maximal_norm = 0.0;
  double M0 = 0.0;
  double delta0 = 0.0;
  double kappa = 0.0;
  std::optional<AbsorptionReport> run;
};

/// Mode 1: ||M^{(p-1)/beta'}_{p,2D}[omega]||_inf < M0 = (delta0/(tau kappa^beta))^{(p-1)/beta}.
/// Mode 2: ||M^{(p-1)/beta0'}_{p,2D}[omega]||_inf finite for beta0 > beta.
/// When `run` is given and the gate passes, runs absorption_general with G = e^{tau|u|^beta} - 1.
ExpGateReport exponential_absorption_gate(const SpatialMeasure& omega, double p, double beta, double tau, int mode,
                                          double beta0 = 0.0, std::optional<double> kappa = std::nullopt,
                                          const AbsorptionInput* run = nullptr, const std::vector<int>& levels = {},
                                          const MinimizeOptions& opts = {}, const RadialQuadrature& quad = {});

// ---------------------------------------------------------------------------
// Monotone source iterations

struct PowerSourceInput {
  SpatialMeasure omega;
  /// Data mu <= omega (x) chi_{(0,T)}; defaults to omega (x) 1 when empty.
  std::optional<SpaceTimeMeasure> mu;
  Field u0;
  double p = 2.0;
  double q = 2.0;
  /// lambda of the capacity condition, supplied by the caller.
  double lambda = 1.0;
  std::optional<double> kappa;
  std::optional<double> M_hat;
  int m_max = 30;
  double increment_tol = 1e-6;
};

struct PowerSourceReport {
  IterationTrace trace;
  Solution solution;
  SmallnessConstants constants;
  bool gate_passed = false;
  /// Envelope 2 beta_p kappa W^{2D}[omega] + 2 ||u0||_inf respected at every m.
  bool envelope_holds = false;
  Field envelope;
};

PowerSourceReport iterate_power_source(const PowerSourceInput& in, const MinimizeOptions& opts = {},
                                       const RadialQuadrature& quad = {});

struct ExpSourceInput {
  SpatialMeasure omega;
  std::optional<SpaceTimeMeasure> mu;
  Field u0;
  double p = 2.0;
  double beta = 1.0;
  double tau = 1.0;
  int l = 2;
  double b0 = 0.0;
  /// Gate level for ||M^{(p-1)(beta-1)/beta}_{p,2D}[omega]||_inf; unset means not checked.
  std::optional<double> M0;
  std::optional<double> kappa;
  int m_max = 20;
  double increment_tol = 1e-6;
};

struct ExpSourceReport {
  IterationTrace trace;
  Solution solution;
  double kappa = 0.0;
  double c_p = 2.0;
  double maximal_norm = 0.0;
  bool gate_checked = false;
  bool gate_passed = true;
  /// int_Omega exp(tau (kappa c_p W + 2 b0)^beta) finite.
  bool envelope_integrable = false;
  double envelope_integral = 0.0;
  bool envelope_holds = false;
  Field envelope;
};

ExpSourceReport iterate_exponential_source(const ExpSourceInput& in, const MinimizeOptions& opts = {},
                                           const RadialQuadrature& quad = {});

}  // namespace qplab
