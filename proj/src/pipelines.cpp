#include "qplab/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace qplab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double l1_difference(const Solution& a, const Solution& b) {
  double sum = 0.0;
  const std::size_t steps = std::min(a.u.size(), b.u.size());
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < a.grid.cell_count(); ++i) sum += std::abs(a.u[s][i] - b.u[s][i]);
  }
  return sum * a.grid.cell_volume() * a.grid.tau();
}

double l1_norm(const Solution& a) {
  double sum = 0.0;
  for (const auto& f : a.u) {
    for (double v : f.values()) sum += std::abs(v);
  }
  return sum * a.grid.cell_volume() * a.grid.tau();
}

SpaceTimeField source_field(const Solution& sol, const std::function<double(double)>& g) {
  SpaceTimeField out(sol.grid);
  for (int s = 0; s < static_cast<int>(sol.u.size()); ++s) {
    for (std::size_t i = 0; i < sol.grid.cell_count(); ++i) out.at(s, i) = g(sol.u[s][i]);
  }
  return out;
}

std::vector<double> ones(int n) { return std::vector<double>(static_cast<std::size_t>(n), 1.0); }

/// Shared driver of the monotone source iterations: u_1 solves `base`,
/// u_{m+1} solves `base` with extra forcing source(u_m). `inspect` fills the
/// record margin and returns true when the iterate counts as blown up.
IterationTrace monotone_iteration(const ParabolicProblem& base, const std::function<double(double)>& source,
                                  const std::function<bool(const Solution&, IterationRecord&)>& inspect, int m_max,
                                  double increment_tol, const MinimizeOptions& opts, Solution& last) {
  if (m_max < 1) throw InvalidArgument("iteration: m_max must be >= 1");
  IterationTrace trace;
  ParabolicProblem prob = base;
  std::optional<Solution> prev;
  for (int m = 1; m <= m_max; ++m) {
    Solution cur;
    try {
      cur = solve_parabolic(prob, opts);
    } catch (const SolverError&) {
      trace.status = IterationTrace::Status::blow_up;
      trace.blow_up_iteration = m;
      trace.records.push_back({m, std::numeric_limits<double>::infinity(), kNaN, kNaN});
      return trace;
    }
    IterationRecord rec;
    rec.m = m;
    rec.sup = cur.sup_abs();
    rec.increment = prev ? l1_difference(cur, *prev) : l1_norm(cur);
    rec.margin = kNaN;
    const bool finite = cur.status == Solution::Status::ok && std::isfinite(rec.sup);
    const bool blown = !finite || inspect(cur, rec);
    if (prev && finite) {
      for (std::size_t s = 0; s < cur.u.size() && trace.monotone; ++s) {
        for (std::size_t i = 0; i < cur.grid.cell_count(); ++i) {
          if (prev->u[s][i] > cur.u[s][i] + 2.0 * opts.tol) {
            trace.monotone = false;
            break;
          }
        }
      }
    }
    trace.records.push_back(rec);
    last = std::move(cur);
    if (blown) {
      trace.status = IterationTrace::Status::blow_up;
      trace.blow_up_iteration = m;
      return trace;
    }
    if (prev && rec.increment < increment_tol) {
      trace.status = IterationTrace::Status::converged;
      return trace;
    }
    prob.extra_forcing = source_field(last, source);
    prev = last;
  }
  trace.status = IterationTrace::Status::cap;
  return trace;
}

double max_over(const Field& f) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : f.values()) m = std::max(m, v);
  return m;
}

}  // namespace

const char* status_name(IterationTrace::Status s) {
  switch (s) {
    case IterationTrace::Status::converged:
      return "converged";
    case IterationTrace::Status::blow_up:
      return "blow-up";
    case IterationTrace::Status::cap:
      return "cap";
  }
  return "cap";
}

SmallnessConstants smallness_constants(int N, double p, double q, double K, double D, double M_hat) {
  if (!(p > 1.0)) throw InvalidArgument("smallness_constants: p must exceed 1");
  if (!(q > p - 1.0)) throw InvalidArgument("smallness_constants: q must exceed p - 1");
  if (!(K > 0.0) || !(D > 0.0) || !(M_hat > 0.0)) {
    throw InvalidArgument("smallness_constants: K, D and M must be positive");
  }
  SmallnessConstants c;
  c.N = N;
  c.p = p;
  c.q = q;
  c.K = K;
  c.D = D;
  c.M_hat = M_hat;
  const double e = (2.0 - p) / (p - 1.0);
  c.beta_p = std::max(1.0, std::pow(3.0, e));
  c.c_p = 2.0 * std::max(1.0, std::pow(2.0, e));
  c.A1 = std::pow(std::pow(2.0, q - 1.0) * std::pow(2.0 * c.beta_p, q) * std::pow(K, q), 1.0 / (p - 1.0));
  const double pp = p / (p - 1.0);
  c.A2 = c.beta_p * K * std::pow(2.0, q / (p - 1.0)) * std::pow(unit_ball_volume(N), 1.0 / (p - 1.0)) / pp *
         std::pow(2.0 * D, pp);
  c.lambda0 = std::pow(c.A1 * M_hat, -(p - 1.0) * (p - 1.0) / (q - p + 1.0));
  c.b0 = std::pow(c.A2, -(p - 1.0) / (q - p + 1.0));
  return c;
}

CompositionReport wolff_composition_check(const SpatialMeasure& omega, double p, double q, double lambda,
                                          const RadialQuadrature& quad, double floor) {
  if (!(q > p - 1.0)) throw InvalidArgument("wolff_composition_check: q must exceed p - 1");
  if (!(lambda > 0.0)) throw InvalidArgument("wolff_composition_check: lambda must be positive");
  const Grid& grid = omega.grid();
  const double R = 2.0 * grid.diameter();
  CompositionReport out;
  out.inner = wolff_field(omega, p, R, quad);
  Field powered(grid);
  for (std::size_t i = 0; i < powered.size(); ++i) powered[i] = std::pow(out.inner[i], q);
  out.outer = wolff_field(density_measure(powered), p, R, quad);
  const double scale = std::pow(lambda, (q - p + 1.0) / ((p - 1.0) * (p - 1.0)));
  for (std::size_t i = 0; i < powered.size(); ++i) {
    if (out.inner[i] > floor) out.M_hat = std::max(out.M_hat, out.outer[i] / (scale * out.inner[i]));
  }
  return out;
}

double estimate_kappa(const SpatialMeasure& omega, double p, const MinimizeOptions& opts,
                      const RadialQuadrature& quad) {
  if (omega.is_zero()) return 0.0;
  EllipticProblem prob;
  prob.grid = omega.grid();
  prob.omega = omega;
  prob.p = p;
  const EllipticResult r = solve_elliptic(prob, opts);
  return check_enca(r.u, omega, p, std::numeric_limits<double>::infinity(), quad).kappa;
}

// ---------------------------------------------------------------------------
// Subcritical absorption

SubcriticalReport subcritical_absorption(const ParabolicProblem& prob, const std::vector<int>& levels,
                                         const MinimizeOptions& opts, double slack) {
  const auto& pert = prob.perturbation;
  if (pert.role != Perturbation::Role::absorption) {
    throw InvalidArgument("subcritical_absorption: perturbation must be an absorption");
  }
  if (!subcritical_check(pert.G, prob.grid.dim(), prob.p)) {
    throw InvalidArgument("subcritical_absorption: G is not subcritical");
  }
  if (levels.empty()) throw InvalidArgument("subcritical_absorption: no levels");
  const Grid& grid = prob.grid;
  double bound = prob.mu.total_variation() + integrate_abs(prob.u0);
  if (prob.extra_forcing) bound += integrate_abs(*prob.extra_forcing);

  SubcriticalReport out;
  std::optional<Solution> prev;
  for (int n : levels) {
    ParabolicProblem level = prob;
    level.mollify_radius = mollifier_radius(grid, n);
    Solution sol = solve_parabolic(level, opts);
    LevelReport rep;
    rep.level = n;
    rep.G_mass = sol.G_mass_total();
    rep.bound = bound;
    rep.bound_holds = rep.G_mass <= (1.0 + slack) * bound + 5.0 * opts.tol * grid.space_time_measure();
    for (double L = 1.0; L <= 128.0; L *= 2.0) {
      double tail = 0.0;
      for (const auto& f : sol.u) {
        for (double v : f.values()) {
          if (std::abs(v) >= L) tail += std::abs(pert.lambda * pert.G.value(v));
        }
      }
      rep.tail.emplace_back(L, tail * grid.cell_volume() * grid.tau());
    }
    if (prev) rep.l1_distance = l1_difference(sol, *prev);
    out.mass_bound_holds = out.mass_bound_holds && rep.bound_holds;
    if (out.levels.size() >= 2 && rep.l1_distance > out.levels.back().l1_distance) out.distances_decreasing = false;
    out.levels.push_back(rep);
    prev = std::move(sol);
  }
  out.finest = std::move(*prev);
  return out;
}

// ---------------------------------------------------------------------------
// Subcritical source

SourceReport subcritical_source(const ParabolicProblem& prob, double eps_budget, int max_iter, double increment_tol,
                                int window, const MinimizeOptions& opts) {
  const auto& pert = prob.perturbation;
  const int N = prob.grid.dim();
  if (pert.role != Perturbation::Role::source) throw InvalidArgument("subcritical_source: perturbation must be a source");
  if (!subcritical_check(pert.G, N, prob.p)) throw InvalidArgument("subcritical_source: G is not subcritical");
  if (!(pert.lambda >= 0.0)) throw InvalidArgument("subcritical_source: lambda must be nonnegative");
  if (window < 1) throw InvalidArgument("subcritical_source: window must be >= 1");
  const double data = integrate_abs(prob.u0) + prob.mu.total_variation();
  if (pert.lambda + data > eps_budget) {
    throw InvalidArgument("subcritical_source: lambda + |mu|(Q) + ||u0||_1 exceeds the budget");
  }
  ParabolicProblem base = prob;
  base.perturbation = Perturbation{};
  const double lambda = pert.lambda;
  const Nonlinearity G = pert.G;
  const double expo = (prob.p + N) / static_cast<double>(N);

  SourceReport out;
  std::vector<double> increments;
  auto inspect = [&](const Solution& u, IterationRecord& rec) {
    double gmass = 0.0;
    for (const auto& f : u.u) {
      for (double v : f.values()) gmass += std::abs(G.value(v));
    }
    gmass *= u.grid.cell_volume() * u.grid.tau();
    const double K = std::pow(data + lambda * gmass, expo);
    out.K_surrogate.push_back(K);
    increments.push_back(rec.increment);
    if (!std::isfinite(K)) return true;
    const std::size_t n = out.K_surrogate.size();
    const std::size_t w = static_cast<std::size_t>(window);
    if (n <= w || K < 2.0 * out.K_surrogate[n - 1 - w]) return false;
    // A doubling surrogate only counts while the Picard increments are not shrinking.
    for (std::size_t j = n - w; j < n; ++j) {
      if (j >= 1 && increments[j] < increments[j - 1]) return false;
    }
    return true;
  };
  auto src = [lambda, G](double v) { return lambda * G.value(v); };
  out.trace = monotone_iteration(base, src, inspect, lambda == 0.0 ? 1 : max_iter, increment_tol, opts, out.solution);
  if (lambda == 0.0 && out.trace.status == IterationTrace::Status::cap) {
    out.trace.status = IterationTrace::Status::converged;
  }
  return out;
}

std::vector<double> shadow_recursion(double c, double exponent, double k0, int steps) {
  std::vector<double> k{k0};
  for (int n = 0; n < steps; ++n) k.push_back(c * (std::pow(k.back(), exponent) + 1.0));
  return k;
}

// ---------------------------------------------------------------------------
// General absorption

AbsorptionReport absorption_general(const AbsorptionInput& in, const std::vector<int>& levels,
                                    const MinimizeOptions& opts, double slack) {
  const Grid& grid = in.omega.grid();
  const int N = grid.dim();
  if (levels.empty()) throw InvalidArgument("absorption_general: no levels");
  if (!in.omega.is_nonnegative()) throw InvalidArgument("absorption_general: omega must be nonnegative");
  if (static_cast<int>(in.F.size()) != grid.steps()) {
    throw InvalidArgument("absorption_general: F needs one value per time step");
  }
  for (double v : in.F) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("absorption_general: F must be finite and nonnegative");
  }
  if (!(in.mu.grid() == grid) || !(in.u0.grid() == grid)) throw InvalidArgument("absorption_general: grid mismatch");
  if (in.f && !(in.f->grid() == grid)) throw InvalidArgument("absorption_general: grid mismatch");
  if (!(in.lambda > 0.0)) throw InvalidArgument("absorption_general: lambda must be positive");
  in.G.validate();
  const SpaceTimeMeasure theta = product(in.omega, in.F);
  if (!less_equal(in.mu.abs(), theta)) throw InvalidArgument("absorption_general: |mu| exceeds omega (x) F");
  if (in.G.kind == Nonlinearity::Kind::power && in.omega.has_atoms() && in.p < N &&
      !dirac_admissible(N, in.p, in.G.q)) {
    throw InvalidArgument("absorption_general: omega charges points of zero capacity");
  }

  const double f_mass = in.f ? integrate_abs(*in.f) : 0.0;
  AbsorptionReport out;
  out.mass_bound = in.mu.total_variation() + f_mass + integrate_abs(in.u0);
  const SpaceTimeMeasure mu_plus = in.mu.positive_part();
  const SpaceTimeMeasure mu_minus = in.mu.negative_part();
  std::optional<SpaceTimeField> f_plus, f_minus;
  if (in.f) {
    f_plus = SpaceTimeField(grid);
    f_minus = SpaceTimeField(grid);
    for (std::size_t j = 0; j < in.f->values().size(); ++j) {
      const double v = in.f->values()[j];
      f_plus->values()[j] = std::max(v, 0.0);
      f_minus->values()[j] = std::max(-v, 0.0);
    }
  }

  std::optional<SpaceTimeMeasure> prev1, prev2;
  std::optional<Solution> last;
  for (int n : levels) {
    if (n < 1) throw InvalidArgument("absorption_general: levels must be >= 1");
    const SpatialMeasure omega_n = restrict_interior(in.omega, 1.0 / n);
    const SpaceTimeMeasure theta_n = product(omega_n, truncate_profile(grid, in.F, n));
    SpaceTimeMeasure mu1 = inf_measures(mu_plus, theta_n);
    SpaceTimeMeasure mu2 = inf_measures(mu_minus, theta_n);
    if (in.f) {
      mu1 += truncate_restrict(density_measure(*f_plus), n);
      mu2 += truncate_restrict(density_measure(*f_minus), n);
    }
    AbsorptionLevel lvl;
    lvl.level = n;
    if (prev1) lvl.monotone = less_equal(*prev1, mu1) && less_equal(*prev2, mu2);
    ParabolicProblem prob;
    prob.grid = grid;
    prob.mu = mu1 - mu2;
    prob.u0 = in.u0;
    prob.p = in.p;
    prob.perturbation = Perturbation{Perturbation::Role::absorption, in.G, in.lambda};
    lvl.data_variation = prob.mu.total_variation();
    Solution sol = solve_parabolic(prob, opts);
    lvl.G_mass = sol.G_mass_total();
    const bool ok = lvl.G_mass <= (1.0 + slack) * out.mass_bound + 5.0 * opts.tol * grid.space_time_measure();
    out.mass_bound_holds = out.mass_bound_holds && ok;
    out.sequences_monotone = out.sequences_monotone && lvl.monotone;
    out.levels.push_back(lvl);
    prev1 = std::move(mu1);
    prev2 = std::move(mu2);
    last = std::move(sol);
  }
  out.finest = std::move(*last);

  const bool f_zero = !in.f || in.f->max_abs() == 0.0;
  if (f_zero) {
    out.bound_checked = true;
    const double Fmax = *std::max_element(in.F.begin(), in.F.end());
    const SpatialMeasure gamma = in.omega.scaled(Fmax);
    out.kappa = estimate_kappa(gamma, in.p, opts);
    const Field W = wolff_field(gamma, in.p, 2.0 * grid.diameter());
    const double b = in.u0.max_abs();
    double margin = std::numeric_limits<double>::infinity();
    double scale = 1.0;
    for (const auto& u : out.finest.u) {
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double B = out.kappa * W[i] + b;
        scale = std::max(scale, B);
        margin = std::min(margin, B - std::abs(u[i]));
      }
    }
    out.bound_margin = margin;
    out.bound_holds = margin >= -1e-6 * scale;
  }
  return out;
}

ExpGateReport exponential_absorption_gate(const SpatialMeasure& omega, double p, double beta, double tau, int mode,
                                          double beta0, std::optional<double> kappa, const AbsorptionInput* run,
                                          const std::vector<int>& levels, const MinimizeOptions& opts,
                                          const RadialQuadrature& quad) {
  if (!(p > 1.0)) throw InvalidArgument("exponential_absorption_gate: p must exceed 1");
  if (!(beta > 1.0)) throw InvalidArgument("exponential_absorption_gate: beta must exceed 1");
  if (!(tau > 0.0)) throw InvalidArgument("exponential_absorption_gate: tau must be positive");
  if (!omega.is_nonnegative()) throw InvalidArgument("exponential_absorption_gate: omega must be nonnegative");
  const double R = 2.0 * omega.grid().diameter();
  ExpGateReport out;
  out.mode = mode;
  if (mode == 1) {
    const double eta = (p - 1.0) * (beta - 1.0) / beta;
    out.maximal_norm = max_over(maximal_field(omega, p, R, eta, quad));
    out.kappa = kappa ? *kappa : estimate_kappa(omega, p, opts, quad);
    out.delta0 = delta0(p, beta);
    out.M0 = out.kappa > 0.0 ? std::pow(out.delta0 / (tau * std::pow(out.kappa, beta)), (p - 1.0) / beta)
                             : std::numeric_limits<double>::infinity();
    out.pass = out.maximal_norm < out.M0;
  } else if (mode == 2) {
    if (!(beta0 > beta)) throw InvalidArgument("exponential_absorption_gate: mode 2 needs beta0 > beta");
    const double eta0 = (p - 1.0) * (beta0 - 1.0) / beta0;
    out.maximal_norm = max_over(maximal_field(omega, p, R, eta0, quad));
    out.M0 = std::numeric_limits<double>::infinity();
    out.pass = std::isfinite(out.maximal_norm);
  } else {
    throw InvalidArgument("exponential_absorption_gate: mode must be 1 or 2");
  }
  if (out.pass && run) {
    AbsorptionInput in = *run;
    in.G = Nonlinearity{};
    in.G.kind = Nonlinearity::Kind::exponential;
    in.G.tau = tau;
    in.G.beta = beta;
    out.run = absorption_general(in, levels.empty() ? std::vector<int>{1, 2, 4} : levels, opts);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monotone source iterations

namespace {

SpaceTimeMeasure default_data(const SpatialMeasure& omega, const std::optional<SpaceTimeMeasure>& mu) {
  if (mu) return *mu;
  return product(omega, ones(omega.grid().steps()));
}

std::function<bool(const Solution&, IterationRecord&)> envelope_inspector(const Field& env, double opts_tol,
                                                                          bool& holds) {
  const double env_max = std::max(max_over(env), 0.0);
  return [&env, env_max, opts_tol, &holds](const Solution& u, IterationRecord& rec) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& f : u.u) {
      for (std::size_t i = 0; i < f.size(); ++i) margin = std::min(margin, env[i] - f[i]);
    }
    rec.margin = margin;
    if (margin < -2.0 * opts_tol * std::max(1.0, env_max)) holds = false;
    return env_max > 0.0 ? rec.sup > 10.0 * env_max : false;
  };
}

}  // namespace

PowerSourceReport iterate_power_source(const PowerSourceInput& in, const MinimizeOptions& opts,
                                       const RadialQuadrature& quad) {
  const Grid& grid = in.omega.grid();
  if (!(in.p > 1.0)) throw InvalidArgument("iterate_power_source: p must exceed 1");
  if (!(in.q > in.p - 1.0)) throw InvalidArgument("iterate_power_source: q must exceed p - 1");
  if (!in.omega.is_nonnegative()) throw InvalidArgument("iterate_power_source: omega must be nonnegative");
  if (!(in.u0.grid() == grid)) throw InvalidArgument("iterate_power_source: grid mismatch");
  for (double v : in.u0.values()) {
    if (v < 0.0) throw InvalidArgument("iterate_power_source: u0 must be nonnegative");
  }
  const SpaceTimeMeasure mu = default_data(in.omega, in.mu);
  if (!mu.is_nonnegative()) throw InvalidArgument("iterate_power_source: mu must be nonnegative");

  PowerSourceReport out;
  const double b = in.u0.max_abs();
  const double kappa = in.kappa ? *in.kappa : estimate_kappa(in.omega, in.p, opts, quad);
  const Field W = wolff_field(in.omega, in.p, 2.0 * grid.diameter(), quad);
  if (in.omega.is_zero()) {
    out.constants.p = in.p;
    out.constants.q = in.q;
    out.gate_passed = true;
  } else {
    const double M_hat = in.M_hat ? *in.M_hat : wolff_composition_check(in.omega, in.p, in.q, in.lambda, quad).M_hat;
    out.constants = smallness_constants(grid.dim(), in.p, in.q, kappa, grid.diameter(), M_hat);
    out.gate_passed = in.lambda <= out.constants.lambda0 && b <= out.constants.b0;
  }
  const double beta_p = std::max(1.0, std::pow(3.0, (2.0 - in.p) / (in.p - 1.0)));
  out.envelope = Field(grid);
  for (std::size_t i = 0; i < W.size(); ++i) out.envelope[i] = 2.0 * beta_p * kappa * W[i] + 2.0 * b;

  ParabolicProblem base;
  base.grid = grid;
  base.mu = mu;
  base.u0 = in.u0;
  base.p = in.p;
  bool holds = true;
  const double q = in.q;
  auto src = [q](double v) { return v > 0.0 ? std::pow(v, q) : 0.0; };
  out.trace = monotone_iteration(base, src, envelope_inspector(out.envelope, opts.tol, holds), in.m_max,
                                 in.increment_tol, opts, out.solution);
  out.envelope_holds = holds && out.trace.status != IterationTrace::Status::blow_up;
  return out;
}

ExpSourceReport iterate_exponential_source(const ExpSourceInput& in, const MinimizeOptions& opts,
                                           const RadialQuadrature& quad) {
  const Grid& grid = in.omega.grid();
  if (!(in.p > 1.0)) throw InvalidArgument("iterate_exponential_source: p must exceed 1");
  if (!(in.beta >= 1.0)) throw InvalidArgument("iterate_exponential_source: beta must be >= 1");
  if (!(in.tau > 0.0)) throw InvalidArgument("iterate_exponential_source: tau must be positive");
  if (in.l < 1 || !(in.l * in.beta > in.p - 1.0)) {
    throw InvalidArgument("iterate_exponential_source: need l >= 1 and l beta > p - 1");
  }
  if (!in.omega.is_nonnegative()) throw InvalidArgument("iterate_exponential_source: omega must be nonnegative");
  if (!(in.u0.grid() == grid)) throw InvalidArgument("iterate_exponential_source: grid mismatch");
  for (double v : in.u0.values()) {
    if (v < 0.0) throw InvalidArgument("iterate_exponential_source: u0 must be nonnegative");
  }
  if (!(in.b0 >= 0.0) || in.u0.max_abs() > in.b0) {
    throw InvalidArgument("iterate_exponential_source: ||u0||_inf exceeds b0");
  }
  const SpaceTimeMeasure mu = default_data(in.omega, in.mu);
  if (!mu.is_nonnegative()) throw InvalidArgument("iterate_exponential_source: mu must be nonnegative");

  ExpSourceReport out;
  const double R = 2.0 * grid.diameter();
  out.kappa = in.kappa ? *in.kappa : estimate_kappa(in.omega, in.p, opts, quad);
  out.c_p = 2.0 * std::max(1.0, std::pow(2.0, (2.0 - in.p) / (in.p - 1.0)));
  const double eta = (in.p - 1.0) * (in.beta - 1.0) / in.beta;
  out.maximal_norm = max_over(maximal_field(in.omega, in.p, R, eta, quad));
  if (in.M0) {
    out.gate_checked = true;
    out.gate_passed = out.maximal_norm <= *in.M0;
  }
  const Field W = wolff_field(in.omega, in.p, R, quad);
  out.envelope = Field(grid);
  double sum = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < W.size(); ++i) {
    out.envelope[i] = out.kappa * out.c_p * W[i] + 2.0 * in.b0;
    const double e = in.tau * std::pow(out.envelope[i], in.beta);
    if (e > 700.0) {
      finite = false;
      continue;
    }
    sum += std::exp(e);
  }
  out.envelope_integrable = finite;
  out.envelope_integral = finite ? sum * grid.cell_volume() : std::numeric_limits<double>::infinity();

  ParabolicProblem base;
  base.grid = grid;
  base.mu = mu;
  base.u0 = in.u0;
  base.p = in.p;
  bool holds = true;
  const double tau = in.tau, beta = in.beta;
  const int l = in.l;
  auto src = [tau, beta, l](double v) { return v > 0.0 ? E_function(tau * std::pow(v, beta), l) : 0.0; };
  out.trace = monotone_iteration(base, src, envelope_inspector(out.envelope, opts.tol, holds), in.m_max,
                                 in.increment_tol, opts, out.solution);
  out.envelope_holds = holds && out.trace.status != IterationTrace::Status::blow_up;
  return out;
}

}  // namespace qplab
