#include "qplab/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qplab/potential.hpp"

namespace qplab {
namespace {

bool all_finite(std::span<const double> v, double limit = 1e150) {
  return std::all_of(v.begin(), v.end(), [limit](double x) { return std::isfinite(x) && std::abs(x) < limit; });
}

double weight_at(const Solution& sol, std::size_t i) { return sol.weight.empty() ? 1.0 : sol.weight[i]; }

// Flux A(grad u) at each extended cell of the discrete gradient.
struct FluxField {
  std::vector<std::array<double, 3>> grad;
  std::vector<std::array<double, 3>> flux;
};

FluxField fluxes(const Solution& sol, const DiscreteGradient& D, std::span<const double> u) {
  FluxField out;
  out.grad.resize(D.extended_count());
  out.flux.resize(D.extended_count());
  const int N = sol.grid.dim();
  for (std::size_t c = 0; c < D.extended_count(); ++c) {
    auto& g = out.grad[c];
    g = {0.0, 0.0, 0.0};
    D.apply(u, c, g);
    double s = 0.0;
    for (int k = 0; k < N; ++k) s += g[k] * g[k];
    const double a = weight_at(sol, D.weight_cell(c));
    const double factor = sol.p == 2.0 ? a : (s > 0.0 ? a * std::pow(s, 0.5 * (sol.p - 2.0)) : 0.0);
    for (int k = 0; k < 3; ++k) out.flux[c][k] = factor * g[k];
  }
  return out;
}

}  // namespace

double truncate(double r, double k) {
  if (!(k > 0.0)) throw InvalidArgument("truncate: k must be positive");
  return std::max(std::min(r, k), -k);
}

SpaceTimeField Solution::field() const {
  SpaceTimeField out(grid);
  for (int s = 0; s < static_cast<int>(u.size()); ++s) {
    auto sl = out.slice(s);
    std::copy(u[s].values().begin(), u[s].values().end(), sl.begin());
  }
  return out;
}

double Solution::G_mass_total() const {
  double total = 0.0;
  for (double g : G_mass) total += g * grid.tau();
  return total;
}

double Solution::sup_abs() const {
  double m = 0.0;
  for (const auto& f : u) m = std::max(m, f.max_abs());
  return m;
}

Solution solve_parabolic(const ParabolicProblem& prob, const MinimizeOptions& opts) {
  const Grid& grid = prob.grid;
  if (!(prob.p > 1.0)) throw InvalidArgument("solve_parabolic: p must exceed 1");
  if (!(opts.tol > 0.0)) throw InvalidArgument("solve_parabolic: tol must be positive");
  if (!(prob.mu.grid() == grid)) throw InvalidArgument("solve_parabolic: measure grid mismatch");
  if (!(prob.u0.grid() == grid)) throw InvalidArgument("solve_parabolic: u0 grid mismatch");
  if (!(prob.Lambda1 > 0.0) || prob.Lambda2 < prob.Lambda1) {
    throw InvalidArgument("solve_parabolic: need 0 < Lambda1 <= Lambda2");
  }
  const Perturbation& pert = prob.perturbation;
  pert.G.validate();
  if (pert.active() && !(pert.lambda > 0.0)) throw InvalidArgument("solve_parabolic: lambda must be positive");

  Solution sol;
  sol.grid = grid;
  sol.p = prob.p;
  sol.perturbation = pert;
  sol.u0 = prob.u0;
  if (prob.weight) {
    if (!(prob.weight->grid() == grid)) throw InvalidArgument("solve_parabolic: weight grid mismatch");
    for (double a : prob.weight->values()) {
      if (a < prob.Lambda1 || a > prob.Lambda2) throw InvalidArgument("solve_parabolic: weight outside [Lambda1, Lambda2]");
    }
    sol.weight.assign(prob.weight->values().begin(), prob.weight->values().end());
  }
  if (grid.dim() <= 2 && !exponents(grid.dim(), prob.p).above_p1) {
    std::ostringstream msg;
    msg << "p = " << prob.p << " does not exceed p_1 = " << exponents(grid.dim(), prob.p).p1;
    sol.warnings.push_back(msg.str());
  }

  const double radius = prob.mollify_radius > 0.0 ? prob.mollify_radius : 2.0 * grid.h();
  sol.forcing = prob.mu.is_zero() ? SpaceTimeField(grid) : mollify_radius(prob.mu, radius);
  if (prob.extra_forcing) {
    if (!(prob.extra_forcing->grid() == grid)) throw InvalidArgument("solve_parabolic: extra forcing grid mismatch");
    sol.forcing += *prob.extra_forcing;
  }

  const bool absorption = pert.active() && pert.role == Perturbation::Role::absorption;
  const bool source = pert.active() && pert.role == Perturbation::Role::source;
  const std::size_t n = grid.cell_count();
  std::vector<double> prev(prob.u0.values().begin(), prob.u0.values().end());
  std::vector<double> u = prev;
  const DiscreteGradient D(grid);

  for (int s = 0; s < grid.steps(); ++s) {
    EnergySpec spec;
    spec.p = prob.p;
    spec.weight = sol.weight;
    spec.mass = 1.0 / grid.tau();
    spec.reference = prev;
    spec.rhs.assign(sol.forcing.slice(s).begin(), sol.forcing.slice(s).end());
    if (source) {
      for (std::size_t i = 0; i < n; ++i) {
        const double g = pert.lambda * pert.G.value(prev[i]);
        spec.rhs[i] += g;
        sol.forcing.at(s, i) += g;
      }
      if (!all_finite(spec.rhs)) {
        sol.status = Solution::Status::blow_up;
        sol.blow_up_step = s;
        return sol;
      }
    }
    if (absorption) {
      spec.G = pert.G;
      spec.lambda = pert.lambda;
    }
    const Energy energy(grid, spec);
    const MinimizeResult r = energy.minimize(u, opts);
    sol.stats.push_back({r.iterations, r.residual, r.converged});
    if (!r.converged || !all_finite(u)) {
      if (source && !all_finite(u)) {
        sol.status = Solution::Status::blow_up;
        sol.blow_up_step = s;
        return sol;
      }
      std::ostringstream msg;
      msg << "solve_parabolic: step " << s << " did not converge, residual " << r.residual;
      throw SolverError(msg.str(), r.residual);
    }

    double gp = 0.0;
    std::array<double, 3> g{};
    for (std::size_t c = 0; c < D.extended_count(); ++c) {
      D.apply(u, c, g);
      double q = 0.0;
      for (int k = 0; k < grid.dim(); ++k) q += g[k] * g[k];
      gp += std::pow(q, 0.5 * prob.p);
    }
    sol.gradient_norm.push_back(std::pow(gp * grid.cell_volume(), 1.0 / prob.p));
    double gm = 0.0;
    if (pert.active()) {
      for (double v : u) gm += std::abs(pert.lambda * pert.G.value(v));
    }
    sol.G_mass.push_back(gm * grid.cell_volume());
    sol.u.emplace_back(grid, u);
    prev = u;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Level-set decay

DecayReport levelset_decay_check(const Solution& sol, double data_mass, int samples) {
  if (samples < 2) throw InvalidArgument("levelset_decay_check: need at least 2 samples");
  DecayReport out;
  const double sup = sol.sup_abs();
  if (sol.u.empty() || !(sup > 0.0) || !(data_mass > 0.0)) return out;
  const SpaceTimeField U = sol.field();
  const int N = sol.grid.dim();
  const double pc = sol.p - 1.0 + sol.p / N;
  const double denom = std::pow(data_mass, (sol.p + N) / static_cast<double>(N));
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int used = 0;
  for (int j = 0; j < samples; ++j) {
    const double k = sup * 0.05 * std::pow(16.0, static_cast<double>(j) / (samples - 1));
    const double m = level_set_measure(U, k);
    out.k.push_back(k);
    out.m.push_back(m);
    out.C_hat = std::max(out.C_hat, m * std::pow(k, pc) / denom);
    if (m > 0.0) {
      const double x = std::log(k), y = std::log(m);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++used;
    }
  }
  if (used >= 2) {
    out.exponent = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    out.defined = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Renormalized formulation

double SmoothTruncation::S(double r) const {
  const double a = std::abs(r);
  const double sg = r < 0.0 ? -1.0 : 1.0;
  if (a <= k) return r;
  if (a >= 2.0 * k) return sg * 1.5 * k;
  const double s = a / k - 1.0;
  return sg * (k + k * (s - s * s * s + 0.5 * s * s * s * s));
}

double SmoothTruncation::dS(double r) const {
  const double a = std::abs(r);
  if (a <= k) return 1.0;
  if (a >= 2.0 * k) return 0.0;
  const double s = a / k - 1.0;
  return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
}

double SmoothTruncation::d2S(double r) const {
  const double a = std::abs(r);
  if (a <= k || a >= 2.0 * k) return 0.0;
  const double sg = r < 0.0 ? -1.0 : 1.0;
  const double s = a / k - 1.0;
  return sg * (-6.0 * s + 6.0 * s * s) / k;
}

std::vector<TestFunction> standard_test_functions(const Grid& grid) {
  std::vector<TestFunction> out;
  for (int a : {1, 2}) {
    for (int b : {1, 2}) {
      TestFunction tf;
      tf.name = "a" + std::to_string(a) + "b" + std::to_string(b);
      tf.phi = [grid, a, b](const Point& x, double t) {
        double v = std::pow((grid.T() - t) / grid.T(), a);
        for (int k = 0; k < grid.dim(); ++k) {
          const double L = grid.upper(k) - grid.lower(k);
          v *= std::sin(b * std::numbers::pi * (x[k] - grid.lower(k)) / L);
        }
        return v;
      };
      out.push_back(std::move(tf));
    }
  }
  return out;
}

std::vector<ResidualEntry> renormalized_residual(const Solution& sol, const std::vector<double>& k_list) {
  return renormalized_residual(sol, k_list, standard_test_functions(sol.grid));
}

std::vector<ResidualEntry> renormalized_residual(const Solution& sol, const std::vector<double>& k_list,
                                                 const std::vector<TestFunction>& phis) {
  const Grid& grid = sol.grid;
  const std::size_t n = grid.cell_count();
  const int steps = static_cast<int>(sol.u.size());
  const double V = grid.cell_volume();
  const double tau = grid.tau();
  const DiscreteGradient D(grid);
  const int N = grid.dim();

  std::vector<FluxField> flux;
  flux.reserve(steps);
  for (int s = 0; s < steps; ++s) flux.push_back(fluxes(sol, D, sol.u[s].values()));

  std::vector<ResidualEntry> out;
  for (const auto& tf : phis) {
    // phi at t_0 .. t_steps on cell centers.
    std::vector<std::vector<double>> phi(steps + 1, std::vector<double>(n));
    for (int s = 0; s <= steps; ++s) {
      for (std::size_t i = 0; i < n; ++i) phi[s][i] = tf.phi(grid.center(i), grid.step_start(s));
    }
    for (double k : k_list) {
      const SmoothTruncation S{k};
      double total = 0.0, magnitude = 0.0;
      auto add = [&](double v) {
        total += v;
        magnitude += std::abs(v);
      };
      // Time derivative after summation by parts: sum_s phi^{s} (S(u^{s+1}) - S(u^{s})), phi at t_s.
      for (int s = 0; s < steps; ++s) {
        const auto& before = s == 0 ? sol.u0 : sol.u[s - 1];
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += phi[s][i] * (S.S(sol.u[s][i]) - S.S(before[i]));
        add(acc * V);
      }
      std::array<double, 3> gphi{};
      for (int s = 0; s < steps; ++s) {
        const auto& u = sol.u[s].values();
        const auto& ph = phi[s + 1];
        double diffusion = 0.0, curvature = 0.0;
        for (std::size_t c = 0; c < D.extended_count(); ++c) {
          // Each gradient component lives between two cells; S' and S'' phi are
          // averaged over those two cells (exterior values are u = phi = 0).
          const auto& st = D.stencil(c);
          const double u0c = st[0] == DiscreteGradient::npos ? 0.0 : u[st[0]];
          const double p0c = st[0] == DiscreteGradient::npos ? 0.0 : ph[st[0]];
          D.apply(ph, c, gphi);
          const auto& F = flux[s].flux[c];
          const auto& G = flux[s].grad[c];
          for (int q = 0; q < N; ++q) {
            const std::size_t j = st[1 + q];
            const double u1 = j == DiscreteGradient::npos ? 0.0 : u[j];
            const double p1 = j == DiscreteGradient::npos ? 0.0 : ph[j];
            diffusion += 0.5 * (S.dS(u0c) + S.dS(u1)) * F[q] * gphi[q];
            curvature += 0.5 * (S.d2S(u0c) * p0c + S.d2S(u1) * p1) * F[q] * G[q];
          }
        }
        add(tau * V * diffusion);
        add(tau * V * curvature);
        double data = 0.0;
        const bool absorption =
            sol.perturbation.active() && sol.perturbation.role == Perturbation::Role::absorption;
        for (std::size_t i = 0; i < n; ++i) {
          double f = sol.forcing.at(s, i);
          if (absorption) f -= sol.perturbation.lambda * sol.perturbation.G.value(u[i]);
          data += f * S.dS(u[i]) * ph[i];
        }
        add(-tau * V * data);
      }
      out.push_back({k, tf.name, total, magnitude});
    }
  }
  return out;
}

std::vector<ConcentrationEntry> energy_concentration(const Solution& sol, const std::vector<double>& m_list,
                                                     const std::function<double(const Point&, double)>& phi) {
  const Grid& grid = sol.grid;
  std::vector<ConcentrationEntry> out;
  std::vector<std::vector<double>> gnorm;
  for (const auto& f : sol.u) gnorm.push_back(gradient_norm(grid, f.values()));
  for (double m : m_list) {
    if (!(m > 0.0)) throw InvalidArgument("energy_concentration: m must be positive");
    double sum = 0.0;
    for (std::size_t s = 0; s < sol.u.size(); ++s) {
      const double t = grid.step_end(static_cast<int>(s));
      for (std::size_t i = 0; i < grid.cell_count(); ++i) {
        const double v = sol.u[s][i];
        if (v < m || v >= 2.0 * m) continue;
        const double w = phi ? phi(grid.center(i), t) : 1.0;
        sum += w * weight_at(sol, i) * std::pow(gnorm[s][i], sol.p);
      }
    }
    out.push_back({m, sum * grid.cell_volume() * grid.tau() / m});
  }
  return out;
}

ComparisonResult comparison_solve(const ParabolicProblem& lower, const ParabolicProblem& upper,
                                  const MinimizeOptions& opts) {
  if (!(lower.grid == upper.grid)) throw InvalidArgument("comparison_solve: grids differ");
  if (lower.p != upper.p) throw InvalidArgument("comparison_solve: exponents differ");
  if (lower.mollify_radius != upper.mollify_radius) throw InvalidArgument("comparison_solve: mollification differs");
  if (!less_equal(lower.mu, upper.mu)) throw InvalidArgument("comparison_solve: data not ordered (mu <= nu fails)");
  for (std::size_t i = 0; i < lower.u0.size(); ++i) {
    if (lower.u0[i] > upper.u0[i]) throw InvalidArgument("comparison_solve: initial data not ordered");
  }
  ComparisonResult out;
  out.u = solve_parabolic(lower, opts);
  out.v = solve_parabolic(upper, opts);
  out.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < out.u.u.size(); ++s) {
    for (std::size_t i = 0; i < lower.grid.cell_count(); ++i) {
      out.max_excess = std::max(out.max_excess, out.u.u[s][i] - out.v.u[s][i]);
    }
  }
  out.holds = out.max_excess <= 2.0 * opts.tol;
  return out;
}

}  // namespace qplab
