#include "qplab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qplab {

EllipticResult solve_elliptic(const EllipticProblem& prob, const MinimizeOptions& opts) {
  const Grid& grid = prob.grid;
  if (!(prob.p > 1.0)) throw InvalidArgument("solve_elliptic: p must exceed 1");
  if (!(opts.tol > 0.0)) throw InvalidArgument("solve_elliptic: tol must be positive");
  if (!(prob.omega.grid() == grid)) throw InvalidArgument("solve_elliptic: measure grid mismatch");
  if (!(prob.Lambda1 > 0.0) || prob.Lambda2 < prob.Lambda1) {
    throw InvalidArgument("solve_elliptic: need 0 < Lambda1 <= Lambda2");
  }

  EnergySpec spec;
  spec.p = prob.p;
  if (prob.weight) {
    if (!(prob.weight->grid() == grid)) throw InvalidArgument("solve_elliptic: weight grid mismatch");
    for (double a : prob.weight->values()) {
      if (a < prob.Lambda1 || a > prob.Lambda2) throw InvalidArgument("solve_elliptic: weight outside [Lambda1, Lambda2]");
    }
    spec.weight.assign(prob.weight->values().begin(), prob.weight->values().end());
  }
  const double radius = prob.mollify_radius > 0.0 ? prob.mollify_radius : 2.0 * grid.h();
  const SpatialMeasure data = mollify_radius(prob.omega, radius);
  spec.rhs.assign(data.density().values().begin(), data.density().values().end());

  EllipticResult out{Field(grid), data.density(), {}};
  std::vector<double> u(grid.cell_count(), 0.0);
  if (prob.omega.is_zero()) {
    out.stats.converged = true;
    out.stats.energies.push_back(0.0);
    return out;
  }
  if (prob.p != 2.0) {
    // The p = 2 solution is a cheap, well-scaled starting point.
    EnergySpec linear = spec;
    linear.p = 2.0;
    Energy(grid, linear).minimize(u, opts);
  }
  const Energy energy(grid, spec);
  out.stats = energy.minimize(u, opts);
  if (!out.stats.converged) {
    std::ostringstream msg;
    msg << "solve_elliptic: no convergence after " << out.stats.iterations << " iterations, residual "
        << out.stats.residual;
    throw SolverError(msg.str(), out.stats.residual);
  }
  out.u = Field(grid, std::move(u));
  return out;
}

EncaCheck check_enca(const Field& u, const SpatialMeasure& omega, double p, double kappa_cap,
                     const RadialQuadrature& q, double floor) {
  const Grid& grid = u.grid();
  const double R = 2.0 * grid.diameter();
  const Field wp = wolff_field(omega.positive_part(), p, R, q);
  const Field wm = wolff_field(omega.negative_part(), p, R, q);
  EncaCheck out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    const double w = u[i] > 0.0 ? wp[i] : wm[i];
    out.kappa = std::max(out.kappa, std::abs(u[i]) / std::max(w, floor));
  }
  out.holds = out.kappa <= kappa_cap;
  return out;
}

}  // namespace qplab
