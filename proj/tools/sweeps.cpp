#include "sweeps.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace qplab::cli {
namespace {

// sum_k a_k prod_d sin(k pi (x_d - lo_d) / L_d), k = 1..3.
double modes(const Grid& grid, const Point& x, const std::array<double, 3>& a) {
  double sum = 0.0;
  for (int k = 1; k <= 3; ++k) {
    double prod = 1.0;
    for (int d = 0; d < grid.dim(); ++d) {
      prod *= std::sin(k * std::numbers::pi * (x[d] - grid.lower(d)) / (grid.upper(d) - grid.lower(d)));
    }
    sum += a[k - 1] * prod;
  }
  return sum;
}

double bump(const Grid& grid, const Point& x) {
  double prod = 1.0;
  for (int d = 0; d < grid.dim(); ++d) {
    prod *= std::sin(std::numbers::pi * (x[d] - grid.lower(d)) / (grid.upper(d) - grid.lower(d)));
  }
  return prod;
}

}  // namespace

std::pair<ParabolicProblem, ParabolicProblem> ordered_pair(const Grid& grid, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  const std::array<double, 3> a0{sym(rng), sym(rng), sym(rng)};
  const std::array<double, 3> af{sym(rng), sym(rng), sym(rng)};
  const double gap0 = pos(rng);
  const double gapf = pos(rng);
  const double rate = sym(rng);

  ParabolicProblem lower;
  lower.grid = grid;
  lower.p = p;
  lower.u0 = Field(grid);
  ParabolicProblem upper = lower;
  upper.u0 = Field(grid);
  SpaceTimeField fl(grid), fu(grid);
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const Point x = grid.center(i);
    const double b = bump(grid, x);
    lower.u0[i] = modes(grid, x, a0);
    upper.u0[i] = lower.u0[i] + gap0 * b;
    for (int s = 0; s < grid.steps(); ++s) {
      const double t = grid.step_midpoint(s);
      fl.at(s, i) = modes(grid, x, af) * (1.0 + rate * t / grid.T());
      fu.at(s, i) = fl.at(s, i) + gapf * b;
    }
  }
  lower.mu = density_measure(fl);
  upper.mu = density_measure(fu);

  const bool with_atom = pos(rng) < 0.5;
  const bool with_absorption = pos(rng) < 0.5;
  Point x{};
  for (int d = 0; d < grid.dim(); ++d) {
    const double L = grid.upper(d) - grid.lower(d);
    x[d] = grid.lower(d) + L * (0.25 + 0.5 * pos(rng));
  }
  const double t = grid.T() * pos(rng);
  const double m = sym(rng);
  const double dm = pos(rng);
  const double q = 1.0 + pos(rng);
  if (with_atom) {
    lower.mu += dirac(grid, x, t, m);
    upper.mu += dirac(grid, x, t, m + dm);
  }
  if (with_absorption) {
    lower.perturbation = Perturbation{Perturbation::Role::absorption, Nonlinearity::power(q), 1.0};
    upper.perturbation = lower.perturbation;
  }
  return {lower, upper};
}

}  // namespace qplab::cli
