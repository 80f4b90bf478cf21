#include <cmath>

#include <gtest/gtest.h>

#include "qplab/elliptic.hpp"
#include "qplab/perturbation.hpp"

using namespace qplab;

namespace {

Grid line(int cells) {
  GridSpec s;
  s.cells = {cells, 1, 1};
  return Grid(s);
}

EllipticProblem problem(const Grid& g, const SpatialMeasure& omega, double p) {
  EllipticProblem prob;
  prob.grid = g;
  prob.omega = omega;
  prob.p = p;
  return prob;
}

}  // namespace

TEST(Perturbation, EFunction) {
  EXPECT_EQ(E_function(0.0, 1), 0.0);
  EXPECT_NEAR(E_function(1.0, 2), std::exp(1.0) - 2.0, 1e-14);
  EXPECT_NEAR(E_function(1e-3, 3) / 1e-9, 1.0 / 6.0, 1e-3 / 6.0);
  double prev = 0.0;
  for (double s = 0.0; s < 5.0; s += 0.25) {
    const double e = E_function(s, 3);
    EXPECT_GE(e, prev);
    prev = e;
  }
  EXPECT_THROW(E_function(1.0, 0), InvalidArgument);
}

TEST(Perturbation, PrimitiveMatchesValue) {
  for (const Nonlinearity& g : {Nonlinearity::power(1.5), Nonlinearity::exponential(0.5, 2.0),
                                Nonlinearity::truncated_exp(1.0, 1.5, 2)}) {
    for (double u : {-1.3, -0.2, 0.4, 1.1}) {
      const double h = 1e-5;
      EXPECT_NEAR((g.primitive(u + h) - g.primitive(u - h)) / (2 * h), g.value(u), 1e-6 * (1 + std::abs(g.value(u))))
          << g.name();
      EXPECT_NEAR((g.value(u + h) - g.value(u - h)) / (2 * h), g.derivative(u), 1e-5 * (1 + std::abs(g.derivative(u))))
          << g.name();
    }
  }
}

TEST(Energy, GradientMatchesFiniteDifferences) {
  GridSpec s;
  s.dim = 2;
  s.lower = {-1.0, -1.0, 0.0};
  s.cells = {5, 4, 1};
  const Grid g(s);
  for (double p : {1.5, 2.0, 3.0}) {
    EnergySpec spec;
    spec.p = p;
    spec.mass = 2.0;
    spec.reference.assign(g.cell_count(), 0.1);
    spec.rhs.assign(g.cell_count(), 1.0);
    spec.G = Nonlinearity::power(1.5);
    spec.lambda = 0.7;
    const Energy e(g, spec);
    std::vector<double> u(g.cell_count());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(1.0 + 0.7 * i);
    std::vector<double> grad(u.size());
    e.gradient(u, grad);
    for (std::size_t i = 0; i < u.size(); ++i) {
      auto up = u, dn = u;
      up[i] += 1e-6;
      dn[i] -= 1e-6;
      EXPECT_NEAR((e.value(up) - e.value(dn)) / 2e-6, grad[i], 1e-6 * (1 + std::abs(grad[i])));
    }
  }
}

TEST(Energy, MinimizeDecreasesEnergy) {
  const Grid g = line(50);
  EnergySpec spec;
  spec.p = 3.0;
  spec.rhs.assign(g.cell_count(), 1.0);
  const Energy e(g, spec);
  std::vector<double> u(g.cell_count(), 0.0);
  const MinimizeResult r = e.minimize(u, {1e-10, 200});
  ASSERT_TRUE(r.converged);
  for (std::size_t k = 1; k < r.energies.size(); ++k) EXPECT_LT(r.energies[k], r.energies[k - 1]);
}

TEST(Elliptic, GreenFunctionP2) {
  const Grid g = line(200);
  const EllipticResult r = solve_elliptic(problem(g, dirac(g, {0, 0, 0}, 1.0), 2.0));
  for (std::size_t i = 0; i < r.u.size(); ++i) {
    EXPECT_NEAR(r.u[i], 0.5 * (1.0 - std::abs(g.center(i)[0])), 2.0 * g.h());
  }
}

TEST(Elliptic, GreenFunctionP3) {
  const Grid g = line(200);
  const EllipticResult r = solve_elliptic(problem(g, dirac(g, {0, 0, 0}, 1.0), 3.0));
  for (std::size_t i = 0; i < r.u.size(); ++i) {
    EXPECT_NEAR(r.u[i], (1.0 - std::abs(g.center(i)[0])) / std::sqrt(2.0), 3.0 * g.h());
  }
}

TEST(Elliptic, SingularRangeP) {
  // p = 1.5: |u'|^{1/2} = 1/2, u = (1 - |x|)/4.
  const Grid g = line(200);
  const EllipticResult r = solve_elliptic(problem(g, dirac(g, {0, 0, 0}, 1.0), 1.5));
  for (std::size_t i = 0; i < r.u.size(); ++i) {
    EXPECT_NEAR(r.u[i], 0.25 * (1.0 - std::abs(g.center(i)[0])), 3.0 * g.h());
  }
}

TEST(Elliptic, ZeroDataGivesZero) {
  const Grid g = line(20);
  const EllipticResult r = solve_elliptic(problem(g, SpatialMeasure(g), 2.5));
  EXPECT_EQ(r.u.max_abs(), 0.0);
  EXPECT_EQ(check_enca(r.u, SpatialMeasure(g), 2.5).kappa, 0.0);
}

TEST(Elliptic, ComparisonAndMaximumPrinciple) {
  const Grid g = line(80);
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 + g.center(i)[0];
  const SpatialMeasure lo = density_measure(f);
  const SpatialMeasure hi = lo + dirac(g, {0.3, 0, 0}, 0.5);
  const MinimizeOptions opts{1e-10, 200};
  for (double p : {1.7, 2.0, 3.0}) {
    const EllipticResult a = solve_elliptic(problem(g, lo, p), opts);
    const EllipticResult b = solve_elliptic(problem(g, hi, p), opts);
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_LE(a.u[i], b.u[i] + 2 * opts.tol);
      EXPECT_GE(a.u[i], -opts.tol);
    }
  }
}

TEST(Elliptic, LinearInDataForP2) {
  const Grid g = line(60);
  const SpatialMeasure w = dirac(g, {-0.2, 0, 0}, 1.0) + density_measure(Field(g, 0.5));
  const EllipticResult a = solve_elliptic(problem(g, w, 2.0), {1e-12, 50});
  const EllipticResult b = solve_elliptic(problem(g, w.scaled(3.0), 2.0), {1e-12, 50});
  for (std::size_t i = 0; i < a.u.size(); ++i) EXPECT_NEAR(b.u[i], 3.0 * a.u[i], 1e-9);
}

TEST(Elliptic, WeightOutsideBoundsRejected) {
  const Grid g = line(10);
  EllipticProblem prob = problem(g, dirac(g, {0, 0, 0}, 1.0), 2.0);
  prob.weight = Field(g, 3.0);
  prob.Lambda1 = 1.0;
  prob.Lambda2 = 2.0;
  EXPECT_THROW(solve_elliptic(prob), InvalidArgument);
  prob.weight = Field(g, 1.5);
  EXPECT_NO_THROW(solve_elliptic(prob));
}

TEST(Elliptic, KappaStableUnderRefinement) {
  double k[2];
  for (int level = 0; level < 2; ++level) {
    const Grid g = line(level == 0 ? 200 : 400);
    const SpatialMeasure d = dirac(g, {0, 0, 0}, 1.0);
    const EllipticResult r = solve_elliptic(problem(g, d, 2.0));
    k[level] = check_enca(r.u, d, 2.0).kappa;
  }
  EXPECT_NEAR(k[0], k[1], 0.15 * k[1]);
}
