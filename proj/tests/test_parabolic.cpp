#include <cmath>

#include <gtest/gtest.h>

#include "qplab/parabolic.hpp"

using namespace qplab;

namespace {

Grid line(int cells, double T = 0.2, int steps = 10) {
  GridSpec s;
  s.cells = {cells, 1, 1};
  s.T = T;
  s.steps = steps;
  return Grid(s);
}

ParabolicProblem problem(const Grid& g, double p) {
  ParabolicProblem prob;
  prob.grid = g;
  prob.mu = SpaceTimeMeasure(g);
  prob.u0 = Field(g);
  prob.p = p;
  return prob;
}

Field bump(const Grid& g, double a) {
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = a * std::cos(M_PI * g.center(i)[0] / 2.0);
  return f;
}

}  // namespace

TEST(Parabolic, Truncate) {
  EXPECT_EQ(truncate(3.0, 2.0), 2.0);
  EXPECT_EQ(truncate(-3.0, 2.0), -2.0);
  EXPECT_EQ(truncate(0.5, 2.0), 0.5);
  EXPECT_THROW(truncate(1.0, 0.0), InvalidArgument);
}

TEST(Parabolic, SmoothTruncation) {
  const SmoothTruncation s{1.0};
  EXPECT_EQ(s.dS(0.5), 1.0);
  EXPECT_EQ(s.dS(2.5), 0.0);
  EXPECT_NEAR(s.dS(1.5), 0.5, 1e-15);
  EXPECT_NEAR(s.S(-0.3), -0.3, 1e-15);
  const double h = 1e-6;
  for (double r : {0.2, 1.3, 1.7, -1.4}) {
    EXPECT_NEAR((s.S(r + h) - s.S(r - h)) / (2 * h), s.dS(r), 1e-8);
    EXPECT_NEAR((s.dS(r + h) - s.dS(r - h)) / (2 * h), s.d2S(r), 1e-6);
  }
}

TEST(Parabolic, ZeroProblemStaysZero) {
  const Grid g = line(30);
  const Solution sol = solve_parabolic(problem(g, 2.5));
  EXPECT_EQ(sol.status, Solution::Status::ok);
  EXPECT_EQ(sol.sup_abs(), 0.0);
  const DecayReport d = levelset_decay_check(sol, 1.0);
  EXPECT_EQ(d.C_hat, 0.0);
  for (const auto& e : renormalized_residual(sol, {0.5, 1.0})) EXPECT_EQ(e.residual, 0.0);
}

TEST(Parabolic, HeatEquationDecaysEigenmode) {
  // u = e^{-pi^2 t / 4} cos(pi x / 2) for p = 2.
  const Grid g = line(100, 0.2, 40);
  ParabolicProblem prob = problem(g, 2.0);
  prob.u0 = bump(g, 1.0);
  const Solution sol = solve_parabolic(prob, {1e-11, 50});
  const double exact = std::exp(-M_PI * M_PI * 0.2 / 4.0);
  const std::size_t mid = g.locate({0.005, 0, 0});
  EXPECT_NEAR(sol.u.back()[mid] / std::cos(M_PI * g.center(mid)[0] / 2.0), exact, 0.03 * exact);
}

TEST(Parabolic, MassOfNonnegativeSolutionDoesNotGrow) {
  const Grid g = line(60, 0.2, 10);
  ParabolicProblem prob = problem(g, 3.0);
  prob.u0 = bump(g, 1.0);
  const Solution sol = solve_parabolic(prob, {1e-10, 200});
  double prev = integrate(prob.u0);
  for (const Field& f : sol.u) {
    const double m = integrate(f);
    EXPECT_LE(m, prev + 1e-9);
    prev = m;
  }
}

TEST(Parabolic, ConcentrationOfZeroIsZero) {
  const Grid g = line(20);
  const Solution sol = solve_parabolic(problem(g, 2.0));
  for (const auto& e : energy_concentration(sol, {0.1, 1.0})) EXPECT_EQ(e.value, 0.0);
  EXPECT_THROW(energy_concentration(sol, {0.0}), InvalidArgument);
}

TEST(Parabolic, ConcentrationVanishesAboveTheSupremum) {
  const Grid g = line(40);
  ParabolicProblem prob = problem(g, 2.0);
  prob.u0 = bump(g, 1.0);
  const Solution sol = solve_parabolic(prob);
  const auto e = energy_concentration(sol, {0.1, 2.0});
  EXPECT_GT(e[0].value, 0.0);
  EXPECT_EQ(e[1].value, 0.0);
}

TEST(Comparison, IdenticalData) {
  const Grid g = line(30);
  ParabolicProblem prob = problem(g, 2.5);
  prob.u0 = bump(g, 0.5);
  const ComparisonResult r = comparison_solve(prob, prob, {1e-10, 200});
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.max_excess, 0.0, 1e-12);
}

TEST(Comparison, ExtraDiracRaisesTheSolution) {
  const Grid g = line(40);
  ParabolicProblem lo = problem(g, 2.0);
  ParabolicProblem hi = lo;
  hi.mu = hi.mu + dirac(g, {0.2, 0, 0}, 0.1, 1.0);
  const ComparisonResult r = comparison_solve(lo, hi, {1e-10, 50});
  EXPECT_TRUE(r.holds);
  // Before the atom fires both solutions vanish, so the excess is exactly 0.
  EXPECT_LE(r.max_excess, 0.0);
  EXPECT_GT(r.v.sup_abs(), 0.0);
  EXPECT_EQ(r.u.sup_abs(), 0.0);
}

TEST(Comparison, OrderedInitialDataP3) {
  const Grid g = line(40);
  ParabolicProblem lo = problem(g, 3.0);
  ParabolicProblem hi = lo;
  lo.u0 = bump(g, 0.5);
  hi.u0 = bump(g, 1.0);
  EXPECT_TRUE(comparison_solve(lo, hi, {1e-10, 200}).holds);
}

TEST(Comparison, Preconditions) {
  const Grid g = line(20);
  ParabolicProblem lo = problem(g, 2.0);
  ParabolicProblem hi = lo;
  hi.u0 = bump(g, 1.0);
  EXPECT_THROW(comparison_solve(hi, lo), InvalidArgument);
  ParabolicProblem other = problem(g, 3.0);
  EXPECT_THROW(comparison_solve(lo, other), InvalidArgument);
  ParabolicProblem mu_hi = problem(g, 2.0);
  mu_hi.mu = dirac(g, {0, 0, 0}, 0.1, 1.0);
  EXPECT_THROW(comparison_solve(mu_hi, lo), InvalidArgument);
}

TEST(Parabolic, SourceBlowUpIsReported) {
  // u_t - u_xx = 200 e^u: the lagged exponential source overflows.
  const Grid g = line(20, 2.0, 20);
  ParabolicProblem prob = problem(g, 2.0);
  prob.u0 = bump(g, 5.0);
  prob.perturbation = {Perturbation::Role::source, Nonlinearity::exponential(1.0, 1.0), 200.0};
  Solution sol;
  try {
    sol = solve_parabolic(prob);
  } catch (const SolverError&) {
    GTEST_SKIP() << "step solver failed before the iterate overflowed";
  }
  EXPECT_EQ(sol.status, Solution::Status::blow_up);
  EXPECT_GE(sol.blow_up_step, 0);
}

TEST(Parabolic, WarnsAtOrBelowP1) {
  const Grid g = line(10);
  EXPECT_FALSE(solve_parabolic(problem(g, 1.4)).warnings.empty());
  EXPECT_TRUE(solve_parabolic(problem(g, 2.0)).warnings.empty());
}

TEST(Parabolic, RejectsBadInputs) {
  const Grid g = line(10);
  EXPECT_THROW(solve_parabolic(problem(g, 1.0)), InvalidArgument);
  EXPECT_THROW(solve_parabolic(problem(g, 2.0), {-1.0, 10}), InvalidArgument);
  ParabolicProblem prob = problem(g, 2.0);
  prob.u0 = Field(line(11));
  EXPECT_THROW(solve_parabolic(prob), InvalidArgument);
}
