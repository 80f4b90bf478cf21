#include <cmath>

#include <gtest/gtest.h>

#include "qplab/pipelines.hpp"

using namespace qplab;

namespace {

Grid line(int cells, double T = 0.2, int steps = 8) {
  GridSpec s;
  s.cells = {cells, 1, 1};
  s.T = T;
  s.steps = steps;
  return Grid(s);
}

}  // namespace

TEST(Constants, ExampleRow) {
  const SmallnessConstants c = smallness_constants(3, 2.0, 2.0, 1.0, 1.0, 1.0);
  EXPECT_EQ(c.beta_p, 1.0);
  EXPECT_EQ(c.c_p, 2.0);
  EXPECT_NEAR(c.A1, 8.0, 1e-12);
  EXPECT_NEAR(c.lambda0, 0.125, 1e-12);
  EXPECT_THROW(smallness_constants(3, 2.0, 1.0, 1.0, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(smallness_constants(3, 2.0, 2.0, 0.0, 1.0, 1.0), InvalidArgument);
}

TEST(Constants, SingularRangeWeights) {
  // e = (2 - p)/(p - 1) = 1 at p = 1.5.
  const SmallnessConstants c = smallness_constants(2, 1.5, 1.0, 1.0, 1.0, 1.0);
  EXPECT_NEAR(c.beta_p, 3.0, 1e-14);
  EXPECT_NEAR(c.c_p, 4.0, 1e-14);
}

TEST(Composition, ZeroMeasure) {
  const Grid g = line(20);
  EXPECT_EQ(wolff_composition_check(SpatialMeasure(g), 2.0, 2.0, 1.0).M_hat, 0.0);
  EXPECT_THROW(wolff_composition_check(SpatialMeasure(g), 2.0, 1.0, 1.0), InvalidArgument);
}

TEST(Shadow, BoundedAndExploding) {
  const auto small = shadow_recursion(0.1, 3.0, 0.0, 40);
  EXPECT_NEAR(small.back(), 0.1001, 1e-4);
  const auto big = shadow_recursion(10.0, 3.0, 0.0, 10);
  EXPECT_GT(big.back(), 1e6);
}

TEST(Subcritical, AbsorptionWithZeroData) {
  const Grid g = line(20);
  ParabolicProblem prob;
  prob.grid = g;
  prob.mu = SpaceTimeMeasure(g);
  prob.u0 = Field(g);
  prob.perturbation = {Perturbation::Role::absorption, Nonlinearity::power(1.5), 1.0};
  const SubcriticalReport r = subcritical_absorption(prob, {1, 2});
  ASSERT_EQ(r.levels.size(), 2u);
  for (const auto& l : r.levels) EXPECT_EQ(l.G_mass, 0.0);
  EXPECT_TRUE(r.mass_bound_holds);
  EXPECT_EQ(r.finest.sup_abs(), 0.0);
}

TEST(Subcritical, AbsorptionMassBound) {
  const Grid g = line(40);
  ParabolicProblem prob;
  prob.grid = g;
  prob.mu = dirac(g, {0, 0, 0}, 0.05, 2.0);
  prob.u0 = Field(g);
  prob.perturbation = {Perturbation::Role::absorption, Nonlinearity::power(1.5), 1.0};
  const SubcriticalReport r = subcritical_absorption(prob, {1, 2, 4});
  EXPECT_TRUE(r.mass_bound_holds);
  for (const auto& l : r.levels) EXPECT_LE(l.G_mass, l.bound);
}

TEST(Subcritical, SourceWithZeroLambdaRunsOnce) {
  const Grid g = line(20);
  ParabolicProblem prob;
  prob.grid = g;
  prob.mu = dirac(g, {0, 0, 0}, 0.05, 0.1);
  prob.u0 = Field(g);
  prob.perturbation = {Perturbation::Role::source, Nonlinearity::power(1.5), 0.0};
  const SourceReport r = subcritical_source(prob, 1.0);
  EXPECT_EQ(r.trace.records.size(), 1u);
  EXPECT_EQ(r.trace.status, IterationTrace::Status::converged);
}

TEST(Subcritical, SourceBudgetAndRole) {
  const Grid g = line(20);
  ParabolicProblem prob;
  prob.grid = g;
  prob.mu = dirac(g, {0, 0, 0}, 0.05, 1.0);
  prob.u0 = Field(g);
  prob.perturbation = {Perturbation::Role::source, Nonlinearity::power(1.5), 0.5};
  EXPECT_THROW(subcritical_source(prob, 1.0), InvalidArgument);
  prob.perturbation.role = Perturbation::Role::absorption;
  EXPECT_THROW(subcritical_source(prob, 10.0), InvalidArgument);
}

TEST(Subcritical, SmallSourceConverges) {
  const Grid g = line(30);
  ParabolicProblem prob;
  prob.grid = g;
  prob.mu = dirac(g, {0, 0, 0}, 0.05, 0.05);
  prob.u0 = Field(g);
  prob.perturbation = {Perturbation::Role::source, Nonlinearity::power(1.5), 0.05};
  const SourceReport r = subcritical_source(prob, 1.0, 30, 1e-6, 3, {1e-10, 200});
  EXPECT_EQ(r.trace.status, IterationTrace::Status::converged);
  EXPECT_TRUE(r.trace.monotone);
}

TEST(Absorption, DataEqualToTheBound) {
  const Grid g = line(40);
  const SpatialMeasure omega = dirac(g, {0.1, 0, 0}, 1.0);
  AbsorptionInput in;
  in.omega = omega;
  in.F.assign(g.steps(), 0.5);
  in.mu = product(omega, in.F);
  in.u0 = Field(g);
  in.G = Nonlinearity::power(1.5);
  const AbsorptionReport r = absorption_general(in, {1, 2, 4});
  EXPECT_TRUE(r.sequences_monotone);
  EXPECT_TRUE(r.mass_bound_holds);
  EXPECT_TRUE(r.bound_checked);
  EXPECT_TRUE(r.bound_holds);
  for (std::size_t k = 1; k < r.levels.size(); ++k) {
    EXPECT_GE(r.levels[k].data_variation, r.levels[k - 1].data_variation - 1e-12);
  }
}

TEST(Absorption, RejectsDataAboveTheBound) {
  const Grid g = line(20);
  AbsorptionInput in;
  in.omega = dirac(g, {0.1, 0, 0}, 1.0);
  in.F.assign(g.steps(), 0.5);
  in.mu = product(in.omega, std::vector<double>(g.steps(), 1.0));
  in.u0 = Field(g);
  in.G = Nonlinearity::power(1.5);
  EXPECT_THROW(absorption_general(in, {1}), InvalidArgument);
}

TEST(ExpGate, ZeroMeasurePassesAndScales) {
  const Grid g = line(40);
  const ExpGateReport z = exponential_absorption_gate(SpatialMeasure(g), 2.0, 2.0, 1.0, 1);
  EXPECT_TRUE(z.pass);
  EXPECT_EQ(z.maximal_norm, 0.0);
  // M^{eta} is homogeneous of degree 1/(p-1) in omega.
  const SpatialMeasure w = dirac(g, {0, 0, 0}, 1.0);
  const ExpGateReport a = exponential_absorption_gate(w, 2.0, 2.0, 1.0, 1, 0.0, 1.0);
  const ExpGateReport b = exponential_absorption_gate(w.scaled(1e-3), 2.0, 2.0, 1.0, 1, 0.0, 1.0);
  EXPECT_NEAR(b.maximal_norm, 1e-3 * a.maximal_norm, 1e-9 * a.maximal_norm);
  EXPECT_TRUE(b.pass);
  EXPECT_THROW(exponential_absorption_gate(w, 2.0, 2.0, 1.0, 2, 2.0), InvalidArgument);
}

TEST(PowerSource, ZeroDataGivesZero) {
  const Grid g = line(20);
  PowerSourceInput in;
  in.omega = SpatialMeasure(g);
  in.u0 = Field(g);
  in.q = 2.0;
  in.lambda = 0.1;
  const PowerSourceReport r = iterate_power_source(in);
  EXPECT_TRUE(r.gate_passed);
  EXPECT_EQ(r.solution.sup_abs(), 0.0);
  EXPECT_EQ(r.trace.status, IterationTrace::Status::converged);
}

TEST(ExpSource, ZeroDataGivesZero) {
  const Grid g = line(20);
  ExpSourceInput in;
  in.omega = SpatialMeasure(g);
  in.u0 = Field(g);
  in.b0 = 0.1;
  const ExpSourceReport r = iterate_exponential_source(in);
  EXPECT_EQ(r.solution.sup_abs(), 0.0);
  EXPECT_TRUE(r.envelope_holds);
}

TEST(ExpSource, RejectsSmallExponent) {
  const Grid g = line(20);
  ExpSourceInput in;
  in.omega = SpatialMeasure(g);
  in.u0 = Field(g);
  in.p = 3.0;
  in.beta = 1.0;
  in.l = 2;
  EXPECT_THROW(iterate_exponential_source(in), InvalidArgument);
}

TEST(Trace, StatusNames) {
  EXPECT_STREQ(status_name(IterationTrace::Status::converged), "converged");
  EXPECT_STREQ(status_name(IterationTrace::Status::blow_up), "blow-up");
  EXPECT_STREQ(status_name(IterationTrace::Status::cap), "cap");
}
