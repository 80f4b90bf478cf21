#include <cmath>

#include <gtest/gtest.h>

#include "qplab/measures.hpp"

using namespace qplab;

namespace {

Grid line(int cells, double T = 1.0, int steps = 4) {
  GridSpec s;
  s.cells = {cells, 1, 1};
  s.T = T;
  s.steps = steps;
  return Grid(s);
}

std::vector<double> constant(const Grid& g, double v) { return std::vector<double>(g.steps(), v); }

}  // namespace

TEST(Measures, DiracVariation) {
  const Grid g = line(20);
  EXPECT_DOUBLE_EQ(dirac(g, {0, 0, 0}, 1.0).total_variation(), 1.0);
  EXPECT_DOUBLE_EQ(dirac(g, {0, 0, 0}, -2.0).total_variation(), 2.0);
  EXPECT_THROW(dirac(g, {1.5, 0, 0}, 1.0), InvalidArgument);
}

TEST(Measures, AtomsMergeAtTheSamePoint) {
  const Grid g = line(20);
  SpatialMeasure m = dirac(g, {0.25, 0, 0}, 1.0) + dirac(g, {0.25, 0, 0}, 2.0) + dirac(g, {-0.5, 0, 0}, 1.0);
  ASSERT_EQ(m.atoms().size(), 2u);
  EXPECT_DOUBLE_EQ(m.mass(), 4.0);
  m -= dirac(g, {0.25, 0, 0}, 3.0);
  EXPECT_EQ(m.atoms().size(), 1u);
}

TEST(Measures, ProductMass) {
  const Grid g = line(20, 1.0, 10);
  EXPECT_NEAR(product(dirac(g, {0, 0, 0}, 1.0), constant(g, 1.0)).mass(), 1.0, 1e-14);
  EXPECT_TRUE(product(dirac(g, {0, 0, 0}, 1.0), constant(g, 0.0)).is_zero());
  EXPECT_NEAR(product(density_measure(Field(g, 1.0)), constant(g, 2.0)).mass(), 4.0, 1e-13);
}

TEST(Measures, MollifyPreservesMassAndConcentrates) {
  const Grid g = line(200);
  const SpatialMeasure d = dirac(g, {0, 0, 0}, 1.0);
  for (int n : {1, 2, 4, 16, 64}) {
    const SpatialMeasure m = mollify(d, n);
    EXPECT_FALSE(m.has_atoms());
    EXPECT_NEAR(m.mass(), 1.0, 1e-10);
  }
  EXPECT_LT(mollify(d, 4).density().max_abs(), mollify(d, 16).density().max_abs());
  EXPECT_TRUE(mollify(SpatialMeasure(g), 3).is_zero());
}

TEST(Measures, MollifyNearBoundaryStaysInsideAndKeepsMass) {
  const Grid g = line(100);
  const SpatialMeasure m = mollify(dirac(g, {0.97, 0, 0}, 2.0), 4);
  EXPECT_NEAR(m.mass(), 2.0, 1e-10);
  for (double v : m.density().values()) EXPECT_GE(v, 0.0);
}

TEST(Measures, SpaceTimeMollifyKeepsMass) {
  const Grid g = line(50, 1.0, 8);
  SpaceTimeMeasure mu = dirac(g, {0.2, 0, 0}, 0.3, 1.5) + product(dirac(g, {-0.4, 0, 0}, 1.0), constant(g, 0.5));
  const SpaceTimeField f = mollify(mu, 3);
  EXPECT_NEAR(integrate(f), mu.mass(), 1e-10);
}

TEST(Measures, InfOfMeasures) {
  const Grid g = line(20);
  const SpatialMeasure a = inf_measures(dirac(g, {0, 0, 0}, 2.0), dirac(g, {0, 0, 0}, 1.0));
  ASSERT_EQ(a.atoms().size(), 1u);
  EXPECT_DOUBLE_EQ(a.atoms()[0].mass, 1.0);
  EXPECT_TRUE(inf_measures(dirac(g, {0, 0, 0}, 1.0), dirac(g, {0.5, 0, 0}, 1.0)).is_zero());
  const SpatialMeasure d = inf_measures(density_measure(Field(g, 1.0)), density_measure(Field(g, 0.5)));
  for (double v : d.density().values()) EXPECT_DOUBLE_EQ(v, 0.5);
  // An atom against a density contributes nothing.
  EXPECT_TRUE(inf_measures(dirac(g, {0, 0, 0}, 1.0), density_measure(Field(g, 3.0))).is_zero());
  EXPECT_THROW(inf_measures(dirac(g, {0, 0, 0}, -1.0), dirac(g, {0, 0, 0}, 1.0)), InvalidArgument);
}

TEST(Measures, InfIsOneLipschitzInVariation) {
  const Grid g = line(30);
  Field a(g), b(g), c(g);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = g.center(i)[0];
    a[i] = 1.0 + x * x;
    b[i] = 1.5 + std::sin(3 * x);
    c[i] = 0.5 + std::cos(2 * x) * std::cos(2 * x);
  }
  const SpatialMeasure nu = density_measure(a) + dirac(g, {0.1, 0, 0}, 1.0);
  const SpatialMeasure th = density_measure(b) + dirac(g, {0.1, 0, 0}, 0.4);
  const SpatialMeasure et = density_measure(c) + dirac(g, {0.1, 0, 0}, 2.0);
  EXPECT_LE(variation_distance(inf_measures(nu, th), inf_measures(nu, et)), variation_distance(th, et) + 1e-12);
}

TEST(Measures, LessEqual) {
  const Grid g = line(20);
  const SpatialMeasure a = dirac(g, {0, 0, 0}, 1.0);
  EXPECT_TRUE(less_equal(a, a + dirac(g, {0, 0, 0}, 0.5)));
  EXPECT_FALSE(less_equal(a + dirac(g, {0, 0, 0}, 0.5), a));
  EXPECT_FALSE(less_equal(a, density_measure(Field(g, 10.0))));
}

TEST(Measures, TruncateRestrict) {
  const Grid g = line(40, 4.0, 20);
  const SpaceTimeMeasure five = density_measure(SpaceTimeField(g, 5.0));
  const SpaceTimeMeasure t = truncate_restrict(five, 2);
  for (int s = 0; s < g.steps(); ++s) {
    const double tm = g.step_midpoint(s);
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      const bool inside = g.boundary_distance(g.center(i)) > 0.5 && tm > 0.5 && tm < 3.5;
      EXPECT_DOUBLE_EQ(t.density().at(s, i), inside ? 2.0 : 0.0);
    }
  }
  // Large n: Q_n covers every cell centre and the bound is inactive.
  const SpaceTimeMeasure big = truncate_restrict(five, 1000);
  for (double v : big.density().values()) EXPECT_DOUBLE_EQ(v, 5.0);
  EXPECT_TRUE(truncate_restrict(SpaceTimeMeasure(g), 3).is_zero());
  EXPECT_THROW(truncate_restrict(dirac(g, {0, 0, 0}, 0.5, 1.0), 2), InvalidArgument);
}

TEST(Measures, RestrictInterior) {
  const Grid g = line(20);
  const SpatialMeasure m = dirac(g, {0.95, 0, 0}, 1.0) + dirac(g, {0.0, 0, 0}, 2.0) + density_measure(Field(g, 1.0));
  const SpatialMeasure r = restrict_interior(m, 0.5);
  ASSERT_EQ(r.atoms().size(), 1u);
  EXPECT_DOUBLE_EQ(r.atoms()[0].mass, 2.0);
  EXPECT_TRUE(less_equal(r, m));
}

TEST(Measures, PositiveAndNegativeParts) {
  const Grid g = line(10, 1.0, 2);
  const SpaceTimeMeasure mu = dirac(g, {0, 0, 0}, 0.3, 2.0) + dirac(g, {0.5, 0, 0}, 0.7, -1.0);
  EXPECT_NEAR(mu.positive_part().mass(), 2.0, 1e-15);
  EXPECT_NEAR(mu.negative_part().mass(), 1.0, 1e-15);
  EXPECT_NEAR(mu.abs().mass(), mu.total_variation(), 1e-15);
}
