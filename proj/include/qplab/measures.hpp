#pragma once

#include <vector>

#include "qplab/grid.hpp"

namespace qplab {

struct Atom {
  Point x{};
  double mass = 0.0;
};

/// Point mass at (x, t) in Q.
struct SpaceTimeAtom {
  Point x{};
  double t = 0.0;
  double mass = 0.0;
};

/// Spatial atom carried along a per-step time density: the measure
/// delta_x (x) rate(t). Products of spatial atoms with time profiles expand into these.
struct LineAtom {
  Point x{};
  std::vector<double> rate;
};

/// Bounded signed measure on Omega: atoms plus a cellwise density.
///
/// Atoms are kept merged (one atom per location) and sorted, so two measures
/// compare atom-by-atom without search tolerance surprises.
class SpatialMeasure {
 public:
  SpatialMeasure() = default;
  explicit SpatialMeasure(const Grid& grid);
  SpatialMeasure(const Grid& grid, std::vector<Atom> atoms, Field density);

  const Grid& grid() const { return density_.grid(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Field& density() const { return density_; }

  double total_variation() const;
  double mass() const;
  bool is_zero() const;
  bool is_nonnegative() const;
  bool has_atoms() const { return !atoms_.empty(); }

  SpatialMeasure positive_part() const;
  SpatialMeasure negative_part() const;
  SpatialMeasure scaled(double c) const;

  SpatialMeasure& operator+=(const SpatialMeasure& other);
  SpatialMeasure& operator-=(const SpatialMeasure& other);

 private:
  void canonicalize();

  std::vector<Atom> atoms_;
  Field density_;
};

SpatialMeasure operator+(SpatialMeasure a, const SpatialMeasure& b);
SpatialMeasure operator-(SpatialMeasure a, const SpatialMeasure& b);

/// Single atom; throws unless x is strictly inside Omega.
SpatialMeasure dirac(const Grid& grid, const Point& x, double mass);
SpatialMeasure density_measure(const Field& density);

/// a <= b atomwise and cellwise.
bool less_equal(const SpatialMeasure& a, const SpatialMeasure& b);
/// Lattice infimum of two nonnegative measures. An atom against a density
/// contributes nothing: atoms are singular with respect to densities.
SpatialMeasure inf_measures(const SpatialMeasure& a, const SpatialMeasure& b);
/// Total variation |a - b|(Omega).
double variation_distance(const SpatialMeasure& a, const SpatialMeasure& b);

/// Normalized bump (1 - (|x|/r)^2)^2 used by all mollifications.
double bump_profile(double d, double r);
/// Mollifier radius for level n: max(2h, D/n).
double mollifier_radius(const Grid& grid, int level);
/// Replaces atoms by bumps of radius r and convolves the density with the
/// same bump. Bumps are clipped to Omega and renormalized so mass is preserved.
SpatialMeasure mollify_radius(const SpatialMeasure& mu, double radius);
SpatialMeasure mollify(const SpatialMeasure& mu, int level);

/// omega restricted to {x : d(x, boundary) > margin}.
SpatialMeasure restrict_interior(const SpatialMeasure& mu, double margin);

/// Bounded signed measure on Q = Omega x (0, T).
class SpaceTimeMeasure {
 public:
  SpaceTimeMeasure() = default;
  explicit SpaceTimeMeasure(const Grid& grid);
  SpaceTimeMeasure(const Grid& grid, std::vector<SpaceTimeAtom> atoms, std::vector<LineAtom> lines,
                   SpaceTimeField density);

  const Grid& grid() const { return density_.grid(); }
  const std::vector<SpaceTimeAtom>& atoms() const { return atoms_; }
  const std::vector<LineAtom>& lines() const { return lines_; }
  const SpaceTimeField& density() const { return density_; }

  double total_variation() const;
  double mass() const;
  bool is_zero() const;
  bool is_nonnegative() const;
  bool is_pure_density() const { return atoms_.empty() && lines_.empty(); }

  SpaceTimeMeasure positive_part() const;
  SpaceTimeMeasure negative_part() const;
  SpaceTimeMeasure abs() const;
  SpaceTimeMeasure scaled(double c) const;

  SpaceTimeMeasure& operator+=(const SpaceTimeMeasure& other);
  SpaceTimeMeasure& operator-=(const SpaceTimeMeasure& other);

 private:
  void canonicalize();

  std::vector<SpaceTimeAtom> atoms_;
  std::vector<LineAtom> lines_;
  SpaceTimeField density_;
};

SpaceTimeMeasure operator+(SpaceTimeMeasure a, const SpaceTimeMeasure& b);
SpaceTimeMeasure operator-(SpaceTimeMeasure a, const SpaceTimeMeasure& b);

SpaceTimeMeasure dirac(const Grid& grid, const Point& x, double t, double mass);
SpaceTimeMeasure density_measure(const SpaceTimeField& density);
/// omega (x) F with F given per step; F must be nonnegative.
SpaceTimeMeasure product(const SpatialMeasure& omega, const std::vector<double>& profile);

bool less_equal(const SpaceTimeMeasure& a, const SpaceTimeMeasure& b);
SpaceTimeMeasure inf_measures(const SpaceTimeMeasure& a, const SpaceTimeMeasure& b);
double variation_distance(const SpaceTimeMeasure& a, const SpaceTimeMeasure& b);

/// Pure density on Q: spatial mollification of every slice; time atoms land in
/// their containing step with density mass / tau.
SpaceTimeField mollify_radius(const SpaceTimeMeasure& mu, double radius);
SpaceTimeField mollify(const SpaceTimeMeasure& mu, int level);

/// T_n(chi_{Q_n} f) for a pure density measure, Q_n = {t in (1/n, T - 1/n), d(x, boundary) > 1/n}.
SpaceTimeMeasure truncate_restrict(const SpaceTimeMeasure& mu, int level);
/// T_n(chi_{(1/n, T - 1/n)} F) for a per-step profile.
std::vector<double> truncate_profile(const Grid& grid, const std::vector<double>& profile, int level);

}  // namespace qplab
