#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qplab {

/// Spatial point; coordinates beyond the grid dimension are ignored and kept at 0.
using Point = std::array<double, 3>;

/// Raised when an operation's precondition on its inputs is violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double distance(const Point& a, const Point& b, int dim);

struct GridSpec {
  int dim = 1;
  std::array<double, 3> lower{-1.0, 0.0, 0.0};
  std::array<double, 3> upper{1.0, 1.0, 1.0};
  std::array<int, 3> cells{8, 1, 1};
  double T = 1.0;
  int steps = 1;
};

/// Box domain Omega with a uniform cell-centered partition and a uniform time
/// partition of (0, T). Dimension 3 is accepted for potential computations.
class Grid {
 public:
  Grid() = default;
  explicit Grid(const GridSpec& spec);

  int dim() const { return spec_.dim; }
  const GridSpec& spec() const { return spec_; }

  double lower(int axis) const { return spec_.lower[axis]; }
  double upper(int axis) const { return spec_.upper[axis]; }
  int cells(int axis) const { return spec_.cells[axis]; }
  double width(int axis) const { return width_[axis]; }
  /// Largest cell width.
  double h() const { return h_; }
  double cell_volume() const { return volume_; }
  std::size_t cell_count() const { return count_; }

  double T() const { return spec_.T; }
  int steps() const { return spec_.steps; }
  double tau() const { return tau_; }
  double step_start(int s) const { return tau_ * s; }
  double step_end(int s) const { return tau_ * (s + 1); }
  double step_midpoint(int s) const { return tau_ * (s + 0.5); }
  /// Index of the step (t_s, t_{s+1}] containing t; t must lie in (0, T].
  int step_of(double t) const;

  /// Diameter sup |x - y| over the box.
  double diameter() const { return diameter_; }
  /// |Omega| and |Q| = |Omega| T.
  double domain_measure() const { return volume_ * static_cast<double>(count_); }
  double space_time_measure() const { return domain_measure() * spec_.T; }

  std::array<int, 3> multi_index(std::size_t flat) const;
  std::size_t flat_index(const std::array<int, 3>& idx) const;
  Point center(std::size_t flat) const;
  /// Cell containing x (clamped to the box).
  std::size_t locate(const Point& x) const;

  bool strictly_inside(const Point& x) const;
  double boundary_distance(const Point& x) const;

  bool operator==(const Grid& other) const;

 private:
  GridSpec spec_{};
  std::array<double, 3> width_{1.0, 1.0, 1.0};
  double h_ = 0.0;
  double volume_ = 0.0;
  std::size_t count_ = 0;
  double tau_ = 0.0;
  double diameter_ = 0.0;
};

/// One value per cell.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double max_abs() const;
  Field& operator+=(const Field& other);
  Field& operator*=(double c);

 private:
  Grid grid_{};
  std::vector<double> values_;
};

/// One value per cell per time step; slice s holds the value on (t_s, t_{s+1}].
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  explicit SpaceTimeField(const Grid& grid, double value = 0.0);

  const Grid& grid() const { return grid_; }
  int steps() const { return grid_.steps(); }
  std::size_t cells() const { return grid_.cell_count(); }
  std::span<double> slice(int s);
  std::span<const double> slice(int s) const;
  double& at(int s, std::size_t i) { return values_[static_cast<std::size_t>(s) * cells() + i]; }
  double at(int s, std::size_t i) const { return values_[static_cast<std::size_t>(s) * cells() + i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double max_abs() const;
  SpaceTimeField& operator+=(const SpaceTimeField& other);
  SpaceTimeField& operator*=(double c);

 private:
  Grid grid_{};
  std::vector<double> values_;
};

/// Space-time field equal to `f` on every step.
SpaceTimeField extend_in_time(const Field& f);

/// Midpoint rule: sum f_i |cell|.
double integrate(const Field& f);
/// Midpoint rule on Q: sum f_{s,i} |cell| tau.
double integrate(const SpaceTimeField& f);
/// L1 norms.
double integrate_abs(const Field& f);
double integrate_abs(const SpaceTimeField& f);

/// |cell| times the number of cells with |f| > k.
double level_set_measure(const Field& f, double k);
/// |cell| tau times the number of space-time cells with |f| > k.
double level_set_measure(const SpaceTimeField& f, double k);

}  // namespace qplab
