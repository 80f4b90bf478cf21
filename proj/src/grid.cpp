#include "qplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qplab {

double distance(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  if (spec.dim < 1 || spec.dim > 3) throw InvalidArgument("grid: dim must be 1, 2 or 3");
  if (!(spec.T > 0.0) || !std::isfinite(spec.T)) throw InvalidArgument("grid: T must be positive");
  if (spec.steps < 1) throw InvalidArgument("grid: steps must be >= 1");
  count_ = 1;
  double diag2 = 0.0;
  volume_ = 1.0;
  h_ = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (k >= spec.dim) {
      spec_.lower[k] = 0.0;
      spec_.upper[k] = 0.0;
      spec_.cells[k] = 1;
      width_[k] = 1.0;
      continue;
    }
    const double extent = spec.upper[k] - spec.lower[k];
    if (!(extent > 0.0) || !std::isfinite(extent)) {
      throw InvalidArgument("grid: axis " + std::to_string(k) + " has non-positive extent");
    }
    if (spec.cells[k] < 4) {
      throw InvalidArgument("grid: axis " + std::to_string(k) + " needs at least 4 cells");
    }
    width_[k] = extent / spec.cells[k];
    h_ = std::max(h_, width_[k]);
    volume_ *= width_[k];
    count_ *= static_cast<std::size_t>(spec.cells[k]);
    diag2 += extent * extent;
  }
  diameter_ = std::sqrt(diag2);
  tau_ = spec.T / spec.steps;
}

int Grid::step_of(double t) const {
  if (!(t > 0.0) || t > spec_.T * (1.0 + 1e-14)) {
    throw InvalidArgument("grid: time outside (0, T]");
  }
  int s = static_cast<int>(std::ceil(t / tau_)) - 1;
  return std::clamp(s, 0, spec_.steps - 1);
}

std::array<int, 3> Grid::multi_index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int k = 0; k < spec_.dim; ++k) {
    idx[k] = static_cast<int>(flat % static_cast<std::size_t>(spec_.cells[k]));
    flat /= static_cast<std::size_t>(spec_.cells[k]);
  }
  return idx;
}

std::size_t Grid::flat_index(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int k = spec_.dim - 1; k >= 0; --k) {
    flat = flat * static_cast<std::size_t>(spec_.cells[k]) + static_cast<std::size_t>(idx[k]);
  }
  return flat;
}

Point Grid::center(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Point x{0.0, 0.0, 0.0};
  for (int k = 0; k < spec_.dim; ++k) x[k] = spec_.lower[k] + (idx[k] + 0.5) * width_[k];
  return x;
}

std::size_t Grid::locate(const Point& x) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int k = 0; k < spec_.dim; ++k) {
    const int i = static_cast<int>(std::floor((x[k] - spec_.lower[k]) / width_[k]));
    idx[k] = std::clamp(i, 0, spec_.cells[k] - 1);
  }
  return flat_index(idx);
}

bool Grid::strictly_inside(const Point& x) const {
  for (int k = 0; k < spec_.dim; ++k) {
    if (!(x[k] > spec_.lower[k] && x[k] < spec_.upper[k])) return false;
  }
  return true;
}

double Grid::boundary_distance(const Point& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < spec_.dim; ++k) {
    d = std::min({d, x[k] - spec_.lower[k], spec_.upper[k] - x[k]});
  }
  return d;
}

bool Grid::operator==(const Grid& other) const {
  if (spec_.dim != other.spec_.dim || spec_.steps != other.spec_.steps || spec_.T != other.spec_.T) {
    return false;
  }
  for (int k = 0; k < spec_.dim; ++k) {
    if (spec_.cells[k] != other.spec_.cells[k] || spec_.lower[k] != other.spec_.lower[k] ||
        spec_.upper[k] != other.spec_.upper[k]) {
      return false;
    }
  }
  return true;
}

Field::Field(const Grid& grid, double value) : grid_(grid), values_(grid.cell_count(), value) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.cell_count()) throw InvalidArgument("field: value count != cell count");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("field: non-finite value");
  }
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field& Field::operator+=(const Field& other) {
  if (!(grid_ == other.grid_)) throw InvalidArgument("field: grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

SpaceTimeField::SpaceTimeField(const Grid& grid, double value)
    : grid_(grid), values_(grid.cell_count() * static_cast<std::size_t>(grid.steps()), value) {}

std::span<double> SpaceTimeField::slice(int s) {
  return std::span<double>(values_).subspan(static_cast<std::size_t>(s) * cells(), cells());
}

std::span<const double> SpaceTimeField::slice(int s) const {
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(s) * cells(), cells());
}

double SpaceTimeField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& other) {
  if (!(grid_ == other.grid_)) throw InvalidArgument("space-time field: grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

SpaceTimeField extend_in_time(const Field& f) {
  SpaceTimeField out(f.grid());
  for (int s = 0; s < out.steps(); ++s) {
    auto sl = out.slice(s);
    std::copy(f.values().begin(), f.values().end(), sl.begin());
  }
  return out;
}

double integrate(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

double integrate(const SpaceTimeField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume() * f.grid().tau();
}

double integrate_abs(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += std::abs(v);
  return s * f.grid().cell_volume();
}

double integrate_abs(const SpaceTimeField& f) {
  double s = 0.0;
  for (double v : f.values()) s += std::abs(v);
  return s * f.grid().cell_volume() * f.grid().tau();
}

double level_set_measure(const Field& f, double k) {
  if (!(k > 0.0)) throw InvalidArgument("level_set_measure: k must be positive");
  const auto n = std::count_if(f.values().begin(), f.values().end(),
                               [k](double v) { return std::abs(v) > k; });
  return static_cast<double>(n) * f.grid().cell_volume();
}

double level_set_measure(const SpaceTimeField& f, double k) {
  if (!(k > 0.0)) throw InvalidArgument("level_set_measure: k must be positive");
  const auto n = std::count_if(f.values().begin(), f.values().end(),
                               [k](double v) { return std::abs(v) > k; });
  return static_cast<double>(n) * f.grid().cell_volume() * f.grid().tau();
}

}  // namespace qplab
