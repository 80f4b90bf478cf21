#include "qplab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <type_traits>

namespace qplab {
namespace {

bool co_located(const Point& a, const Point& b, const Grid& grid) {
  return distance(a, b, grid.dim()) <= 1e-12 * (1.0 + grid.diameter());
}

bool point_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool within(double lhs, double rhs) {
  return lhs <= rhs + 1e-12 * (std::abs(lhs) + std::abs(rhs));
}

void check_interior(const Grid& grid, const Point& x, const char* what) {
  if (!grid.strictly_inside(x)) {
    throw InvalidArgument(std::string(what) + ": location must lie strictly inside the domain");
  }
}

template <class AtomT>
std::optional<std::size_t> find_match(const std::vector<AtomT>& list, const AtomT& a, const Grid& grid) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    if constexpr (std::is_same_v<AtomT, SpaceTimeAtom>) {
      if (co_located(list[i].x, a.x, grid) && std::abs(list[i].t - a.t) <= 1e-12 * (1.0 + grid.T())) {
        return i;
      }
    } else {
      if (co_located(list[i].x, a.x, grid)) return i;
    }
  }
  return std::nullopt;
}

/// Adds `w * m_j` into `out` for the bump of radius r centered at x, clipped
/// to Omega and normalized so the deposited mass is exactly `mass`.
class BumpDepositor {
 public:
  BumpDepositor(const Grid& grid, double radius) : grid_(grid), radius_(radius) {}

  /// Cells and normalized densities (per unit mass) of the bump at x.
  void weights(const Point& x, std::vector<std::size_t>& cells, std::vector<double>& w) const {
    cells.clear();
    w.clear();
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int k = 0; k < grid_.dim(); ++k) {
      const double a = (x[k] - radius_ - grid_.lower(k)) / grid_.width(k) - 0.5;
      const double b = (x[k] + radius_ - grid_.lower(k)) / grid_.width(k) - 0.5;
      lo[k] = std::max(0, static_cast<int>(std::floor(a)));
      hi[k] = std::min(grid_.cells(k) - 1, static_cast<int>(std::ceil(b)));
    }
    double total = 0.0;
    std::array<int, 3> idx{0, 0, 0};
    for (idx[2] = lo[2]; idx[2] <= hi[2]; ++idx[2]) {
      for (idx[1] = lo[1]; idx[1] <= hi[1]; ++idx[1]) {
        for (idx[0] = lo[0]; idx[0] <= hi[0]; ++idx[0]) {
          const std::size_t j = grid_.flat_index(idx);
          const double value = bump_profile(distance(grid_.center(j), x, grid_.dim()), radius_);
          if (value > 0.0) {
            cells.push_back(j);
            w.push_back(value);
            total += value;
          }
        }
      }
    }
    if (total <= 0.0) {
      cells.assign(1, grid_.locate(x));
      w.assign(1, 1.0 / grid_.cell_volume());
      return;
    }
    const double scale = 1.0 / (total * grid_.cell_volume());
    for (double& v : w) v *= scale;
  }

  void deposit(const Point& x, double mass, std::span<double> out) {
    if (mass == 0.0) return;
    weights(x, cells_, w_);
    for (std::size_t k = 0; k < cells_.size(); ++k) out[cells_[k]] += mass * w_[k];
  }

  void deposit_density(std::span<const double> density, std::span<double> out) {
    const double vol = grid_.cell_volume();
    for (std::size_t j = 0; j < density.size(); ++j) {
      if (density[j] != 0.0) deposit(grid_.center(j), density[j] * vol, out);
    }
  }

 private:
  const Grid& grid_;
  double radius_;
  std::vector<std::size_t> cells_;
  std::vector<double> w_;
};

}  // namespace

// ---------------------------------------------------------------------------
// SpatialMeasure

SpatialMeasure::SpatialMeasure(const Grid& grid) : density_(grid) {}

SpatialMeasure::SpatialMeasure(const Grid& grid, std::vector<Atom> atoms, Field density)
    : atoms_(std::move(atoms)), density_(std::move(density)) {
  if (!(density_.grid() == grid)) throw InvalidArgument("measure: density grid mismatch");
  for (const auto& a : atoms_) {
    check_interior(grid, a.x, "atom");
    if (!std::isfinite(a.mass)) throw InvalidArgument("atom: non-finite mass");
  }
  canonicalize();
}

void SpatialMeasure::canonicalize() {
  std::vector<Atom> merged;
  for (const auto& a : atoms_) {
    if (auto i = find_match(merged, a, grid())) {
      merged[*i].mass += a.mass;
    } else {
      merged.push_back(a);
    }
  }
  std::erase_if(merged, [](const Atom& a) { return a.mass == 0.0; });
  std::sort(merged.begin(), merged.end(), [](const Atom& a, const Atom& b) { return point_less(a.x, b.x); });
  atoms_ = std::move(merged);
}

double SpatialMeasure::total_variation() const {
  double tv = integrate_abs(density_);
  for (const auto& a : atoms_) tv += std::abs(a.mass);
  return tv;
}

double SpatialMeasure::mass() const {
  double m = integrate(density_);
  for (const auto& a : atoms_) m += a.mass;
  return m;
}

bool SpatialMeasure::is_zero() const { return atoms_.empty() && density_.max_abs() == 0.0; }

bool SpatialMeasure::is_nonnegative() const {
  for (const auto& a : atoms_) {
    if (a.mass < 0.0) return false;
  }
  for (double v : density_.values()) {
    if (v < 0.0) return false;
  }
  return true;
}

SpatialMeasure SpatialMeasure::positive_part() const {
  SpatialMeasure out = *this;
  std::erase_if(out.atoms_, [](const Atom& a) { return a.mass <= 0.0; });
  for (double& v : out.density_.values()) v = std::max(v, 0.0);
  return out;
}

SpatialMeasure SpatialMeasure::negative_part() const { return scaled(-1.0).positive_part(); }

SpatialMeasure SpatialMeasure::scaled(double c) const {
  SpatialMeasure out = *this;
  for (auto& a : out.atoms_) a.mass *= c;
  out.density_ *= c;
  out.canonicalize();
  return out;
}

SpatialMeasure& SpatialMeasure::operator+=(const SpatialMeasure& other) {
  density_ += other.density_;
  atoms_.insert(atoms_.end(), other.atoms_.begin(), other.atoms_.end());
  canonicalize();
  return *this;
}

SpatialMeasure& SpatialMeasure::operator-=(const SpatialMeasure& other) { return *this += other.scaled(-1.0); }

SpatialMeasure operator+(SpatialMeasure a, const SpatialMeasure& b) { return a += b; }
SpatialMeasure operator-(SpatialMeasure a, const SpatialMeasure& b) { return a -= b; }

SpatialMeasure dirac(const Grid& grid, const Point& x, double mass) {
  return SpatialMeasure(grid, {Atom{x, mass}}, Field(grid));
}

SpatialMeasure density_measure(const Field& density) { return SpatialMeasure(density.grid(), {}, density); }

bool less_equal(const SpatialMeasure& a, const SpatialMeasure& b) {
  const Grid& grid = a.grid();
  for (const auto& atom : a.atoms()) {
    const auto j = find_match(b.atoms(), atom, grid);
    if (!within(atom.mass, j ? b.atoms()[*j].mass : 0.0)) return false;
  }
  for (const auto& atom : b.atoms()) {
    const auto j = find_match(a.atoms(), atom, grid);
    if (!within(j ? a.atoms()[*j].mass : 0.0, atom.mass)) return false;
  }
  for (std::size_t i = 0; i < a.density().size(); ++i) {
    if (!within(a.density()[i], b.density()[i])) return false;
  }
  return true;
}

SpatialMeasure inf_measures(const SpatialMeasure& a, const SpatialMeasure& b) {
  if (!a.is_nonnegative() || !b.is_nonnegative()) {
    throw InvalidArgument("inf_measures: both measures must be nonnegative");
  }
  if (!(a.grid() == b.grid())) throw InvalidArgument("inf_measures: grid mismatch");
  std::vector<Atom> atoms;
  for (const auto& atom : a.atoms()) {
    if (const auto j = find_match(b.atoms(), atom, a.grid())) {
      atoms.push_back({atom.x, std::min(atom.mass, b.atoms()[*j].mass)});
    }
  }
  Field density(a.grid());
  for (std::size_t i = 0; i < density.size(); ++i) {
    density[i] = std::min(a.density()[i], b.density()[i]);
  }
  return SpatialMeasure(a.grid(), std::move(atoms), std::move(density));
}

double variation_distance(const SpatialMeasure& a, const SpatialMeasure& b) { return (a - b).total_variation(); }

double bump_profile(double d, double r) {
  if (d >= r) return 0.0;
  const double s = 1.0 - (d / r) * (d / r);
  return s * s;
}

double mollifier_radius(const Grid& grid, int level) {
  if (level < 1) throw InvalidArgument("mollify: level must be >= 1");
  return std::max(2.0 * grid.h(), grid.diameter() / level);
}

SpatialMeasure mollify_radius(const SpatialMeasure& mu, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("mollify: radius must be positive");
  Field out(mu.grid());
  BumpDepositor dep(mu.grid(), radius);
  for (const auto& a : mu.atoms()) dep.deposit(a.x, a.mass, out.values());
  dep.deposit_density(mu.density().values(), out.values());
  return density_measure(out);
}

SpatialMeasure mollify(const SpatialMeasure& mu, int level) {
  return mollify_radius(mu, mollifier_radius(mu.grid(), level));
}

SpatialMeasure restrict_interior(const SpatialMeasure& mu, double margin) {
  const Grid& grid = mu.grid();
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) {
    if (grid.boundary_distance(a.x) > margin) atoms.push_back(a);
  }
  Field density = mu.density();
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (!(grid.boundary_distance(grid.center(i)) > margin)) density[i] = 0.0;
  }
  return SpatialMeasure(grid, std::move(atoms), std::move(density));
}

// ---------------------------------------------------------------------------
// SpaceTimeMeasure

SpaceTimeMeasure::SpaceTimeMeasure(const Grid& grid) : density_(grid) {}

SpaceTimeMeasure::SpaceTimeMeasure(const Grid& grid, std::vector<SpaceTimeAtom> atoms,
                                   std::vector<LineAtom> lines, SpaceTimeField density)
    : atoms_(std::move(atoms)), lines_(std::move(lines)), density_(std::move(density)) {
  if (!(density_.grid() == grid)) throw InvalidArgument("measure: density grid mismatch");
  for (const auto& a : atoms_) {
    check_interior(grid, a.x, "atom");
    if (!(a.t > 0.0 && a.t < grid.T())) throw InvalidArgument("atom: time must lie in (0, T)");
    if (!std::isfinite(a.mass)) throw InvalidArgument("atom: non-finite mass");
  }
  for (const auto& l : lines_) {
    check_interior(grid, l.x, "line atom");
    if (l.rate.size() != static_cast<std::size_t>(grid.steps())) {
      throw InvalidArgument("line atom: profile length must equal the step count");
    }
  }
  for (double v : density_.values()) {
    if (!std::isfinite(v)) throw InvalidArgument("measure: non-finite density");
  }
  canonicalize();
}

void SpaceTimeMeasure::canonicalize() {
  std::vector<SpaceTimeAtom> atoms;
  for (const auto& a : atoms_) {
    if (auto i = find_match(atoms, a, grid())) {
      atoms[*i].mass += a.mass;
    } else {
      atoms.push_back(a);
    }
  }
  std::erase_if(atoms, [](const SpaceTimeAtom& a) { return a.mass == 0.0; });
  std::sort(atoms.begin(), atoms.end(), [](const SpaceTimeAtom& a, const SpaceTimeAtom& b) {
    return point_less(a.x, b.x) || (!point_less(b.x, a.x) && a.t < b.t);
  });
  atoms_ = std::move(atoms);

  std::vector<LineAtom> lines;
  for (const auto& l : lines_) {
    if (auto i = find_match(lines, l, grid())) {
      for (std::size_t s = 0; s < l.rate.size(); ++s) lines[*i].rate[s] += l.rate[s];
    } else {
      lines.push_back(l);
    }
  }
  std::erase_if(lines, [](const LineAtom& l) {
    return std::all_of(l.rate.begin(), l.rate.end(), [](double r) { return r == 0.0; });
  });
  std::sort(lines.begin(), lines.end(), [](const LineAtom& a, const LineAtom& b) { return point_less(a.x, b.x); });
  lines_ = std::move(lines);
}

double SpaceTimeMeasure::total_variation() const {
  double tv = integrate_abs(density_);
  for (const auto& a : atoms_) tv += std::abs(a.mass);
  for (const auto& l : lines_) {
    for (double r : l.rate) tv += std::abs(r) * grid().tau();
  }
  return tv;
}

double SpaceTimeMeasure::mass() const {
  double m = integrate(density_);
  for (const auto& a : atoms_) m += a.mass;
  for (const auto& l : lines_) {
    for (double r : l.rate) m += r * grid().tau();
  }
  return m;
}

bool SpaceTimeMeasure::is_zero() const { return atoms_.empty() && lines_.empty() && density_.max_abs() == 0.0; }

bool SpaceTimeMeasure::is_nonnegative() const {
  for (const auto& a : atoms_) {
    if (a.mass < 0.0) return false;
  }
  for (const auto& l : lines_) {
    for (double r : l.rate) {
      if (r < 0.0) return false;
    }
  }
  for (double v : density_.values()) {
    if (v < 0.0) return false;
  }
  return true;
}

SpaceTimeMeasure SpaceTimeMeasure::positive_part() const {
  SpaceTimeMeasure out = *this;
  std::erase_if(out.atoms_, [](const SpaceTimeAtom& a) { return a.mass <= 0.0; });
  for (auto& l : out.lines_) {
    for (double& r : l.rate) r = std::max(r, 0.0);
  }
  for (double& v : out.density_.values()) v = std::max(v, 0.0);
  out.canonicalize();
  return out;
}

SpaceTimeMeasure SpaceTimeMeasure::negative_part() const { return scaled(-1.0).positive_part(); }

SpaceTimeMeasure SpaceTimeMeasure::abs() const { return positive_part() + negative_part(); }

SpaceTimeMeasure SpaceTimeMeasure::scaled(double c) const {
  SpaceTimeMeasure out = *this;
  for (auto& a : out.atoms_) a.mass *= c;
  for (auto& l : out.lines_) {
    for (double& r : l.rate) r *= c;
  }
  out.density_ *= c;
  out.canonicalize();
  return out;
}

SpaceTimeMeasure& SpaceTimeMeasure::operator+=(const SpaceTimeMeasure& other) {
  density_ += other.density_;
  atoms_.insert(atoms_.end(), other.atoms_.begin(), other.atoms_.end());
  lines_.insert(lines_.end(), other.lines_.begin(), other.lines_.end());
  canonicalize();
  return *this;
}

SpaceTimeMeasure& SpaceTimeMeasure::operator-=(const SpaceTimeMeasure& other) { return *this += other.scaled(-1.0); }

SpaceTimeMeasure operator+(SpaceTimeMeasure a, const SpaceTimeMeasure& b) { return a += b; }
SpaceTimeMeasure operator-(SpaceTimeMeasure a, const SpaceTimeMeasure& b) { return a -= b; }

SpaceTimeMeasure dirac(const Grid& grid, const Point& x, double t, double mass) {
  return SpaceTimeMeasure(grid, {SpaceTimeAtom{x, t, mass}}, {}, SpaceTimeField(grid));
}

SpaceTimeMeasure density_measure(const SpaceTimeField& density) {
  return SpaceTimeMeasure(density.grid(), {}, {}, density);
}

SpaceTimeMeasure product(const SpatialMeasure& omega, const std::vector<double>& profile) {
  const Grid& grid = omega.grid();
  if (profile.size() != static_cast<std::size_t>(grid.steps())) {
    throw InvalidArgument("product: profile length must equal the step count");
  }
  for (double f : profile) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw InvalidArgument("product: time profile must be nonnegative");
  }
  std::vector<LineAtom> lines;
  for (const auto& a : omega.atoms()) {
    LineAtom l{a.x, profile};
    for (double& r : l.rate) r *= a.mass;
    lines.push_back(std::move(l));
  }
  SpaceTimeField density(grid);
  for (int s = 0; s < grid.steps(); ++s) {
    auto sl = density.slice(s);
    for (std::size_t i = 0; i < sl.size(); ++i) sl[i] = omega.density()[i] * profile[s];
  }
  return SpaceTimeMeasure(grid, {}, std::move(lines), std::move(density));
}

bool less_equal(const SpaceTimeMeasure& a, const SpaceTimeMeasure& b) {
  const Grid& grid = a.grid();
  for (const auto& atom : a.atoms()) {
    const auto j = find_match(b.atoms(), atom, grid);
    if (!within(atom.mass, j ? b.atoms()[*j].mass : 0.0)) return false;
  }
  for (const auto& atom : b.atoms()) {
    const auto j = find_match(a.atoms(), atom, grid);
    if (!within(j ? a.atoms()[*j].mass : 0.0, atom.mass)) return false;
  }
  for (const auto& l : a.lines()) {
    const auto j = find_match(b.lines(), l, grid);
    for (std::size_t s = 0; s < l.rate.size(); ++s) {
      if (!within(l.rate[s], j ? b.lines()[*j].rate[s] : 0.0)) return false;
    }
  }
  for (const auto& l : b.lines()) {
    const auto j = find_match(a.lines(), l, grid);
    for (std::size_t s = 0; s < l.rate.size(); ++s) {
      if (!within(j ? a.lines()[*j].rate[s] : 0.0, l.rate[s])) return false;
    }
  }
  const auto da = a.density().values();
  const auto db = b.density().values();
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (!within(da[i], db[i])) return false;
  }
  return true;
}

SpaceTimeMeasure inf_measures(const SpaceTimeMeasure& a, const SpaceTimeMeasure& b) {
  if (!a.is_nonnegative() || !b.is_nonnegative()) {
    throw InvalidArgument("inf_measures: both measures must be nonnegative");
  }
  if (!(a.grid() == b.grid())) throw InvalidArgument("inf_measures: grid mismatch");
  const Grid& grid = a.grid();
  std::vector<SpaceTimeAtom> atoms;
  for (const auto& atom : a.atoms()) {
    if (const auto j = find_match(b.atoms(), atom, grid)) {
      atoms.push_back({atom.x, atom.t, std::min(atom.mass, b.atoms()[*j].mass)});
    }
  }
  std::vector<LineAtom> lines;
  for (const auto& l : a.lines()) {
    if (const auto j = find_match(b.lines(), l, grid)) {
      LineAtom m{l.x, l.rate};
      for (std::size_t s = 0; s < m.rate.size(); ++s) m.rate[s] = std::min(m.rate[s], b.lines()[*j].rate[s]);
      lines.push_back(std::move(m));
    }
  }
  SpaceTimeField density(grid);
  const auto da = a.density().values();
  const auto db = b.density().values();
  auto out = density.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(da[i], db[i]);
  return SpaceTimeMeasure(grid, std::move(atoms), std::move(lines), std::move(density));
}

double variation_distance(const SpaceTimeMeasure& a, const SpaceTimeMeasure& b) {
  return (a - b).total_variation();
}

SpaceTimeField mollify_radius(const SpaceTimeMeasure& mu, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("mollify: radius must be positive");
  const Grid& grid = mu.grid();
  SpaceTimeField out(grid);
  BumpDepositor dep(grid, radius);
  for (int s = 0; s < grid.steps(); ++s) dep.deposit_density(mu.density().slice(s), out.slice(s));
  for (const auto& a : mu.atoms()) dep.deposit(a.x, a.mass / grid.tau(), out.slice(grid.step_of(a.t)));
  std::vector<std::size_t> cells;
  std::vector<double> w;
  for (const auto& l : mu.lines()) {
    dep.weights(l.x, cells, w);
    for (int s = 0; s < grid.steps(); ++s) {
      auto sl = out.slice(s);
      for (std::size_t k = 0; k < cells.size(); ++k) sl[cells[k]] += l.rate[s] * w[k];
    }
  }
  return out;
}

SpaceTimeField mollify(const SpaceTimeMeasure& mu, int level) {
  return mollify_radius(mu, mollifier_radius(mu.grid(), level));
}

SpaceTimeMeasure truncate_restrict(const SpaceTimeMeasure& mu, int level) {
  if (level < 1) throw InvalidArgument("truncate_restrict: level must be >= 1");
  if (!mu.is_pure_density()) throw InvalidArgument("truncate_restrict: measure must be a pure density");
  const Grid& grid = mu.grid();
  const double n = level;
  const double margin = 1.0 / n;
  SpaceTimeField out = mu.density();
  for (int s = 0; s < grid.steps(); ++s) {
    const double t = grid.step_midpoint(s);
    const bool time_in = t > margin && t < grid.T() - margin;
    auto sl = out.slice(s);
    for (std::size_t i = 0; i < sl.size(); ++i) {
      const bool in = time_in && grid.boundary_distance(grid.center(i)) > margin;
      sl[i] = in ? std::clamp(sl[i], -n, n) : 0.0;
    }
  }
  return density_measure(out);
}

std::vector<double> truncate_profile(const Grid& grid, const std::vector<double>& profile, int level) {
  if (level < 1) throw InvalidArgument("truncate_profile: level must be >= 1");
  if (profile.size() != static_cast<std::size_t>(grid.steps())) {
    throw InvalidArgument("truncate_profile: profile length must equal the step count");
  }
  const double n = level;
  std::vector<double> out(profile.size());
  for (int s = 0; s < grid.steps(); ++s) {
    const double t = grid.step_midpoint(s);
    out[s] = (t > 1.0 / n && t < grid.T() - 1.0 / n) ? std::clamp(profile[s], -n, n) : 0.0;
  }
  return out;
}

}  // namespace qplab
