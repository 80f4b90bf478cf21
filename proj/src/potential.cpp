#include "qplab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace qplab {
namespace {

void require_nonnegative(const SpatialMeasure& omega, const char* who) {
  if (!omega.is_nonnegative()) throw InvalidArgument(std::string(who) + ": measure must be nonnegative");
}

int kernel_dim(const Grid& grid, const RadialQuadrature& q) { return q.kernel_dim > 0 ? q.kernel_dim : grid.dim(); }

double r_min(const Grid& grid, const RadialQuadrature& q) { return q.r_min > 0.0 ? q.r_min : grid.h() / 4.0; }

std::vector<double> log_nodes(double lo, double hi, int n) {
  std::vector<double> r(static_cast<std::size_t>(n) + 1);
  const double ratio = std::log(hi / lo);
  for (int k = 0; k <= n; ++k) r[k] = lo * std::exp(ratio * k / n);
  r.front() = lo;
  r.back() = hi;
  return r;
}

double wolff_at(const BallMass& mass, double p, double R, int N, double lo, int nodes) {
  if (!(R > lo)) return 0.0;
  std::vector<double> breaks = log_nodes(lo, R, nodes);
  for (double d : mass.atom_distances()) {
    if (d > lo && d < R) breaks.push_back(d);
  }
  std::sort(breaks.begin(), breaks.end());
  const double e = (p - N) / (p - 1.0);
  const double inv = 1.0 / (p - 1.0);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (!(b > a)) continue;
    const double m = mass(std::sqrt(a * b));
    if (m <= 0.0) continue;
    const double radial = e == 0.0 ? std::log(b / a) : (std::pow(b, e) - std::pow(a, e)) / e;
    sum += std::pow(m, inv) * radial;
  }
  return sum;
}

double maximal_at(const BallMass& mass, double p, double R, double eta, int N, double lo, int nodes) {
  if (!(R > lo)) return 0.0;
  double best = 0.0;
  auto consider = [&](double r, bool closed) {
    const double m = mass(r, closed);
    if (m > 0.0) best = std::max(best, m / (std::pow(r, N - p) * h_eta(r, eta)));
  };
  const auto nodes_r = log_nodes(lo, R, nodes);
  for (std::size_t k = 0; k + 1 < nodes_r.size(); ++k) consider(nodes_r[k], false);
  consider(R, false);
  for (double d : mass.atom_distances()) {
    if (d >= lo && d < R) consider(d, true);
  }
  return best;
}

}  // namespace

ExponentReport exponents(int N, double p) {
  if (!(p > 1.0)) throw InvalidArgument("exponents: p must exceed 1");
  if (N < 1) throw InvalidArgument("exponents: N must be >= 1");
  ExponentReport r;
  r.N = N;
  r.p = p;
  r.p1 = (2.0 * N + 1.0) / (N + 1.0);
  r.pc = p - 1.0 + p / N;
  r.below_N = p < N;
  r.pe = r.below_N ? N * (p - 1.0) / (N - p) : std::numeric_limits<double>::infinity();
  r.above_p1 = p > r.p1;
  return r;
}

double unit_ball_volume(int N) {
  switch (N) {
    case 1:
      return 2.0;
    case 2:
      return std::numbers::pi;
    case 3:
      return 4.0 * std::numbers::pi / 3.0;
    default:
      return std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N + 1.0);
  }
}

// ---------------------------------------------------------------------------
// BallMass

BallMass::BallMass(const SpatialMeasure& omega, const Point& x) {
  const Grid& grid = omega.grid();
  half_width_ = 0.5 * grid.h();
  dim_ = grid.dim();
  own_scale_ = unit_ball_volume(grid.dim()) / grid.cell_volume();
  add_atoms(omega, x);
  const auto& rho = omega.density();
  std::vector<std::pair<double, double>> cells;
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (rho[j] == 0.0) continue;
    const double d = distance(grid.center(j), x, grid.dim());
    const double m = rho[j] * grid.cell_volume();
    if (d < 1e-12 * grid.h()) {
      own_mass_ += m;
    } else {
      cells.emplace_back(d, m);
    }
  }
  std::sort(cells.begin(), cells.end());
  for (const auto& [d, m] : cells) {
    cell_d_.push_back(d);
    cell_m_.push_back(m);
  }
  finish();
}

BallMass::BallMass(const SpatialMeasure& omega, std::size_t cell, const std::vector<Offset>& offsets) {
  const Grid& grid = omega.grid();
  half_width_ = 0.5 * grid.h();
  dim_ = grid.dim();
  own_scale_ = unit_ball_volume(grid.dim()) / grid.cell_volume();
  add_atoms(omega, grid.center(cell));
  const auto base = grid.multi_index(cell);
  const auto& rho = omega.density();
  if (rho.max_abs() > 0.0) {
    for (const auto& off : offsets) {
      std::array<int, 3> idx{};
      bool inside = true;
      for (int k = 0; k < 3; ++k) {
        idx[k] = base[k] + off.d[k];
        if (idx[k] < 0 || idx[k] >= grid.cells(k)) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      const double v = rho[grid.flat_index(idx)];
      if (v == 0.0) continue;
      if (off.length == 0.0) {
        own_mass_ += v * grid.cell_volume();
      } else {
        cell_d_.push_back(off.length);
        cell_m_.push_back(v * grid.cell_volume());
      }
    }
  }
  finish();
}

void BallMass::add_atoms(const SpatialMeasure& omega, const Point& x) {
  std::vector<std::pair<double, double>> atoms;
  for (const auto& a : omega.atoms()) atoms.emplace_back(distance(a.x, x, omega.grid().dim()), a.mass);
  std::sort(atoms.begin(), atoms.end());
  double cum = 0.0;
  for (const auto& [d, m] : atoms) {
    atom_d_.push_back(d);
    cum += m;
    atom_cum_.push_back(cum);
  }
}

void BallMass::finish() {
  cell_cum_.resize(cell_m_.size());
  double cum = 0.0;
  for (std::size_t k = 0; k < cell_m_.size(); ++k) {
    cum += cell_m_[k];
    cell_cum_[k] = cum;
  }
}

double BallMass::operator()(double r, bool closed) const {
  if (!(r > 0.0)) return 0.0;
  double m = 0.0;
  if (!atom_d_.empty()) {
    const auto it = closed ? std::upper_bound(atom_d_.begin(), atom_d_.end(), r)
                           : std::lower_bound(atom_d_.begin(), atom_d_.end(), r);
    const auto n = it - atom_d_.begin();
    if (n > 0) m += atom_cum_[n - 1];
  }
  // Own cell: covered fraction |B_r| / |cell|, exact until the ball reaches a face.
  if (own_mass_ != 0.0) m += own_mass_ * std::min(1.0, own_scale_ * std::pow(r, dim_));
  if (!cell_d_.empty()) {
    const double lo = r - half_width_;
    const double hi = r + half_width_;
    auto first_partial = std::upper_bound(cell_d_.begin(), cell_d_.end(), lo) - cell_d_.begin();
    if (first_partial > 0) m += cell_cum_[first_partial - 1];
    for (auto k = first_partial; k < static_cast<long>(cell_d_.size()) && cell_d_[k] < hi; ++k) {
      m += cell_m_[k] * (hi - cell_d_[k]) / (2.0 * half_width_);
    }
  }
  return m;
}

std::vector<BallMass::Offset> BallMass::offset_table(const Grid& grid) {
  std::vector<Offset> out;
  const int n0 = grid.cells(0), n1 = grid.cells(1), n2 = grid.cells(2);
  for (int k = -(n2 - 1); k <= n2 - 1; ++k) {
    for (int j = -(n1 - 1); j <= n1 - 1; ++j) {
      for (int i = -(n0 - 1); i <= n0 - 1; ++i) {
        const double dx = i * grid.width(0);
        const double dy = grid.dim() > 1 ? j * grid.width(1) : 0.0;
        const double dz = grid.dim() > 2 ? k * grid.width(2) : 0.0;
        out.push_back({std::sqrt(dx * dx + dy * dy + dz * dz), {i, j, k}});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Offset& a, const Offset& b) { return a.length < b.length; });
  return out;
}

// ---------------------------------------------------------------------------
// Wolff and maximal operators

double wolff(const SpatialMeasure& omega, double p, double R, const Point& x, const RadialQuadrature& q) {
  require_nonnegative(omega, "wolff");
  if (!(p > 1.0)) throw InvalidArgument("wolff: p must exceed 1");
  if (!(R > 0.0)) throw InvalidArgument("wolff: R must be positive");
  if (q.nodes < 1) throw InvalidArgument("wolff: nodes must be >= 1");
  if (omega.is_zero()) return 0.0;
  const Grid& grid = omega.grid();
  return wolff_at(BallMass(omega, x), p, R, kernel_dim(grid, q), r_min(grid, q), q.nodes);
}

Field wolff_field(const SpatialMeasure& omega, double p, double R, const RadialQuadrature& q) {
  require_nonnegative(omega, "wolff");
  if (!(p > 1.0)) throw InvalidArgument("wolff: p must exceed 1");
  if (!(R > 0.0)) throw InvalidArgument("wolff: R must be positive");
  if (q.nodes < 1) throw InvalidArgument("wolff: nodes must be >= 1");
  const Grid& grid = omega.grid();
  Field out(grid);
  if (omega.is_zero()) return out;
  const auto offsets = BallMass::offset_table(grid);
  const int N = kernel_dim(grid, q);
  const double lo = r_min(grid, q);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = wolff_at(BallMass(omega, i, offsets), p, R, N, lo, q.nodes);
  return out;
}

double h_eta(double r, double eta) {
  if (r < 0.5) return std::pow(-std::log(r), -eta);
  return std::pow(std::numbers::ln2, -eta);
}

double maximal(const SpatialMeasure& omega, double p, double R, double eta, const Point& x,
               const RadialQuadrature& q) {
  require_nonnegative(omega, "maximal");
  if (!(eta >= 0.0)) throw InvalidArgument("maximal: eta must be >= 0");
  if (!(R > 0.0)) throw InvalidArgument("maximal: R must be positive");
  if (omega.is_zero()) return 0.0;
  const Grid& grid = omega.grid();
  return maximal_at(BallMass(omega, x), p, R, eta, kernel_dim(grid, q), r_min(grid, q), q.nodes);
}

Field maximal_field(const SpatialMeasure& omega, double p, double R, double eta, const RadialQuadrature& q) {
  require_nonnegative(omega, "maximal");
  if (!(eta >= 0.0)) throw InvalidArgument("maximal: eta must be >= 0");
  if (!(R > 0.0)) throw InvalidArgument("maximal: R must be positive");
  const Grid& grid = omega.grid();
  Field out(grid);
  if (omega.is_zero()) return out;
  const auto offsets = BallMass::offset_table(grid);
  const int N = kernel_dim(grid, q);
  const double lo = r_min(grid, q);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = maximal_at(BallMass(omega, i, offsets), p, R, eta, N, lo, q.nodes);
  }
  return out;
}

bool subcritical_check(const Nonlinearity& G, int N, double p) {
  const double pc = exponents(N, p).pc;
  switch (G.kind) {
    case Nonlinearity::Kind::power:
      return G.q < pc;
    case Nonlinearity::Kind::exponential:
    case Nonlinearity::Kind::truncated_exp:
      return false;
    case Nonlinearity::Kind::none:
      break;
  }
  throw InvalidArgument("subcritical_check: unknown nonlinearity kind");
}

double delta0(double p, double beta) {
  if (!(beta > 1.0)) throw InvalidArgument("delta0: beta must exceed 1");
  if (!(p > 1.0)) throw InvalidArgument("delta0: p must exceed 1");
  return std::pow(1.0 / (12.0 * beta), beta) * p * std::numbers::ln2;
}

ExpIntegrability exp_integrability(const SpatialMeasure& omega, double p, double beta, double delta,
                                   const RadialQuadrature& q, double cap) {
  const double d0 = delta0(p, beta);
  if (!(delta > 0.0 && delta < d0)) throw InvalidArgument("exp_integrability: delta must lie in (0, delta0)");
  const Grid& grid = omega.grid();
  const double R = 2.0 * grid.diameter();
  const double eta = (p - 1.0) * (beta - 1.0) / beta;
  ExpIntegrability out;
  const Field M = maximal_field(omega, p, R, eta, q);
  out.maximal_norm = M.max_abs();
  if (!(out.maximal_norm > 0.0)) {
    throw InvalidArgument("exp_integrability: maximal function vanishes, normalization undefined");
  }
  const Field W = wolff_field(omega, p, R, q);
  const double scale = delta / std::pow(out.maximal_norm, beta / (p - 1.0));
  double sum = 0.0;
  bool overflow = false;
  for (double w : W.values()) {
    const double e = scale * std::pow(w, beta);
    out.max_exponent = std::max(out.max_exponent, e);
    if (e > 700.0) {
      overflow = true;
      continue;
    }
    sum += std::exp(e);
  }
  out.integral = overflow ? std::numeric_limits<double>::infinity() : sum * grid.cell_volume();
  out.finite = !overflow && out.integral < cap;
  return out;
}

// ---------------------------------------------------------------------------
// Capacities

double bessel_ball_integral(int N, double alpha, double r) {
  if (!(alpha > 0.0)) throw InvalidArgument("bessel: alpha must be positive");
  if (!(r > 0.0)) return 0.0;
  // G_alpha = Gamma(alpha/2)^{-1} int_0^inf e^{-t} t^{alpha/2-1} (heat kernel at time t) dt, so its
  // ball integral weights the heat-kernel ball mass P(N/2, r^2/(4t)).
  auto f = [&](double t) {
    if (t <= 0.0) return 0.0;
    return std::exp(-t) * std::pow(t, 0.5 * alpha - 1.0) * boost::math::gamma_p(0.5 * N, r * r / (4.0 * t));
  };
  boost::math::quadrature::tanh_sinh<double> near;
  boost::math::quadrature::exp_sinh<double> far;
  const double split = std::min(1.0, r * r);
  const double a = near.integrate(f, 0.0, split);
  const double b = near.integrate(f, split, 1.0 > split ? 1.0 : split + 1.0);
  const double c = far.integrate(f, 1.0 > split ? 1.0 : split + 1.0, std::numeric_limits<double>::infinity());
  return (a + b + c) / std::tgamma(0.5 * alpha);
}

double capacity_upper(const std::vector<Ball>& E, double alpha, double s, const Grid& grid, double r) {
  if (!(alpha > 0.0)) throw InvalidArgument("capacity_upper: alpha must be positive");
  if (!(s > 1.0)) throw InvalidArgument("capacity_upper: s must exceed 1");
  if (!(r > 0.0)) throw InvalidArgument("capacity_upper: test radius must be positive");
  if (E.empty()) return 0.0;
  const int N = grid.dim();
  for (const auto& b : E) {
    if (!(b.radius >= 0.0)) throw InvalidArgument("capacity_upper: negative ball radius");
    for (int k = 0; k < N; ++k) {
      if (b.center[k] - b.radius < grid.lower(k) || b.center[k] + b.radius > grid.upper(k)) {
        throw InvalidArgument("capacity_upper: set leaves the grid box");
      }
    }
  }
  const double c0 = 1.0 / bessel_ball_integral(N, alpha, r);
  double bound = 0.0;
  for (const auto& b : E) bound += std::pow(c0, s) * unit_ball_volume(N) * std::pow(b.radius + r, N);
  return bound;
}

bool dirac_admissible(int N, double p, double q) {
  if (!(q > p - 1.0)) throw InvalidArgument("dirac_admissible: q must exceed p - 1");
  if (!(p < N)) throw InvalidArgument("dirac_admissible: p must be below N");
  return p * q / (q + 1.0 - p) > N;
}

}  // namespace qplab
