#pragma once

#include <array>
#include <vector>

#include "qplab/grid.hpp"
#include "qplab/measures.hpp"
#include "qplab/perturbation.hpp"

namespace qplab {

struct ExponentReport {
  int N = 1;
  double p = 2.0;
  double p1 = 0.0;  // (2N+1)/(N+1)
  double pc = 0.0;  // p - 1 + p/N
  double pe = 0.0;  // N(p-1)/(N-p), +inf when p >= N
  bool above_p1 = false;
  bool below_N = false;
};

ExponentReport exponents(int N, double p);

/// Volume of the unit ball in R^N.
double unit_ball_volume(int N);

struct RadialQuadrature {
  /// Dimension N in the kernel r^{p-N}; 0 means the grid dimension.
  int kernel_dim = 0;
  /// Log-spaced panels between r_min and R.
  int nodes = 96;
  /// Smallest radius; 0 means h/4.
  double r_min = 0.0;
};

/// omega(B(x, r)) as a function of r for one center x.
///
/// Atoms count when |a - x| < r (or <= r with `closed`). Density cells are
/// sorted by distance; a cell straddling the sphere contributes the linear
/// fraction of its width inside.
class BallMass {
 public:
  struct Offset {
    double length = 0.0;
    std::array<int, 3> d{0, 0, 0};
  };

  BallMass(const SpatialMeasure& omega, const Point& x);
  /// Faster construction at a cell center using a shared offset table.
  BallMass(const SpatialMeasure& omega, std::size_t cell, const std::vector<Offset>& offsets);

  double operator()(double r, bool closed = false) const;
  /// Distances of atoms from x, ascending.
  const std::vector<double>& atom_distances() const { return atom_d_; }

  /// Index differences between cells of `grid`, sorted by center distance.
  static std::vector<Offset> offset_table(const Grid& grid);

 private:
  void add_atoms(const SpatialMeasure& omega, const Point& x);
  void finish();

  int dim_ = 1;
  double half_width_ = 0.0;
  double own_mass_ = 0.0;
  double own_scale_ = 0.0;
  std::vector<double> atom_d_;
  std::vector<double> atom_cum_;
  std::vector<double> cell_d_;
  std::vector<double> cell_m_;
  std::vector<double> cell_cum_;
};

/// W^R_{1,p}[omega](x) = int_0^R (r^{p-N} omega(B(x,r)))^{1/(p-1)} dr/r over [r_min, R].
double wolff(const SpatialMeasure& omega, double p, double R, const Point& x, const RadialQuadrature& q = {});
/// Wolff potential at every cell center.
Field wolff_field(const SpatialMeasure& omega, double p, double R, const RadialQuadrature& q = {});

/// h_eta(r) = min((-ln r)^{-eta}, (ln 2)^{-eta}), taken as (ln 2)^{-eta} for r >= 1/2.
double h_eta(double r, double eta);

/// M^eta_{p,R}[omega](x) = sup_{0<r<R} omega(B(x,r)) / (r^{N-p} h_eta(r)).
double maximal(const SpatialMeasure& omega, double p, double R, double eta, const Point& x,
               const RadialQuadrature& q = {});
Field maximal_field(const SpatialMeasure& omega, double p, double R, double eta, const RadialQuadrature& q = {});

/// int_1^inf G(s) s^{-1-p_c} ds < inf.
bool subcritical_check(const Nonlinearity& G, int N, double p);

/// ((12 beta)^{-1})^beta p ln 2; requires beta > 1.
double delta0(double p, double beta);

struct ExpIntegrability {
  bool finite = false;
  double integral = 0.0;
  /// ||M^{(p-1)/beta'}_{p,2D}[omega]||_inf.
  double maximal_norm = 0.0;
  /// Largest cell exponent delta W^beta / norm^{beta/(p-1)}.
  double max_exponent = 0.0;
};

/// Quadrature of exp(delta W^{2D}[omega]^beta / ||M^{(p-1)/beta'}_{p,2D}[omega]||^{beta/(p-1)}) over Omega.
ExpIntegrability exp_integrability(const SpatialMeasure& omega, double p, double beta, double delta,
                                   const RadialQuadrature& q = {}, double cap = 1e300);

struct Ball {
  Point center{};
  double radius = 0.0;
};

/// int_{B_r} G_alpha(x) dx for the Bessel kernel of order alpha in R^N.
double bessel_ball_integral(int N, double alpha, double r);

/// Upper bound on Cap_{G_alpha,s}(E), E a union of closed balls (radius 0 = point).
/// Each ball B(c, rho) gets the test density c0 chi_{B(c, rho + r)}, c0 = 1 / int_{B_r} G_alpha,
/// which satisfies G_alpha * phi >= 1 on the ball.
double capacity_upper(const std::vector<Ball>& E, double alpha, double s, const Grid& grid, double r);

/// Whether a point has positive Cap_{G_p, q/(q+1-p)}: p q/(q+1-p) > N.
bool dirac_admissible(int N, double p, double q);

}  // namespace qplab
