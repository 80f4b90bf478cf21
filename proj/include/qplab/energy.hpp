#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "qplab/grid.hpp"
#include "qplab/perturbation.hpp"

namespace qplab {

/// Raised when an iterative solve exhausts its budget.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Discrete gradient: forward differences per axis at every cell of the
/// extended index set {-1, ..., n-1}^N, with u = 0 outside the grid.
/// Row c of the result holds the N components at extended cell c.
class DiscreteGradient {
 public:
  explicit DiscreteGradient(const Grid& grid);

  std::size_t extended_count() const { return ext_count_; }
  /// Grid cells touched by extended cell c: entry 0 is c itself, entry 1+k is c + e_k
  /// (npos when outside the grid).
  const std::array<std::size_t, 4>& stencil(std::size_t c) const { return stencil_[c]; }
  /// Grid cell whose weight applies at extended cell c (nearest interior cell).
  std::size_t weight_cell(std::size_t c) const { return weight_cell_[c]; }

  void apply(std::span<const double> u, std::size_t c, std::array<double, 3>& g) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  Grid grid_;
  std::size_t ext_count_ = 0;
  std::vector<std::array<std::size_t, 4>> stencil_;
  std::vector<std::size_t> weight_cell_;
};

/// Convex energy on grid fields with zero exterior values:
///
///   J(u) = sum_c |cell| (1/p) a |grad_h u|^p
///        + sum_i |cell| [ (m/2)(u_i - r_i)^2 + lambda Ghat(u_i) - f_i u_i ]
///
/// For p < 2 the kernel |xi|^p is regularized as (|xi|^2 + eps^2)^{p/2}.
struct EnergySpec {
  double p = 2.0;
  std::vector<double> weight;      // a(x) per cell; empty means 1
  double mass = 0.0;               // m, 1/tau for a backward Euler step
  std::vector<double> reference;   // r; empty means 0
  std::vector<double> rhs;         // f; empty means 0
  Nonlinearity G;
  double lambda = 0.0;
};

struct MinimizeOptions {
  /// Stop when max_i |dJ/du_i| / |cell| < tol * max(1, max|f|, m max|r|).
  double tol = 1e-8;
  int max_iter = 200;
};

struct MinimizeResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  /// Energy at the start and after every accepted iteration.
  std::vector<double> energies;
};

class Energy {
 public:
  Energy(const Grid& grid, EnergySpec spec);

  const Grid& grid() const { return grid_; }
  const EnergySpec& spec() const { return spec_; }

  double value(std::span<const double> u) const;
  /// dJ/du_i (not divided by the cell volume).
  void gradient(std::span<const double> u, std::span<double> out) const;
  /// Gradient-only part of J, i.e. the p-Dirichlet term.
  double dirichlet(std::span<const double> u) const;
  /// Strong-form residual dJ/du_i / |cell|.
  std::vector<double> residual(std::span<const double> u) const;
  /// Scale used for the relative stopping rule.
  double residual_scale() const;

  /// Damped Newton iteration with Armijo backtracking and Levenberg shift.
  MinimizeResult minimize(std::vector<double>& u, const MinimizeOptions& opts) const;

 private:
  double kernel_eps() const;

  Grid grid_;
  EnergySpec spec_;
  DiscreteGradient grad_;
};

/// |grad_h u| at every grid cell (forward differences, zero exterior).
std::vector<double> gradient_norm(const Grid& grid, std::span<const double> u);

}  // namespace qplab
