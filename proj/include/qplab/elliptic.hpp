#pragma once

#include <optional>
#include <vector>

#include "qplab/energy.hpp"
#include "qplab/measures.hpp"
#include "qplab/potential.hpp"

namespace qplab {

/// -div(a(x)|grad u|^{p-2} grad u) = omega in Omega, u = 0 on the boundary.
struct EllipticProblem {
  Grid grid;
  SpatialMeasure omega;
  double p = 2.0;
  /// Optional weight a(x) with Lambda1 <= a <= Lambda2.
  std::optional<Field> weight;
  double Lambda1 = 1.0;
  double Lambda2 = 1.0;
  /// Mollifier radius for the data; 0 means 2h.
  double mollify_radius = 0.0;
};

struct EllipticResult {
  Field u;
  Field rhs;
  MinimizeResult stats;
};

/// Minimizes (1/p) int a|grad_h u|^p - <mollified omega, u>. Throws SolverError
/// when the residual does not reach tol.
EllipticResult solve_elliptic(const EllipticProblem& prob, const MinimizeOptions& opts = {});

struct EncaCheck {
  bool holds = false;
  double kappa = 0.0;
};

/// kappa = max_i |u_i| / max(W^{2D}_{1,p}[omega^{+/-}](x_i), floor), the sign chosen by u_i.
EncaCheck check_enca(const Field& u, const SpatialMeasure& omega, double p, double kappa_cap = 1e6,
                     const RadialQuadrature& q = {}, double floor = 1e-12);

}  // namespace qplab
