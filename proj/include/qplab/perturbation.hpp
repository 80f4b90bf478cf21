#pragma once

#include <string>

namespace qplab {

/// Truncated exponential e^s - sum_{j<l} s^j / j!.
double E_function(double s, int l);

/// Zero-order nonlinearity G(u), odd in u.
///
///   power:          |u|^{q-1} u
///   exponential:    (e^{tau |u|^beta} - 1) sign(u)
///   truncated_exp:  E(tau |u|^beta) sign(u), E with l terms removed
struct Nonlinearity {
  enum class Kind { none, power, exponential, truncated_exp };

  Kind kind = Kind::none;
  double q = 1.0;
  double tau = 1.0;
  double beta = 1.0;
  int l = 1;

  static Nonlinearity power(double q);
  static Nonlinearity exponential(double tau, double beta);
  static Nonlinearity truncated_exp(double tau, double beta, int l);

  double value(double u) const;
  double derivative(double u) const;
  /// Antiderivative vanishing at 0; convex because G is nondecreasing.
  double primitive(double u) const;

  std::string name() const;
  /// Throws InvalidArgument on out-of-range parameters.
  void validate() const;
};

/// G enters as +lambda G(u) on the left (absorption) or on the right (source).
struct Perturbation {
  enum class Role { none, absorption, source };

  Role role = Role::none;
  Nonlinearity G;
  double lambda = 1.0;

  bool active() const { return role != Role::none && G.kind != Nonlinearity::Kind::none && lambda != 0.0; }
};

}  // namespace qplab
