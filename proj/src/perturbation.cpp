#include "qplab/perturbation.hpp"

#include <cmath>
#include <limits>

#include "qplab/grid.hpp"

namespace qplab {
namespace {

double sign(double u) { return (u > 0.0) - (u < 0.0); }

// Integral of E(tau s^beta) (or e^{..} - 1) over [0, a] by composite
// Gauss-Legendre; the integrand is smooth on (0, a] and bounded near 0.
template <class F>
double integrate_0a(F f, double a) {
  static constexpr double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                  0.9061798459386640};
  static constexpr double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                  0.4786286704993665, 0.2369268850561891};
  constexpr int panels = 16;
  const double width = a / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * width;
    for (int j = 0; j < 5; ++j) sum += w[j] * f(mid + 0.5 * width * x[j]);
  }
  return 0.5 * width * sum;
}

}  // namespace

double E_function(double s, int l) {
  if (l < 1) throw InvalidArgument("E_function: l must be >= 1");
  if (std::abs(s) < 1.0) {
    // Series from the l-th term avoids cancellation near 0.
    double term = 1.0;
    for (int j = 1; j <= l; ++j) term *= s / j;
    double sum = 0.0;
    for (int j = l; j < l + 60; ++j) {
      sum += term;
      term *= s / (j + 1);
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  double partial = 0.0;
  double term = 1.0;
  for (int j = 0; j < l; ++j) {
    partial += term;
    term *= s / (j + 1);
  }
  return std::exp(s) - partial;
}

Nonlinearity Nonlinearity::power(double q) {
  Nonlinearity g;
  g.kind = Kind::power;
  g.q = q;
  g.validate();
  return g;
}

Nonlinearity Nonlinearity::exponential(double tau, double beta) {
  Nonlinearity g;
  g.kind = Kind::exponential;
  g.tau = tau;
  g.beta = beta;
  g.validate();
  return g;
}

Nonlinearity Nonlinearity::truncated_exp(double tau, double beta, int l) {
  Nonlinearity g;
  g.kind = Kind::truncated_exp;
  g.tau = tau;
  g.beta = beta;
  g.l = l;
  g.validate();
  return g;
}

void Nonlinearity::validate() const {
  switch (kind) {
    case Kind::none:
      return;
    case Kind::power:
      if (!(q > 0.0)) throw InvalidArgument("power nonlinearity: q must be positive");
      return;
    case Kind::truncated_exp:
      if (l < 1) throw InvalidArgument("truncated exponential: l must be >= 1");
      [[fallthrough]];
    case Kind::exponential:
      if (!(tau > 0.0)) throw InvalidArgument("exponential nonlinearity: tau must be positive");
      if (!(beta >= 1.0)) throw InvalidArgument("exponential nonlinearity: beta must be >= 1");
      return;
  }
}

double Nonlinearity::value(double u) const {
  const double a = std::abs(u);
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::power:
      return sign(u) * std::pow(a, q);
    case Kind::exponential:
      return sign(u) * std::expm1(tau * std::pow(a, beta));
    case Kind::truncated_exp:
      return sign(u) * E_function(tau * std::pow(a, beta), l);
  }
  return 0.0;
}

double Nonlinearity::derivative(double u) const {
  const double a = std::abs(u);
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::power:
      if (a == 0.0) return q < 1.0 ? std::numeric_limits<double>::infinity() : (q == 1.0 ? 1.0 : 0.0);
      return q * std::pow(a, q - 1.0);
    case Kind::exponential: {
      const double s = tau * std::pow(a, beta);
      const double ds = beta == 1.0 ? tau : (a == 0.0 ? 0.0 : tau * beta * std::pow(a, beta - 1.0));
      return std::exp(s) * ds;
    }
    case Kind::truncated_exp: {
      const double s = tau * std::pow(a, beta);
      const double ds = beta == 1.0 ? tau : (a == 0.0 ? 0.0 : tau * beta * std::pow(a, beta - 1.0));
      // E_l' = E_{l-1}, with E_0 = exp.
      const double dE = l == 1 ? std::exp(s) : E_function(s, l - 1);
      return dE * ds;
    }
  }
  return 0.0;
}

double Nonlinearity::primitive(double u) const {
  const double a = std::abs(u);
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::power:
      return std::pow(a, q + 1.0) / (q + 1.0);
    case Kind::exponential:
      if (beta == 1.0) return (std::expm1(tau * a) - tau * a) / tau;
      return integrate_0a([this](double s) { return std::expm1(tau * std::pow(s, beta)); }, a);
    case Kind::truncated_exp:
      if (beta == 1.0) return E_function(tau * a, l + 1) / tau;
      return integrate_0a([this](double s) { return E_function(tau * std::pow(s, beta), l); }, a);
  }
  return 0.0;
}

std::string Nonlinearity::name() const {
  switch (kind) {
    case Kind::none:
      return "none";
    case Kind::power:
      return "power";
    case Kind::exponential:
      return "exponential";
    case Kind::truncated_exp:
      return "truncated_exp";
  }
  return "none";
}

}  // namespace qplab
