#include "qplab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace qplab {
namespace {

constexpr double kArmijo = 1e-4;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteGradient

DiscreteGradient::DiscreteGradient(const Grid& grid) : grid_(grid) {
  const int N = grid.dim();
  std::array<int, 3> ext{1, 1, 1};
  for (int k = 0; k < N; ++k) ext[k] = grid.cells(k) + 1;
  auto in_grid = [&](const std::array<int, 3>& e) {
    for (int k = 0; k < N; ++k) {
      if (e[k] < 0 || e[k] >= grid.cells(k)) return false;
    }
    return true;
  };
  std::array<int, 3> e{0, 0, 0};
  for (int c2 = 0; c2 < ext[2]; ++c2) {
    for (int c1 = 0; c1 < ext[1]; ++c1) {
      for (int c0 = 0; c0 < ext[0]; ++c0) {
        e = {N > 0 ? c0 - 1 : 0, N > 1 ? c1 - 1 : 0, N > 2 ? c2 - 1 : 0};
        std::array<std::size_t, 4> st{npos, npos, npos, npos};
        bool any = false;
        if (in_grid(e)) {
          st[0] = grid.flat_index(e);
          any = true;
        }
        for (int k = 0; k < N; ++k) {
          auto n = e;
          n[k] += 1;
          if (in_grid(n)) {
            st[1 + k] = grid.flat_index(n);
            any = true;
          }
        }
        if (!any) continue;
        std::array<int, 3> w = e;
        for (int k = 0; k < N; ++k) w[k] = std::clamp(w[k], 0, grid.cells(k) - 1);
        stencil_.push_back(st);
        weight_cell_.push_back(grid.flat_index(w));
      }
    }
  }
  ext_count_ = stencil_.size();
}

void DiscreteGradient::apply(std::span<const double> u, std::size_t c, std::array<double, 3>& g) const {
  const auto& st = stencil_[c];
  const double here = st[0] == npos ? 0.0 : u[st[0]];
  for (int k = 0; k < grid_.dim(); ++k) {
    const double there = st[1 + k] == npos ? 0.0 : u[st[1 + k]];
    g[k] = (there - here) / grid_.width(k);
  }
}

std::vector<double> gradient_norm(const Grid& grid, std::span<const double> u) {
  std::vector<double> out(grid.cell_count(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto idx = grid.multi_index(i);
    double s = 0.0;
    for (int k = 0; k < grid.dim(); ++k) {
      auto n = idx;
      n[k] += 1;
      const double there = n[k] < grid.cells(k) ? u[grid.flat_index(n)] : 0.0;
      const double d = (there - u[i]) / grid.width(k);
      s += d * d;
    }
    out[i] = std::sqrt(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Energy

Energy::Energy(const Grid& grid, EnergySpec spec) : grid_(grid), spec_(std::move(spec)), grad_(grid_) {
  if (!(spec_.p > 1.0)) throw InvalidArgument("energy: p must exceed 1");
  const std::size_t n = grid_.cell_count();
  auto check = [n](const std::vector<double>& v, const char* what) {
    if (!v.empty() && v.size() != n) throw InvalidArgument(std::string("energy: ") + what + " size mismatch");
  };
  check(spec_.weight, "weight");
  check(spec_.reference, "reference");
  check(spec_.rhs, "rhs");
  for (double a : spec_.weight) {
    if (!(a > 0.0)) throw InvalidArgument("energy: weight must be positive");
  }
  if (spec_.mass < 0.0) throw InvalidArgument("energy: mass coefficient must be nonnegative");
  spec_.G.validate();
}

double Energy::kernel_eps() const { return spec_.p < 2.0 ? 1e-8 * grid_.h() : 0.0; }

double Energy::dirichlet(std::span<const double> u) const {
  const double p = spec_.p;
  const double eps2 = kernel_eps() * kernel_eps();
  std::array<double, 3> g{};
  double sum = 0.0;
  for (std::size_t c = 0; c < grad_.extended_count(); ++c) {
    grad_.apply(u, c, g);
    double s = eps2;
    for (int k = 0; k < grid_.dim(); ++k) s += g[k] * g[k];
    const double a = spec_.weight.empty() ? 1.0 : spec_.weight[grad_.weight_cell(c)];
    sum += a * (p == 2.0 ? s : std::pow(s, 0.5 * p));
  }
  return sum * grid_.cell_volume() / p;
}

double Energy::value(std::span<const double> u) const {
  double local = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = spec_.reference.empty() ? 0.0 : spec_.reference[i];
    const double f = spec_.rhs.empty() ? 0.0 : spec_.rhs[i];
    local += 0.5 * spec_.mass * (u[i] - r) * (u[i] - r) - f * u[i];
    if (spec_.lambda != 0.0) local += spec_.lambda * spec_.G.primitive(u[i]);
  }
  return dirichlet(u) + local * grid_.cell_volume();
}

void Energy::gradient(std::span<const double> u, std::span<double> out) const {
  const double p = spec_.p;
  const double eps2 = kernel_eps() * kernel_eps();
  const double V = grid_.cell_volume();
  std::fill(out.begin(), out.end(), 0.0);
  std::array<double, 3> g{};
  for (std::size_t c = 0; c < grad_.extended_count(); ++c) {
    grad_.apply(u, c, g);
    double s = eps2;
    for (int k = 0; k < grid_.dim(); ++k) s += g[k] * g[k];
    if (s == 0.0) continue;
    const double a = spec_.weight.empty() ? 1.0 : spec_.weight[grad_.weight_cell(c)];
    const double flux = V * a * (p == 2.0 ? 1.0 : std::pow(s, 0.5 * (p - 2.0)));
    const auto& st = grad_.stencil(c);
    for (int k = 0; k < grid_.dim(); ++k) {
      const double t = flux * g[k] / grid_.width(k);
      if (st[0] != DiscreteGradient::npos) out[st[0]] -= t;
      if (st[1 + k] != DiscreteGradient::npos) out[st[1 + k]] += t;
    }
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = spec_.reference.empty() ? 0.0 : spec_.reference[i];
    const double f = spec_.rhs.empty() ? 0.0 : spec_.rhs[i];
    double d = spec_.mass * (u[i] - r) - f;
    if (spec_.lambda != 0.0) d += spec_.lambda * spec_.G.value(u[i]);
    out[i] += V * d;
  }
}

std::vector<double> Energy::residual(std::span<const double> u) const {
  std::vector<double> r(u.size());
  gradient(u, r);
  for (double& v : r) v /= grid_.cell_volume();
  return r;
}

double Energy::residual_scale() const {
  double scale = 1.0;
  scale = std::max(scale, max_abs(spec_.rhs));
  scale = std::max(scale, spec_.mass * max_abs(spec_.reference));
  return scale;
}

MinimizeResult Energy::minimize(std::vector<double>& u, const MinimizeOptions& opts) const {
  if (!(opts.tol > 0.0)) throw InvalidArgument("minimize: tol must be positive");
  const std::size_t n = grid_.cell_count();
  if (u.size() != n) u.assign(n, 0.0);
  const double p = spec_.p;
  const double eps2 = kernel_eps() * kernel_eps();
  const double V = grid_.cell_volume();
  const double target = opts.tol * residual_scale();
  const int N = grid_.dim();

  MinimizeResult res;
  std::vector<double> grad(n), trial(n);
  double energy = value(u);
  res.energies.push_back(energy);

  // Typical curvature of the Dirichlet term, used to scale the Levenberg shift.
  double hmin2 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < N; ++k) hmin2 = std::min(hmin2, grid_.width(k) * grid_.width(k));
  const double diag_scale = V / hmin2;
  double shift = (p == 2.0) ? 0.0 : 1e-10 * diag_scale;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  Eigen::VectorXd rhs(n), dir(n);

  for (int it = 0;; ++it) {
    gradient(u, grad);
    res.residual = max_abs(grad) / V;
    if (!std::isfinite(res.residual)) {
      res.converged = false;
      return res;
    }
    if (res.residual < target) {
      res.converged = true;
      return res;
    }
    if (it >= opts.max_iter) return res;
    res.iterations = it + 1;

    // Hessian of the energy at u.
    trip.clear();
    std::array<double, 3> g{};
    for (std::size_t c = 0; c < grad_.extended_count(); ++c) {
      grad_.apply(u, c, g);
      double s = eps2;
      for (int k = 0; k < N; ++k) s += g[k] * g[k];
      const double a = spec_.weight.empty() ? 1.0 : spec_.weight[grad_.weight_cell(c)];
      double alpha = 0.0, gamma = 0.0;  // Hg = a (alpha I + gamma g g^T)
      if (p == 2.0) {
        alpha = 1.0;
      } else if (s > 0.0) {
        alpha = std::pow(s, 0.5 * (p - 2.0));
        gamma = (p - 2.0) * std::pow(s, 0.5 * (p - 4.0));
      } else {
        continue;
      }
      // D maps the (N+1) local values to g; local Hessian = V a D^T (alpha I + gamma g g^T) D.
      const auto& st = grad_.stencil(c);
      double D[3][4] = {};
      for (int k = 0; k < N; ++k) {
        D[k][0] = -1.0 / grid_.width(k);
        D[k][1 + k] = 1.0 / grid_.width(k);
      }
      double Hg[3][3];
      for (int k = 0; k < N; ++k) {
        for (int l = 0; l < N; ++l) Hg[k][l] = a * ((k == l ? alpha : 0.0) + gamma * g[k] * g[l]);
      }
      for (int i = 0; i <= N; ++i) {
        if (st[i] == DiscreteGradient::npos) continue;
        for (int j = 0; j <= N; ++j) {
          if (st[j] == DiscreteGradient::npos) continue;
          double h = 0.0;
          for (int k = 0; k < N; ++k) {
            if (D[k][i] == 0.0) continue;
            for (int l = 0; l < N; ++l) h += D[k][i] * Hg[k][l] * D[l][j];
          }
          if (h != 0.0) trip.emplace_back(static_cast<int>(st[i]), static_cast<int>(st[j]), V * h);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double d = spec_.mass;
      if (spec_.lambda != 0.0) {
        const double gp = spec_.G.derivative(u[i]);
        if (std::isfinite(gp)) d += spec_.lambda * gp;
      }
      if (d != 0.0) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), V * d);
    }
    for (std::size_t i = 0; i < n; ++i) rhs[static_cast<Eigen::Index>(i)] = -grad[i];

    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Eigen::SparseMatrix<double> H(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      H.setFromTriplets(trip.begin(), trip.end());
      if (shift > 0.0) {
        for (std::size_t i = 0; i < n; ++i) H.coeffRef(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += shift;
      }
      solver.compute(H);
      if (solver.info() != Eigen::Success) {
        shift = std::max(shift * 100.0, 1e-8 * diag_scale);
        continue;
      }
      dir = solver.solve(rhs);
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope -= dir[static_cast<Eigen::Index>(i)] * rhs[static_cast<Eigen::Index>(i)];
      if (!(slope < 0.0)) {
        shift = std::max(shift * 100.0, 1e-8 * diag_scale);
        continue;
      }
      double step = 1.0;
      for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + step * dir[static_cast<Eigen::Index>(i)];
        const double e = value(trial);
        if (std::isfinite(e) && e <= energy + kArmijo * step * slope && e < energy) {
          u.swap(trial);
          energy = e;
          res.energies.push_back(e);
          accepted = true;
          break;
        }
      }
      if (accepted) {
        if (step == 1.0 && shift > 0.0) shift = (shift < 1e-12 * diag_scale) ? 0.0 : shift * 0.1;
      } else {
        shift = std::max(shift * 100.0, 1e-8 * diag_scale);
      }
    }
    if (!accepted) {
      // No representable descent left: accept a residual near round-off.
      res.converged = res.residual < 1e3 * target;
      return res;
    }
  }
}

}  // namespace qplab
