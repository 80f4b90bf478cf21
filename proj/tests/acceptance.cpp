// Acceptance run: one PASS/FAIL line per criterion, each computed against an
// independent oracle with the tolerance pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "qplab/elliptic.hpp"
#include "qplab/pipelines.hpp"
#include "sweeps.hpp"

using namespace qplab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string f6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Grid grid1(int cells, double T = 1.0, int steps = 1) {
  GridSpec s;
  s.dim = 1;
  s.lower = {-1.0, 0.0, 0.0};
  s.upper = {1.0, 1.0, 1.0};
  s.cells = {cells, 1, 1};
  s.T = T;
  s.steps = steps;
  return Grid(s);
}

Grid grid3(int cells) {
  GridSpec s;
  s.dim = 3;
  s.lower = {-1.0, -1.0, -1.0};
  s.upper = {1.0, 1.0, 1.0};
  s.cells = {cells, cells, cells};
  return Grid(s);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1. Wolff potential of a Dirac against the closed form 1/|x| - 1/R (N = 3, p = 2, R = 1).
Outcome wolff_oracle() {
  const Grid g = grid3(16);
  const SpatialMeasure d = dirac(g, {0.0, 0.0, 0.0}, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> rad(0.1, 0.9);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Point dir{u(rng), u(rng), u(rng)};
    const double n = std::hypot(dir[0], dir[1], dir[2]);
    const double r = rad(rng);
    const Point x{dir[0] / n * r, dir[1] / n * r, dir[2] / n * r};
    worst = std::max(worst, rel(wolff(d, 2.0, 1.0, x), 1.0 / r - 1.0));
  }
  // Homogeneity on a mixed measure in 2D.
  GridSpec s;
  s.dim = 2;
  s.cells = {24, 24, 1};
  s.lower = {-1.0, -1.0, 0.0};
  const Grid g2(s);
  Field dens(g2);
  for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = 1.0 + g2.center(i)[0] * g2.center(i)[0];
  const SpatialMeasure w = dirac(g2, {0.2, -0.3, 0.0}, 0.7) + density_measure(dens);
  const double R = 2.0 * g2.diameter();
  double hom = 0.0;
  for (double p : {1.8, 2.0, 3.0}) {
    const Field base = wolff_field(w, p, R);
    for (double c : {2.0, 10.0}) {
      const Field scaled = wolff_field(w.scaled(c), p, R);
      const double f = std::pow(c, 1.0 / (p - 1.0));
      for (std::size_t i = 0; i < base.size(); ++i) hom = std::max(hom, rel(scaled[i], f * base[i]));
    }
  }
  return {worst <= 1e-3 && hom <= 1e-10,
          "max rel err " + f6(worst) + " (tol 1e-3), homogeneity " + f6(hom) + " (tol 1e-10)"};
}

// 2. 1D Dirac Green functions for p = 2 and p = 3; kappa stability across h.
Outcome elliptic_green() {
  double worst_ratio = 0.0;
  double kappa_spread = 0.0;
  std::string detail;
  for (double p : {2.0, 3.0}) {
    const double slope = std::pow(0.5, 1.0 / (p - 1.0));
    double kappa[2];
    for (int level = 0; level < 2; ++level) {
      const int cells = level == 0 ? 200 : 400;
      const Grid g = grid1(cells);
      EllipticProblem prob;
      prob.grid = g;
      prob.omega = dirac(g, {0.0, 0.0, 0.0}, 1.0);
      prob.p = p;
      const EllipticResult r = solve_elliptic(prob, {1e-10, 200});
      if (cells == 200) {
        double err = 0.0;
        for (std::size_t i = 0; i < r.u.size(); ++i) {
          err = std::max(err, std::abs(r.u[i] - slope * (1.0 - std::abs(g.center(i)[0]))));
        }
        worst_ratio = std::max(worst_ratio, err / (3.0 * g.h()));
        detail += "p=" + f6(p) + " err " + f6(err) + "; ";
      }
      kappa[level] = check_enca(r.u, prob.omega, p).kappa;
    }
    const double spread = std::abs(kappa[0] - kappa[1]) / kappa[1];
    kappa_spread = std::max(kappa_spread, spread);
    detail += "kappa " + f6(kappa[0]) + "/" + f6(kappa[1]) + "; ";
  }
  return {worst_ratio <= 1.0 && kappa_spread <= 0.15,
          detail + "err/(3h) " + f6(worst_ratio) + ", kappa spread " + f6(kappa_spread) + " (tol 0.15)"};
}

// 3. Heat eigenmode decay and Duhamel response to a point source constant in time.
Outcome heat_oracle() {
  const double T = 0.5;
  const Grid g = grid1(200, T, 400);
  ParabolicProblem prob;
  prob.grid = g;
  prob.mu = SpaceTimeMeasure(g);
  prob.u0 = Field(g);
  for (std::size_t i = 0; i < g.cell_count(); ++i) prob.u0[i] = std::cos(std::numbers::pi * g.center(i)[0] / 2.0);
  const Solution s = solve_parabolic(prob, {1e-10, 50});
  const double decay = std::exp(-std::pow(std::numbers::pi / 2.0, 2) * T);
  double err = 0.0, nrm = 0.0;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    err += std::abs(s.u.back()[i] - decay * prob.u0[i]);
    nrm += decay * std::abs(prob.u0[i]);
  }
  const double eig = err / nrm;

  // u(x, T) = sum_n psi_n(x) psi_n(x0) (1 - e^{-l_n T}) / l_n, psi_n = sin(n pi (x + 1) / 2).
  const double x0 = 0.3;
  ParabolicProblem duh;
  duh.grid = g;
  duh.u0 = Field(g);
  duh.mu = product(dirac(g, {x0, 0.0, 0.0}, 1.0), std::vector<double>(static_cast<std::size_t>(g.steps()), 1.0));
  const Solution d = solve_parabolic(duh, {1e-10, 50});
  double derr = 0.0, dnrm = 0.0;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const double x = g.center(i)[0];
    if (std::abs(x - x0) < 0.1) continue;
    double exact = 0.0;
    for (int n = 1; n <= 20000; ++n) {
      const double l = std::pow(n * std::numbers::pi / 2.0, 2);
      exact += std::sin(n * std::numbers::pi * (x + 1.0) / 2.0) * std::sin(n * std::numbers::pi * (x0 + 1.0) / 2.0) *
               (1.0 - std::exp(-l * T)) / l;
    }
    derr += std::abs(d.u.back()[i] - exact);
    dnrm += std::abs(exact);
  }
  const double duhamel = derr / dnrm;
  return {eig <= 0.02 && duhamel <= 0.05,
          "eigenmode L1 rel err " + f6(eig) + " (tol 0.02), Duhamel " + f6(duhamel) + " (tol 0.05)"};
}

// 4. Level-set decay for a Dirac in Q, p = 2, N = 1.
Outcome decay_estimate() {
  double C[2], expo[2];
  for (int level = 0; level < 2; ++level) {
    const int cells = level == 0 ? 200 : 400;
    const int steps = level == 0 ? 200 : 400;
    const Grid g = grid1(cells, 0.25, steps);
    ParabolicProblem prob;
    prob.grid = g;
    prob.u0 = Field(g);
    prob.mu = dirac(g, {0.0, 0.0, 0.0}, 0.01, 1.0);
    const Solution s = solve_parabolic(prob, {1e-10, 50});
    const DecayReport r = levelset_decay_check(s, 1.0);
    C[level] = r.C_hat;
    expo[level] = r.defined ? r.exponent : 0.0;
  }
  const double pc = 3.0;
  const double spread = std::abs(C[0] - C[1]) / C[1];
  const bool ok = expo[0] <= -pc + 0.2 && expo[1] <= -pc + 0.2 && spread <= 0.25;
  return {ok, "exponents " + f6(expo[0]) + ", " + f6(expo[1]) + " (need <= " + f6(-pc + 0.2) + "), C_hat " + f6(C[0]) +
                  "/" + f6(C[1]) + " spread " + f6(spread) + " (tol 0.25)"};
}

// 5. G-mass bound for subcritical power absorption at every mollification level.
Outcome mass_bound() {
  const Grid g = grid1(100, 0.5, 100);
  bool ok = true;
  double worst = 0.0;
  for (double q : {1.2, 1.5}) {
    ParabolicProblem prob;
    prob.grid = g;
    prob.u0 = Field(g);
    for (std::size_t i = 0; i < g.cell_count(); ++i) prob.u0[i] = 0.5 * std::cos(std::numbers::pi * g.center(i)[0] / 2.0);
    prob.mu = dirac(g, {0.1, 0.0, 0.0}, 0.1, 2.0) + dirac(g, {-0.4, 0.0, 0.0}, 0.3, -1.0);
    prob.perturbation = Perturbation{Perturbation::Role::absorption, Nonlinearity::power(q), 1.0};
    const SubcriticalReport r = subcritical_absorption(prob, {1, 2, 4, 8}, {1e-10, 100});
    for (const auto& l : r.levels) {
      worst = std::max(worst, l.G_mass / l.bound);
      ok = ok && l.G_mass <= 1.05 * l.bound;
    }
  }
  return {ok, "max G-mass / bound " + f6(worst) + " (limit 1.05)"};
}

// 6. Closed-form constants.
Outcome constants() {
  const SmallnessConstants c = smallness_constants(1, 2.0, 2.0, 1.0, 1.0, 1.0);
  const bool row = c.beta_p == 1.0 && c.A1 == 8.0 && c.lambda0 == 0.125 && c.A2 == 16.0 && c.b0 == 0.0625;
  const double d0 = std::abs(delta0(2.0, 2.0) - std::log(2.0) / 288.0);
  const double e1 = E_function(0.0, 1);
  const double e2 = std::abs(E_function(1.0, 2) - (std::numbers::e - 2.0));
  const double e3 = rel(E_function(1e-3, 3) / 1e-9, 1.0 / 6.0);
  const bool ok = row && d0 <= 1e-12 && e1 == 0.0 && e2 <= 1e-12 && e3 <= 1e-3;
  return {ok, "row (" + f6(c.beta_p) + "," + f6(c.A1) + "," + f6(c.lambda0) + "," + f6(c.A2) + "," + f6(c.b0) +
                  "), delta0 err " + f6(d0) + ", E values " + f6(e1) + "/" + f6(e2) + "/" + f6(e3)};
}

// 7. Composition constant: node doubling and homogeneity.
Outcome composition() {
  const Grid g = grid3(12);
  const SpatialMeasure d = dirac(g, {0.0, 0.0, 0.0}, 1.0);
  RadialQuadrature q96, q192;
  q192.nodes = 192;
  const double m1 = wolff_composition_check(d, 2.0, 2.0, 1.0, q96).M_hat;
  const double m2 = wolff_composition_check(d, 2.0, 2.0, 1.0, q192).M_hat;
  const double mc = wolff_composition_check(d.scaled(2.0), 2.0, 2.0, 2.0, q96).M_hat;
  const double stab = std::abs(m1 - m2) / m2;
  const double hom = std::abs(mc - m1) / m1;
  return {stab <= 0.10 && hom <= 1e-3,
          "M_hat " + f6(m1) + "/" + f6(m2) + " spread " + f6(stab) + " (tol 0.1), homogeneity " + f6(hom) +
              " (tol 1e-3)"};
}

// 8. Power-source iteration: envelope and convergence under the gate; blow-up at 100x.
Outcome source_iteration() {
  const Grid g = grid1(100, 1.0, 50);
  PowerSourceInput small;
  small.omega = dirac(g, {0.0, 0.0, 0.0}, 0.1);
  small.u0 = Field(g);
  small.q = 2.0;
  small.lambda = 0.1;
  small.m_max = 30;
  const PowerSourceReport a = iterate_power_source(small, {1e-10, 100});
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : a.trace.records) min_margin = std::min(min_margin, r.margin);
  const bool good = a.gate_passed && min_margin > 0.0 && a.trace.status == IterationTrace::Status::converged &&
                    a.trace.records.back().increment < 1e-6;

  PowerSourceInput big = small;
  big.omega = small.omega.scaled(100.0);
  big.lambda = 10.0;
  const PowerSourceReport b = iterate_power_source(big, {1e-10, 100});
  const bool blew = b.trace.status == IterationTrace::Status::blow_up && b.trace.blow_up_iteration <= 30;
  return {good && blew, "gate " + std::string(a.gate_passed ? "passed" : "failed") + ", min margin " + f6(min_margin) +
                            ", status " + status_name(a.trace.status) + " at m=" +
                            std::to_string(a.trace.records.size()) + "; 100x: " + status_name(b.trace.status) +
                            " at m=" + std::to_string(b.trace.blow_up_iteration)};
}

// 9. Comparison principle on randomized ordered pairs.
Outcome comparison() {
  const Grid g = grid1(40, 0.2, 20);
  std::mt19937_64 rng(2024);
  const MinimizeOptions opts{1e-9, 200};
  double worst = -std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int k = 0; k < 50; ++k) {
    const double p = k % 2 == 0 ? 2.0 : 3.0;
    const auto [lo, hi] = cli::ordered_pair(g, p, rng);
    const ComparisonResult r = comparison_solve(lo, hi, opts);
    worst = std::max(worst, r.max_excess);
    ok = ok && r.holds;
  }
  return {ok, "max u - v over 50 pairs " + f6(worst) + " (limit 2 tol = " + f6(2.0 * opts.tol) + ")"};
}

// 10. Renormalized residual of a manufactured solution under refinement.
double manufactured_residual(int cells, int steps) {
  // u = (1 + t) cos(pi x / 2) solves u_t - (|u_x| u_x)_x = f for p = 3.
  const double T = 0.5;
  const Grid g = grid1(cells, T, steps);
  const double a = std::numbers::pi / 2.0;
  SpaceTimeField f(g);
  for (int s = 0; s < g.steps(); ++s) {
    const double t = g.step_end(s);
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      const double x = g.center(i)[0];
      const double ux = -a * (1.0 + t) * std::sin(a * x);
      const double uxx = -a * a * (1.0 + t) * std::cos(a * x);
      f.at(s, i) = std::cos(a * x) - 2.0 * std::abs(ux) * uxx;
    }
  }
  ParabolicProblem prob;
  prob.grid = g;
  prob.p = 3.0;
  prob.mu = density_measure(f);
  prob.u0 = Field(g);
  for (std::size_t i = 0; i < g.cell_count(); ++i) prob.u0[i] = std::cos(a * g.center(i)[0]);
  const Solution sol = solve_parabolic(prob, {1e-9, 100});
  double total = 0.0;
  for (const auto& e : renormalized_residual(sol, {0.5, 1.0, 2.0})) total += std::abs(e.residual);
  return total;
}

Outcome residual_rate() {
  const double coarse = manufactured_residual(50, 25);
  const double fine = manufactured_residual(100, 50);
  const double ratio = coarse / fine;
  return {ratio >= 1.4 && ratio <= 2.6,
          "residual " + f6(coarse) + " -> " + f6(fine) + ", ratio " + f6(ratio) + " (need 2 +- 30%)"};
}

// 11. CLI determinism and exit codes.
int run(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_contract() {
  const std::string exe = QPLAB_CLI;
  const fs::path dir = fs::temp_directory_path() / "qplab_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const std::string zero = write("zero.json", R"({"grid": {"dim": 1, "cells": [40], "T": 0.1, "steps": 5}, "p": 2})");
  const std::string big = write("big.json", R"({"grid": {"dim": 1, "cells": [100], "T": 1, "steps": 50},
    "p": 2, "q": 2, "omega": {"atoms": [{"x": [0], "mass": 10}]}, "lambda": 10})");
  const std::string out = (dir / "o").string();

  const int e1 = run(exe + " run exponents --N 3 --p 2 --out " + out + "1");
  const int e2 = run(exe + " run solve --config " + zero + " --out " + out + "2");
  const int e2b = run(exe + " run solve --config " + zero + " --out " + out + "2b");
  const int e3 = run(exe + " run pipeline source --config " + big + " --out " + out + "3");
  const int e3b = run(exe + " run pipeline source --config " + big + " --out " + out + "3b");
  const int e4 = run(exe + " run solve --config " + (dir / "missing.json").string() + " --out " + out + "4");

  const std::string sol = slurp(out + "2/solution.csv");
  bool zeros = !sol.empty();
  std::istringstream lines(sol);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) zeros = zeros && line.substr(line.rfind(',') + 1) == "0";
  const std::string trace = slurp(out + "3/trace.csv");
  const bool blow_row = trace.find("blow-up") != std::string::npos;
  const bool same = sol == slurp(out + "2b/solution.csv") && trace == slurp(out + "3b/trace.csv") &&
                    slurp(out + "3/solution.csv") == slurp(out + "3b/solution.csv");
  const bool ok = e1 == 0 && e2 == 0 && e2b == 0 && zeros && e3 == 2 && e3b == 2 && blow_row && e4 == 1 && same;
  return {ok, "exit codes exponents " + std::to_string(e1) + ", zero solve " + std::to_string(e2) +
                  ", oversized source " + std::to_string(e3) + ", missing config " + std::to_string(e4) +
                  "; zeros " + (zeros ? "yes" : "no") + ", blow-up row " + (blow_row ? "yes" : "no") +
                  ", byte-identical reruns " + (same ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Item {
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Item> items = {
      {"Wolff oracle", wolff_oracle},
      {"elliptic Green oracle", elliptic_green},
      {"parabolic heat oracle", heat_oracle},
      {"level-set decay", decay_estimate},
      {"absorption mass bound", mass_bound},
      {"closed-form constants", constants},
      {"composition constant", composition},
      {"monotone source iteration", source_iteration},
      {"comparison principle", comparison},
      {"renormalized residual rate", residual_rate},
      {"CLI determinism and exit codes", cli_contract},
  };
  int failed = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = items[i].fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, items[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(items.size()) - failed, items.size());
  return failed == 0 ? 0 : 1;
}
