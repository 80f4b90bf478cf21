// qplab: command-line front end. JSON configs in, CSV and JSON artifacts out.
//
// Exit status: 0 success, 1 input error, 2 invariant or bound violation.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "qplab/elliptic.hpp"
#include "qplab/pipelines.hpp"
#include "sweeps.hpp"

namespace fs = std::filesystem;
using namespace qplab;
using namespace qplab::cli;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kViolation = 2;

struct RunConfig {
  std::string command;
  std::string config;
  std::string out;
  std::optional<double> tol;
  std::optional<int> cells;
  std::optional<int> steps;
  std::uint64_t seed = 0;
  bool seed_set = false;
  // exponents
  std::optional<int> N;
  std::optional<double> p;
};

/// Aggregated constants and checks written to constants.json by every command.
class ConstantsReport {
 public:
  explicit ConstantsReport(std::string command) { j_["command"] = std::move(command); }

  void set(const std::string& key, double v) { j_["constants"][key] = finite_or_null(v); }
  void set(const std::string& key, const json& v) { j_["constants"][key] = v; }
  void check(const std::string& name, bool holds, double value = std::nan(""), double bound = std::nan("")) {
    j_["checks"].push_back({{"name", name}, {"holds", holds}, {"value", finite_or_null(value)},
                            {"bound", finite_or_null(bound)}});
    all_ = all_ && holds;
  }
  void note(const std::string& text) { j_["notes"].push_back(text); }
  bool all_hold() const { return all_; }
  void exponents(int N, double p) {
    const ExponentReport e = exponents_of(N, p);
    j_["exponents"] = {{"N", N},         {"p", p},           {"p_c", e.pc},
                       {"p_e", finite_or_null(e.pe)}, {"p_1", e.p1}, {"above_p1", e.above_p1}};
  }
  const json& data() const { return j_; }

  static json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

 private:
  static ExponentReport exponents_of(int N, double p) { return qplab::exponents(N, p); }
  json j_ = json::object();
  bool all_ = true;
};

fs::path out_dir(const RunConfig& rc) {
  if (rc.out.empty()) throw ConfigError("--out: an output directory is required for this command");
  fs::path dir(rc.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("--out: cannot create directory '" + rc.out + "'");
  return dir;
}

json load(const RunConfig& rc) {
  if (rc.config.empty()) throw ConfigError("--config: a JSON config file is required for this command");
  return load_json(rc.config);
}

MinimizeOptions solver_options(const RunConfig& rc, const json& cfg) {
  MinimizeOptions o;
  o.tol = rc.tol ? *rc.tol : number_or(cfg, "tol", o.tol, "");
  o.max_iter = integer_or(cfg, "max_iter", o.max_iter, "");
  if (!(o.tol > 0.0)) throw ConfigError("tol: must be positive");
  return o;
}

int finish(const fs::path& dir, const ConstantsReport& rep) {
  write_text(dir / "constants.json", rep.data().dump(2) + "\n");
  return rep.all_hold() ? kOk : kViolation;
}

std::string trace_csv(const IterationTrace& t) {
  std::ostringstream out;
  out << "m,sup,increment,margin,event\n";
  for (std::size_t r = 0; r < t.records.size(); ++r) {
    const auto& rec = t.records[r];
    std::string event = "ok";
    if (r + 1 == t.records.size()) event = status_name(t.status);
    out << rec.m << "," << fmt(rec.sup) << "," << fmt(rec.increment) << "," << fmt(rec.margin) << "," << event
        << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------

int cmd_exponents(const RunConfig& rc) {
  json cfg = rc.config.empty() ? json::object() : load(rc);
  const int N = rc.N ? *rc.N : integer_or(cfg, "N", -1, "");
  const double p = rc.p ? *rc.p : number_or(cfg, "p", std::nan(""), "");
  if (N < 1) throw ConfigError("N: required (--N or config field N), must be >= 1");
  if (!std::isfinite(p)) throw ConfigError("p: required (--p or config field p)");
  const ExponentReport e = exponents(N, p);
  json j = {{"p_c", e.pc}, {"p_e", ConstantsReport::finite_or_null(e.pe)}, {"p_1", e.p1}};
  std::cout << j.dump() << "\n";
  if (!rc.out.empty()) {
    ConstantsReport rep("exponents");
    rep.exponents(N, p);
    return finish(out_dir(rc), rep);
  }
  return kOk;
}

int cmd_potential(const RunConfig& rc) {
  const json cfg = load(rc);
  const fs::path dir = out_dir(rc);
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  if (!cfg.contains("omega")) throw ConfigError("config field 'omega': missing");
  const SpatialMeasure omega = read_spatial_measure(cfg["omega"], grid, "omega");
  const double p = number_or(cfg, "p", 2.0, "");
  const double R = number_or(cfg, "R", 2.0 * grid.diameter(), "");
  const std::string kind = cfg.value("kind", std::string("wolff"));
  const RadialQuadrature quad = read_quadrature(cfg);
  ConstantsReport rep("potential");
  rep.exponents(grid.dim(), p);
  Field f;
  if (kind == "wolff") {
    f = wolff_field(omega, p, R, quad);
  } else if (kind == "maximal") {
    const double eta = number_or(cfg, "eta", 0.0, "");
    f = maximal_field(omega, p, R, eta, quad);
    rep.set("eta", eta);
  } else {
    throw ConfigError("config field 'kind': expected wolff or maximal");
  }
  write_field_csv(dir / "potential.csv", f, kind);
  rep.set("R", R);
  rep.set("sup", f.max_abs());
  return finish(dir, rep);
}

int cmd_capacity(const RunConfig& rc) {
  const json cfg = load(rc);
  const fs::path dir = out_dir(rc);
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  ConstantsReport rep("capacity");
  if (cfg.contains("balls")) {
    std::vector<Ball> balls;
    for (std::size_t b = 0; b < cfg["balls"].size(); ++b) {
      const json& bj = cfg["balls"][b];
      const std::string path = "balls[" + std::to_string(b) + "]";
      Ball ball;
      const auto c = number_list_or(bj, "center", {}, path);
      if (static_cast<int>(c.size()) != grid.dim()) throw ConfigError(path + ".center: needs one entry per dimension");
      for (int k = 0; k < grid.dim(); ++k) ball.center[k] = c[k];
      ball.radius = number_or(bj, "radius", 0.0, path);
      balls.push_back(ball);
    }
    const double alpha = number(cfg, "alpha", "");
    const double s = number(cfg, "s", "");
    const double r = number_or(cfg, "r", 4.0 * grid.h(), "");
    rep.set("capacity_upper", capacity_upper(balls, alpha, s, grid, r));
    rep.set("alpha", alpha);
    rep.set("s", s);
  }
  if (cfg.contains("q")) {
    const double p = number_or(cfg, "p", 2.0, "");
    const double q = number(cfg, "q", "");
    const bool ok = dirac_admissible(grid.dim(), p, q);
    rep.set("dirac_admissible", json(ok));
    rep.exponents(grid.dim(), p);
  }
  return finish(dir, rep);
}

int cmd_solve_elliptic(const RunConfig& rc) {
  const json cfg = load(rc);
  const fs::path dir = out_dir(rc);
  const MinimizeOptions opts = solver_options(rc, cfg);
  EllipticProblem prob;
  prob.grid = read_grid(cfg, rc.cells, rc.steps);
  if (!cfg.contains("omega")) throw ConfigError("config field 'omega': missing");
  prob.omega = read_spatial_measure(cfg["omega"], prob.grid, "omega");
  prob.p = number_or(cfg, "p", 2.0, "");
  if (cfg.contains("weight")) prob.weight = read_field(cfg["weight"], prob.grid, "weight");
  prob.Lambda1 = number_or(cfg, "Lambda1", 1.0, "");
  prob.Lambda2 = number_or(cfg, "Lambda2", 1.0, "");
  const EllipticResult r = solve_elliptic(prob, opts);
  write_field_csv(dir / "field.csv", r.u, "u");
  ConstantsReport rep("solve-elliptic");
  rep.exponents(prob.grid.dim(), prob.p);
  const double cap = number_or(cfg, "kappa_cap", std::numeric_limits<double>::infinity(), "");
  const EncaCheck enca = check_enca(r.u, prob.omega, prob.p, cap, read_quadrature(cfg));
  rep.set("kappa", enca.kappa);
  rep.set("iterations", r.stats.iterations);
  rep.set("residual", r.stats.residual);
  rep.check("pointwise Wolff bound", enca.holds, enca.kappa, cap);
  if (prob.omega.is_nonnegative()) {
    double lo = 0.0;
    for (double v : r.u.values()) lo = std::min(lo, v);
    rep.check("maximum principle", lo >= -opts.tol, lo, -opts.tol);
  }
  return finish(dir, rep);
}

json solution_diagnostics(const Solution& sol) {
  json d;
  d["status"] = sol.status == Solution::Status::ok ? "ok" : "blow-up";
  d["blow_up_step"] = sol.blow_up_step;
  d["warnings"] = sol.warnings;
  d["sup"] = ConstantsReport::finite_or_null(sol.sup_abs());
  d["G_mass_total"] = ConstantsReport::finite_or_null(sol.G_mass_total());
  json steps = json::array();
  for (std::size_t s = 0; s < sol.u.size(); ++s) {
    steps.push_back({{"t", sol.grid.step_end(static_cast<int>(s))},
                     {"iterations", sol.stats[s].iterations},
                     {"residual", sol.stats[s].residual},
                     {"gradient_norm", ConstantsReport::finite_or_null(sol.gradient_norm[s])},
                     {"G_mass", ConstantsReport::finite_or_null(sol.G_mass[s])}});
  }
  d["steps"] = steps;
  return d;
}

int cmd_solve(const RunConfig& rc) {
  const json cfg = load(rc);
  const fs::path dir = out_dir(rc);
  const MinimizeOptions opts = solver_options(rc, cfg);
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  const ParabolicProblem prob = read_parabolic(cfg, grid);
  const Solution sol = solve_parabolic(prob, opts);
  write_solution_csv(dir / "solution.csv", sol);
  write_text(dir / "diagnostics.json", solution_diagnostics(sol).dump(2) + "\n");
  ConstantsReport rep("solve");
  rep.exponents(grid.dim(), prob.p);
  for (const auto& w : sol.warnings) rep.note(w);
  rep.check("no blow-up", sol.status == Solution::Status::ok);
  return finish(dir, rep);
}

// ---------------------------------------------------------------------------
// Pipelines

AbsorptionInput read_absorption_input(const json& cfg, const Grid& grid) {
  AbsorptionInput in;
  if (!cfg.contains("omega")) throw ConfigError("config field 'omega': missing");
  in.omega = read_spatial_measure(cfg["omega"], grid, "omega");
  in.F = cfg.contains("F") ? read_profile(cfg["F"], grid, "F")
                           : std::vector<double>(static_cast<std::size_t>(grid.steps()), 1.0);
  if (cfg.contains("f")) in.f = read_space_time_field(cfg["f"], grid, "f");
  in.mu = cfg.contains("mu") ? read_space_time_measure(cfg["mu"], grid, "mu") : product(in.omega, in.F);
  in.u0 = cfg.contains("u0") ? read_field(cfg["u0"], grid, "u0") : Field(grid);
  in.p = number_or(cfg, "p", 2.0, "");
  if (cfg.contains("G")) in.G = read_nonlinearity(cfg["G"], "G");
  in.lambda = number_or(cfg, "lambda", 1.0, "");
  return in;
}

void absorption_artifacts(const fs::path& dir, const AbsorptionReport& r, ConstantsReport& rep) {
  std::ostringstream lv;
  lv << "level,G_mass,data_variation,monotone\n";
  for (const auto& l : r.levels) {
    lv << l.level << "," << fmt(l.G_mass) << "," << fmt(l.data_variation) << "," << (l.monotone ? 1 : 0) << "\n";
  }
  write_text(dir / "levels.csv", lv.str());
  write_solution_csv(dir / "solution.csv", r.finest);
  double gmax = 0.0;
  for (const auto& l : r.levels) gmax = std::max(gmax, l.G_mass);
  rep.check("G mass bound", r.mass_bound_holds, gmax, r.mass_bound);
  rep.check("approximating data monotone", r.sequences_monotone);
  if (r.bound_checked) {
    rep.set("kappa", r.kappa);
    rep.check("Wolff bound", r.bound_holds, r.bound_margin, 0.0);
  }
}

int pipeline_absorption(const RunConfig& rc, const json& cfg, const fs::path& dir, const MinimizeOptions& opts) {
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  AbsorptionInput in = read_absorption_input(cfg, grid);
  const std::vector<int> levels = int_list_or(cfg, "levels", {1, 2, 4}, "");
  const double slack = number_or(cfg, "slack", 0.05, "");
  ConstantsReport rep("pipeline absorption");
  rep.exponents(grid.dim(), in.p);
  if (cfg.contains("exp_gate")) {
    const json& g = cfg["exp_gate"];
    const int mode = integer_or(g, "mode", 1, "exp_gate");
    const double beta = number(g, "beta", "exp_gate");
    const double tau = number_or(g, "tau", 1.0, "exp_gate");
    const double beta0 = number_or(g, "beta0", 0.0, "exp_gate");
    std::optional<double> kappa;
    if (g.contains("kappa")) kappa = number(g, "kappa", "exp_gate");
    const ExpGateReport gate =
        exponential_absorption_gate(in.omega, in.p, beta, tau, mode, beta0, kappa, &in, levels, opts);
    rep.set("maximal_norm", gate.maximal_norm);
    rep.set("M0", gate.M0);
    if (mode == 1) {
      rep.set("delta0", gate.delta0);
      rep.set("kappa", gate.kappa);
    }
    rep.check(mode == 1 ? "maximal norm below M0" : "maximal norm finite", gate.pass, gate.maximal_norm, gate.M0);
    if (gate.run) absorption_artifacts(dir, *gate.run, rep);
    return finish(dir, rep);
  }
  const AbsorptionReport r = absorption_general(in, levels, opts, slack);
  absorption_artifacts(dir, r, rep);
  return finish(dir, rep);
}

int pipeline_source(const RunConfig& rc, const json& cfg, const fs::path& dir, const MinimizeOptions& opts) {
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  PowerSourceInput in;
  if (!cfg.contains("omega")) throw ConfigError("config field 'omega': missing");
  in.omega = read_spatial_measure(cfg["omega"], grid, "omega");
  if (cfg.contains("mu")) in.mu = read_space_time_measure(cfg["mu"], grid, "mu");
  in.u0 = cfg.contains("u0") ? read_field(cfg["u0"], grid, "u0") : Field(grid);
  in.p = number_or(cfg, "p", 2.0, "");
  in.q = number_or(cfg, "q", 2.0, "");
  in.lambda = number_or(cfg, "lambda", in.omega.mass(), "");
  if (cfg.contains("kappa")) in.kappa = number(cfg, "kappa", "");
  if (cfg.contains("M_hat")) in.M_hat = number(cfg, "M_hat", "");
  in.m_max = integer_or(cfg, "m_max", in.m_max, "");
  in.increment_tol = number_or(cfg, "increment_tol", in.increment_tol, "");
  const PowerSourceReport r = iterate_power_source(in, opts, read_quadrature(cfg));
  write_text(dir / "trace.csv", trace_csv(r.trace));
  write_solution_csv(dir / "solution.csv", r.solution);
  write_field_csv(dir / "envelope.csv", r.envelope, "envelope");
  ConstantsReport rep("pipeline source");
  rep.exponents(grid.dim(), in.p);
  const auto& c = r.constants;
  rep.set("kappa", c.K);
  rep.set("M_hat", c.M_hat);
  rep.set("beta_p", c.beta_p);
  rep.set("A1", c.A1);
  rep.set("A2", c.A2);
  rep.set("lambda0", c.lambda0);
  rep.set("b0", c.b0);
  rep.set("lambda", in.lambda);
  rep.set("status", json(status_name(r.trace.status)));
  rep.check("smallness gate", r.gate_passed, in.lambda, c.lambda0);
  rep.check("no blow-up", r.trace.status != IterationTrace::Status::blow_up);
  rep.check("envelope respected", r.envelope_holds);
  rep.check("iterates monotone", r.trace.monotone);
  return finish(dir, rep);
}

int pipeline_exp_source(const RunConfig& rc, const json& cfg, const fs::path& dir, const MinimizeOptions& opts) {
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  ExpSourceInput in;
  if (!cfg.contains("omega")) throw ConfigError("config field 'omega': missing");
  in.omega = read_spatial_measure(cfg["omega"], grid, "omega");
  if (cfg.contains("mu")) in.mu = read_space_time_measure(cfg["mu"], grid, "mu");
  in.u0 = cfg.contains("u0") ? read_field(cfg["u0"], grid, "u0") : Field(grid);
  in.p = number_or(cfg, "p", 2.0, "");
  in.beta = number_or(cfg, "beta", 1.0, "");
  in.tau = number_or(cfg, "tau", 1.0, "");
  in.l = integer_or(cfg, "l", in.l, "");
  in.b0 = number_or(cfg, "b0", in.u0.max_abs(), "");
  if (cfg.contains("M0")) in.M0 = number(cfg, "M0", "");
  if (cfg.contains("kappa")) in.kappa = number(cfg, "kappa", "");
  in.m_max = integer_or(cfg, "m_max", in.m_max, "");
  in.increment_tol = number_or(cfg, "increment_tol", in.increment_tol, "");
  const ExpSourceReport r = iterate_exponential_source(in, opts, read_quadrature(cfg));
  write_text(dir / "trace.csv", trace_csv(r.trace));
  write_solution_csv(dir / "solution.csv", r.solution);
  write_field_csv(dir / "envelope.csv", r.envelope, "envelope");
  ConstantsReport rep("pipeline exp-source");
  rep.exponents(grid.dim(), in.p);
  rep.set("kappa", r.kappa);
  rep.set("c_p", r.c_p);
  rep.set("maximal_norm", r.maximal_norm);
  rep.set("envelope_integral", r.envelope_integral);
  rep.set("status", json(status_name(r.trace.status)));
  if (r.gate_checked) rep.check("maximal norm below M0", r.gate_passed, r.maximal_norm, *in.M0);
  rep.check("envelope integrable", r.envelope_integrable, r.envelope_integral);
  rep.check("no blow-up", r.trace.status != IterationTrace::Status::blow_up);
  rep.check("envelope respected", r.envelope_holds);
  rep.check("iterates monotone", r.trace.monotone);
  return finish(dir, rep);
}

int pipeline_subcritical(const RunConfig& rc, const json& cfg, const fs::path& dir, const MinimizeOptions& opts) {
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  const ParabolicProblem prob = read_parabolic(cfg, grid);
  ConstantsReport rep("pipeline subcritical");
  rep.exponents(grid.dim(), prob.p);
  if (prob.perturbation.role == Perturbation::Role::source) {
    const double budget = number(cfg, "eps_budget", "");
    const SourceReport r = subcritical_source(prob, budget, integer_or(cfg, "max_iter_source", 30, ""),
                                              number_or(cfg, "increment_tol", 1e-6, ""),
                                              integer_or(cfg, "window", 3, ""), opts);
    write_text(dir / "trace.csv", trace_csv(r.trace));
    write_solution_csv(dir / "solution.csv", r.solution);
    std::ostringstream ks;
    ks << "m,K\n";
    for (std::size_t i = 0; i < r.K_surrogate.size(); ++i) ks << i + 1 << "," << fmt(r.K_surrogate[i]) << "\n";
    write_text(dir / "surrogate.csv", ks.str());
    rep.set("status", json(status_name(r.trace.status)));
    rep.check("no blow-up", r.trace.status != IterationTrace::Status::blow_up);
    rep.check("iterates monotone", r.trace.monotone);
    return finish(dir, rep);
  }
  const SubcriticalReport r =
      subcritical_absorption(prob, int_list_or(cfg, "levels", {1, 2, 4, 8}, ""), opts, number_or(cfg, "slack", 0.05, ""));
  std::ostringstream lv, tails;
  lv << "level,G_mass,bound,l1_distance\n";
  tails << "level,L,tail\n";
  for (const auto& l : r.levels) {
    lv << l.level << "," << fmt(l.G_mass) << "," << fmt(l.bound) << "," << fmt(l.l1_distance) << "\n";
    for (const auto& [L, v] : l.tail) tails << l.level << "," << fmt(L) << "," << fmt(v) << "\n";
  }
  write_text(dir / "levels.csv", lv.str());
  write_text(dir / "tails.csv", tails.str());
  write_solution_csv(dir / "solution.csv", r.finest);
  rep.check("G mass bound", r.mass_bound_holds, r.levels.back().G_mass, r.levels.back().bound);
  rep.check("Cauchy distances decreasing", r.distances_decreasing);
  return finish(dir, rep);
}

int cmd_pipeline(const RunConfig& rc, const std::string& which) {
  const json cfg = load(rc);
  const fs::path dir = out_dir(rc);
  const MinimizeOptions opts = solver_options(rc, cfg);
  if (which == "absorption") return pipeline_absorption(rc, cfg, dir, opts);
  if (which == "source") return pipeline_source(rc, cfg, dir, opts);
  if (which == "exp-source") return pipeline_exp_source(rc, cfg, dir, opts);
  return pipeline_subcritical(rc, cfg, dir, opts);
}

// ---------------------------------------------------------------------------
// Verification

int verify_residual(const RunConfig& rc, const json& cfg, const fs::path& dir, const MinimizeOptions& opts) {
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  const ParabolicProblem prob = read_parabolic(cfg, grid);
  const Solution sol = solve_parabolic(prob, opts);
  const auto k = number_list_or(cfg, "k", {0.5, 1.0, 2.0}, "");
  const double slack = number_or(cfg, "slack", 0.05, "");
  const auto entries = renormalized_residual(sol, k);
  std::ostringstream out;
  out << "k,phi,residual,magnitude\n";
  double worst = 0.0;
  for (const auto& e : entries) {
    out << fmt(e.k) << "," << e.phi << "," << fmt(e.residual) << "," << fmt(e.magnitude) << "\n";
    if (e.magnitude > 0.0) worst = std::max(worst, std::abs(e.residual) / e.magnitude);
  }
  write_text(dir / "residual.csv", out.str());
  ConstantsReport rep("verify residual");
  rep.exponents(grid.dim(), prob.p);
  rep.check("relative residual", worst <= slack, worst, slack);
  return finish(dir, rep);
}

int verify_decay(const RunConfig& rc, const json& cfg, const fs::path& dir, const MinimizeOptions& opts) {
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  const ParabolicProblem prob = read_parabolic(cfg, grid);
  const Solution sol = solve_parabolic(prob, opts);
  const double mass = prob.mu.total_variation() + integrate_abs(prob.u0);
  const DecayReport d = levelset_decay_check(sol, mass, integer_or(cfg, "samples", 12, ""));
  std::ostringstream out;
  out << "k,measure\n";
  for (std::size_t i = 0; i < d.k.size(); ++i) out << fmt(d.k[i]) << "," << fmt(d.m[i]) << "\n";
  write_text(dir / "decay.csv", out.str());
  ConstantsReport rep("verify decay");
  rep.exponents(grid.dim(), prob.p);
  rep.set("C_hat", d.C_hat);
  rep.set("exponent", d.exponent);
  const double pc = exponents(grid.dim(), prob.p).pc;
  const double slack = number_or(cfg, "exponent_slack", 0.2, "");
  rep.check("level-set decay exponent", d.defined && d.exponent <= -pc + slack, d.exponent, -pc + slack);
  return finish(dir, rep);
}

int verify_comparison(const RunConfig& rc, const json& cfg, const fs::path& dir, const MinimizeOptions& opts) {
  const Grid grid = read_grid(cfg, rc.cells, rc.steps);
  const auto ps = number_list_or(cfg, "p", {2.0, 3.0}, "");
  const int pairs = integer_or(cfg, "pairs", 50, "");
  if (pairs < 1) throw ConfigError("config field 'pairs': must be >= 1");
  const std::uint64_t seed =
      rc.seed_set ? rc.seed : static_cast<std::uint64_t>(integer_or(cfg, "seed", 0, ""));
  std::mt19937_64 rng(seed);
  std::ostringstream out;
  out << "pair,p,max_excess,holds\n";
  ConstantsReport rep("verify comparison");
  double worst = -std::numeric_limits<double>::infinity();
  bool all = true;
  for (int k = 0; k < pairs; ++k) {
    const double p = ps[static_cast<std::size_t>(k) % ps.size()];
    const auto [lo, hi] = ordered_pair(grid, p, rng);
    const ComparisonResult r = comparison_solve(lo, hi, opts);
    out << k << "," << fmt(p) << "," << fmt(r.max_excess) << "," << (r.holds ? 1 : 0) << "\n";
    worst = std::max(worst, r.max_excess);
    all = all && r.holds;
  }
  write_text(dir / "comparison.csv", out.str());
  rep.set("seed", json(seed));
  rep.check("ordering preserved", all, worst, 2.0 * opts.tol);
  return finish(dir, rep);
}

int cmd_verify(const RunConfig& rc, const std::string& which) {
  const json cfg = load(rc);
  const fs::path dir = out_dir(rc);
  const MinimizeOptions opts = solver_options(rc, cfg);
  if (which == "residual") return verify_residual(rc, cfg, dir, opts);
  if (which == "decay") return verify_decay(rc, cfg, dir, opts);
  return verify_comparison(rc, cfg, dir, opts);
}

// ---------------------------------------------------------------------------
// Report

std::string cell(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) row.push_back(c);
    rows.push_back(row);
  }
  return rows;
}

void table(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  out << "|";
  for (const auto& h : header) out << " " << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out << "---|";
  out << "\n";
  for (const auto& r : rows) {
    out << "|";
    for (const auto& c : r) out << " " << c << " |";
    out << "\n";
  }
}

int cmd_report(const std::string& dir_arg) {
  const fs::path dir(dir_arg);
  const fs::path constants = dir / "constants.json";
  if (!fs::exists(constants)) {
    std::cerr << "report: no artifacts in '" << dir_arg << "'; expected constants.json (required) and optionally "
              << "trace.csv, levels.csv, solution.csv, field.csv, potential.csv, residual.csv, decay.csv, "
              << "comparison.csv\n";
    return kInputError;
  }
  const json j = load_json(constants);
  std::ostringstream out;
  out << "# " << j.value("command", std::string("run")) << "\n\n";
  std::vector<std::string> header;
  std::vector<std::string> row;
  if (j.contains("exponents")) {
    for (const char* k : {"N", "p", "p_c", "p_e", "p_1"}) {
      header.push_back(k);
      row.push_back(cell(j["exponents"][k]));
    }
  }
  if (j.contains("constants")) {
    for (auto it = j["constants"].begin(); it != j["constants"].end(); ++it) {
      header.push_back(it.key());
      row.push_back(cell(it.value()));
    }
  }
  if (!header.empty()) {
    out << "## Constants\n\n";
    table(out, header, {row});
    out << "\n";
  }
  if (j.contains("checks")) {
    out << "## Checks\n\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : j["checks"]) {
      rows.push_back({c["name"].get<std::string>(), c["holds"].get<bool>() ? "pass" : "FAIL", cell(c["value"]),
                      cell(c["bound"])});
    }
    table(out, {"check", "result", "value", "bound"}, rows);
    out << "\n";
  }
  for (const char* name : {"trace.csv", "levels.csv", "decay.csv"}) {
    if (!fs::exists(dir / name)) continue;
    auto rows = read_csv(dir / name);
    if (rows.empty()) continue;
    const auto hdr = rows.front();
    rows.erase(rows.begin());
    out << "## " << name << "\n\n";
    table(out, hdr, rows);
    out << "\n";
  }
  std::cout << out.str();
  write_text(dir / "report.md", out.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty() && args.front() == "run") args.erase(args.begin());
  std::reverse(args.begin(), args.end());

  CLI::App app{"qplab: p-Laplace parabolic problems with measure data"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig rc;
  app.add_option("--config,--problem", rc.config, "JSON config file");
  app.add_option("--out", rc.out, "Output directory");
  app.add_option("--tol", rc.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  app.add_option("--cells", rc.cells, "Cells per axis (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--steps", rc.steps, "Time steps (overrides the config)")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", rc.seed, "Seed for randomized sweeps");

  auto* exps = app.add_subcommand("exponents", "Critical exponents p_c, p_e, p_1");
  exps->add_option("--N", rc.N, "Dimension");
  exps->add_option("--p", rc.p, "Exponent p");
  auto* pot = app.add_subcommand("potential", "Wolff or maximal field as CSV");
  auto* cap = app.add_subcommand("capacity", "Bessel capacity upper bound and Dirac admissibility");
  auto* ell = app.add_subcommand("solve-elliptic", "Elliptic problem with measure data");
  auto* sol = app.add_subcommand("solve", "Parabolic problem with measure data");
  auto* pipe = app.add_subcommand("pipeline", "Existence pipelines");
  pipe->require_subcommand(1);
  std::string pipe_kind;
  for (const char* k : {"absorption", "source", "exp-source", "subcritical"}) {
    pipe->add_subcommand(k)->callback([&pipe_kind, k] { pipe_kind = k; });
  }
  auto* ver = app.add_subcommand("verify", "Residual, decay and comparison checks");
  ver->require_subcommand(1);
  std::string verify_kind;
  for (const char* k : {"residual", "decay", "comparison"}) {
    ver->add_subcommand(k)->callback([&verify_kind, k] { verify_kind = k; });
  }
  auto* rep = app.add_subcommand("report", "Markdown summary of an output directory");
  std::string report_dir;
  rep->add_option("dir", report_dir, "Output directory of a previous run")->required();

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }
  rc.seed_set = seed_opt->count() > 0;

  try {
    if (*exps) return cmd_exponents(rc);
    if (*pot) return cmd_potential(rc);
    if (*cap) return cmd_capacity(rc);
    if (*ell) return cmd_solve_elliptic(rc);
    if (*sol) return cmd_solve(rc);
    if (*pipe) return cmd_pipeline(rc, pipe_kind);
    if (*ver) return cmd_verify(rc, verify_kind);
    if (*rep) return cmd_report(report_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kViolation;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed config: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
