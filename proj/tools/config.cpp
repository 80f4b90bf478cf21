#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "expression.hpp"

namespace qplab::cli {
namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

Expression parse_expr(const json& j, const std::string& path) {
  try {
    if (j.is_number()) return Expression(fmt(j.get<double>()));
    if (j.is_string()) return Expression(j.get<std::string>());
  } catch (const ParseError& e) {
    bad(path, e.what());
  }
  bad(path, "expected a number or an expression string");
}

Vars vars_at(const Point& x, double t) { return Vars{x[0], x[1], x[2], t}; }

Point read_point(const json& j, const Grid& grid, const std::string& path) {
  Point x{};
  if (j.is_number()) {
    if (grid.dim() != 1) bad(path, "expected an array of " + std::to_string(grid.dim()) + " coordinates");
    x[0] = j.get<double>();
    return x;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != grid.dim()) {
    bad(path, "expected an array of " + std::to_string(grid.dim()) + " coordinates");
  }
  for (int k = 0; k < grid.dim(); ++k) {
    if (!j[k].is_number()) bad(path, "coordinates must be numbers");
    x[k] = j[k].get<double>();
  }
  return x;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) bad(join(path, it.key()), "unknown field");
  }
}

}  // namespace

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

double number(const json& cfg, const std::string& key, const std::string& path) {
  if (!cfg.is_object() || !cfg.contains(key)) bad(join(path, key), "missing");
  if (!cfg[key].is_number()) bad(join(path, key), "expected a number");
  return cfg[key].get<double>();
}

double number_or(const json& cfg, const std::string& key, double fallback, const std::string& path) {
  if (!cfg.is_object() || !cfg.contains(key)) return fallback;
  return number(cfg, key, path);
}

int integer_or(const json& cfg, const std::string& key, int fallback, const std::string& path) {
  if (!cfg.is_object() || !cfg.contains(key)) return fallback;
  if (!cfg[key].is_number_integer()) bad(join(path, key), "expected an integer");
  return cfg[key].get<int>();
}

std::vector<int> int_list_or(const json& cfg, const std::string& key, std::vector<int> fallback,
                             const std::string& path) {
  if (!cfg.is_object() || !cfg.contains(key)) return fallback;
  const json& j = cfg[key];
  if (!j.is_array() || j.empty()) bad(join(path, key), "expected a nonempty array of integers");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) bad(join(path, key), "expected integers");
    out.push_back(v.get<int>());
  }
  return out;
}

std::vector<double> number_list_or(const json& cfg, const std::string& key, std::vector<double> fallback,
                                   const std::string& path) {
  if (!cfg.is_object() || !cfg.contains(key)) return fallback;
  const json& j = cfg[key];
  if (!j.is_array() || j.empty()) bad(join(path, key), "expected a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) bad(join(path, key), "expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Grid read_grid(const json& cfg, std::optional<int> cells, std::optional<int> steps) {
  if (!cfg.is_object() || !cfg.contains("grid")) bad("grid", "missing");
  const json& g = cfg["grid"];
  check_keys(g, {"dim", "lower", "upper", "cells", "T", "steps"}, "grid");
  GridSpec spec;
  spec.dim = integer_or(g, "dim", 1, "grid");
  if (spec.dim < 1 || spec.dim > 3) bad("grid.dim", "must be 1, 2 or 3");
  const auto lower = number_list_or(g, "lower", std::vector<double>(spec.dim, -1.0), "grid");
  const auto upper = number_list_or(g, "upper", std::vector<double>(spec.dim, 1.0), "grid");
  const auto n = int_list_or(g, "cells", std::vector<int>(spec.dim, 100), "grid");
  if (static_cast<int>(lower.size()) != spec.dim) bad("grid.lower", "needs one entry per dimension");
  if (static_cast<int>(upper.size()) != spec.dim) bad("grid.upper", "needs one entry per dimension");
  if (static_cast<int>(n.size()) != spec.dim) bad("grid.cells", "needs one entry per dimension");
  for (int k = 0; k < spec.dim; ++k) {
    spec.lower[k] = lower[k];
    spec.upper[k] = upper[k];
    spec.cells[k] = cells ? *cells : n[k];
  }
  spec.T = number_or(g, "T", 1.0, "grid");
  spec.steps = steps ? *steps : integer_or(g, "steps", 1, "grid");
  try {
    return Grid(spec);
  } catch (const InvalidArgument& e) {
    bad("grid", e.what());
  }
}

Field read_field(const json& j, const Grid& grid, const std::string& path) {
  const Expression e = parse_expr(j, path);
  if (e.uses_time()) bad(path, "must not depend on t");
  Field f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = e(vars_at(grid.center(i), 0.0));
  return f;
}

SpaceTimeField read_space_time_field(const json& j, const Grid& grid, const std::string& path) {
  const Expression e = parse_expr(j, path);
  SpaceTimeField f(grid);
  for (int s = 0; s < grid.steps(); ++s) {
    const double t = grid.step_midpoint(s);
    for (std::size_t i = 0; i < grid.cell_count(); ++i) f.at(s, i) = e(vars_at(grid.center(i), t));
  }
  return f;
}

std::vector<double> read_profile(const json& j, const Grid& grid, const std::string& path) {
  std::vector<double> out;
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != grid.steps()) bad(path, "needs one value per time step");
    for (const auto& v : j) {
      if (!v.is_number()) bad(path, "expected numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  const Expression e = parse_expr(j, path);
  for (int s = 0; s < grid.steps(); ++s) out.push_back(e(Vars{0.0, 0.0, 0.0, grid.step_midpoint(s)}));
  return out;
}

SpatialMeasure read_spatial_measure(const json& j, const Grid& grid, const std::string& path) {
  check_keys(j, {"atoms", "density"}, path);
  SpatialMeasure m(grid);
  if (j.contains("atoms")) {
    const std::string ap = join(path, "atoms");
    if (!j["atoms"].is_array()) bad(ap, "expected an array");
    for (std::size_t a = 0; a < j["atoms"].size(); ++a) {
      const json& atom = j["atoms"][a];
      const std::string p = ap + "[" + std::to_string(a) + "]";
      check_keys(atom, {"x", "mass"}, p);
      if (!atom.contains("x")) bad(join(p, "x"), "missing");
      const Point x = read_point(atom["x"], grid, join(p, "x"));
      try {
        m += dirac(grid, x, number(atom, "mass", p));
      } catch (const InvalidArgument& e) {
        bad(p, e.what());
      }
    }
  }
  if (j.contains("density")) m += density_measure(read_field(j["density"], grid, join(path, "density")));
  return m;
}

SpaceTimeMeasure read_space_time_measure(const json& j, const Grid& grid, const std::string& path) {
  check_keys(j, {"atoms", "density", "product"}, path);
  SpaceTimeMeasure m(grid);
  if (j.contains("atoms")) {
    const std::string ap = join(path, "atoms");
    if (!j["atoms"].is_array()) bad(ap, "expected an array");
    for (std::size_t a = 0; a < j["atoms"].size(); ++a) {
      const json& atom = j["atoms"][a];
      const std::string p = ap + "[" + std::to_string(a) + "]";
      check_keys(atom, {"x", "t", "mass"}, p);
      if (!atom.contains("x")) bad(join(p, "x"), "missing");
      const Point x = read_point(atom["x"], grid, join(p, "x"));
      try {
        m += dirac(grid, x, number(atom, "t", p), number(atom, "mass", p));
      } catch (const InvalidArgument& e) {
        bad(p, e.what());
      }
    }
  }
  if (j.contains("density")) {
    m += density_measure(read_space_time_field(j["density"], grid, join(path, "density")));
  }
  if (j.contains("product")) {
    const std::string pp = join(path, "product");
    const json& pj = j["product"];
    check_keys(pj, {"omega", "profile"}, pp);
    if (!pj.contains("omega")) bad(join(pp, "omega"), "missing");
    const SpatialMeasure omega = read_spatial_measure(pj["omega"], grid, join(pp, "omega"));
    const std::vector<double> profile =
        pj.contains("profile") ? read_profile(pj["profile"], grid, join(pp, "profile"))
                               : std::vector<double>(static_cast<std::size_t>(grid.steps()), 1.0);
    m += product(omega, profile);
  }
  return m;
}

Nonlinearity read_nonlinearity(const json& j, const std::string& path) {
  check_keys(j, {"kind", "q", "tau", "beta", "l"}, path);
  Nonlinearity g;
  const std::string kind = j.value("kind", std::string("none"));
  if (kind == "none") {
    g.kind = Nonlinearity::Kind::none;
  } else if (kind == "power") {
    g.kind = Nonlinearity::Kind::power;
  } else if (kind == "exponential") {
    g.kind = Nonlinearity::Kind::exponential;
  } else if (kind == "truncated_exp") {
    g.kind = Nonlinearity::Kind::truncated_exp;
  } else {
    bad(join(path, "kind"), "expected none, power, exponential or truncated_exp");
  }
  g.q = number_or(j, "q", g.q, path);
  g.tau = number_or(j, "tau", g.tau, path);
  g.beta = number_or(j, "beta", g.beta, path);
  g.l = integer_or(j, "l", g.l, path);
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    bad(path, e.what());
  }
  return g;
}

Perturbation read_perturbation(const json& j, const std::string& path) {
  check_keys(j, {"role", "G", "lambda"}, path);
  Perturbation pert;
  const std::string role = j.value("role", std::string("none"));
  if (role == "none") {
    pert.role = Perturbation::Role::none;
  } else if (role == "absorption") {
    pert.role = Perturbation::Role::absorption;
  } else if (role == "source") {
    pert.role = Perturbation::Role::source;
  } else {
    bad(join(path, "role"), "expected none, absorption or source");
  }
  if (j.contains("G")) pert.G = read_nonlinearity(j["G"], join(path, "G"));
  pert.lambda = number_or(j, "lambda", 1.0, path);
  return pert;
}

ParabolicProblem read_parabolic(const json& cfg, const Grid& grid, const std::string& path) {
  ParabolicProblem prob;
  prob.grid = grid;
  prob.mu = cfg.contains("mu") ? read_space_time_measure(cfg["mu"], grid, join(path, "mu")) : SpaceTimeMeasure(grid);
  prob.u0 = cfg.contains("u0") ? read_field(cfg["u0"], grid, join(path, "u0")) : Field(grid);
  prob.p = number_or(cfg, "p", 2.0, path);
  if (cfg.contains("perturbation")) prob.perturbation = read_perturbation(cfg["perturbation"], join(path, "perturbation"));
  if (cfg.contains("weight")) prob.weight = read_field(cfg["weight"], grid, join(path, "weight"));
  prob.Lambda1 = number_or(cfg, "Lambda1", 1.0, path);
  prob.Lambda2 = number_or(cfg, "Lambda2", 1.0, path);
  return prob;
}

RadialQuadrature read_quadrature(const json& cfg) {
  RadialQuadrature q;
  if (!cfg.contains("quadrature")) return q;
  const json& j = cfg["quadrature"];
  check_keys(j, {"kernel_dim", "nodes", "r_min"}, "quadrature");
  q.kernel_dim = integer_or(j, "kernel_dim", q.kernel_dim, "quadrature");
  q.nodes = integer_or(j, "nodes", q.nodes, "quadrature");
  q.r_min = number_or(j, "r_min", q.r_min, "quadrature");
  return q;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

namespace {

std::string coords_header(int dim) {
  static const char* names[] = {"x", "y", "z"};
  std::string h;
  for (int k = 0; k < dim; ++k) h += std::string(names[k]) + ",";
  return h;
}

std::string coords(const Grid& grid, std::size_t i) {
  const Point x = grid.center(i);
  std::string s;
  for (int k = 0; k < grid.dim(); ++k) s += fmt(x[k]) + ",";
  return s;
}

}  // namespace

void write_field_csv(const std::filesystem::path& path, const Field& f, const std::string& name) {
  std::ostringstream out;
  out << coords_header(f.grid().dim()) << name << "\n";
  for (std::size_t i = 0; i < f.size(); ++i) out << coords(f.grid(), i) << fmt(f[i]) << "\n";
  write_text(path, out.str());
}

void write_solution_csv(const std::filesystem::path& path, const Solution& sol) {
  std::ostringstream out;
  out << "t," << coords_header(sol.grid.dim()) << "u\n";
  for (std::size_t s = 0; s < sol.u.size(); ++s) {
    const std::string t = fmt(sol.grid.step_end(static_cast<int>(s))) + ",";
    for (std::size_t i = 0; i < sol.grid.cell_count(); ++i) {
      out << t << coords(sol.grid, i) << fmt(sol.u[s][i]) << "\n";
    }
  }
  write_text(path, out.str());
}

}  // namespace qplab::cli
