#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qplab/parabolic.hpp"
#include "qplab/potential.hpp"

namespace qplab::cli {

using nlohmann::json;

/// Malformed configuration; the message names the offending field.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

json load_json(const std::filesystem::path& path);

double number(const json& cfg, const std::string& key, const std::string& path);
double number_or(const json& cfg, const std::string& key, double fallback, const std::string& path);
int integer_or(const json& cfg, const std::string& key, int fallback, const std::string& path);
std::vector<int> int_list_or(const json& cfg, const std::string& key, std::vector<int> fallback,
                             const std::string& path);
std::vector<double> number_list_or(const json& cfg, const std::string& key, std::vector<double> fallback,
                                   const std::string& path);

/// {"dim", "lower", "upper", "cells", "T", "steps"}; `cells` and `steps` override when set.
Grid read_grid(const json& cfg, std::optional<int> cells, std::optional<int> steps);

/// Number or expression in x, y, z evaluated at cell centers.
Field read_field(const json& j, const Grid& grid, const std::string& path);
/// Number or expression in x, y, z, t evaluated at cell centers and step midpoints.
SpaceTimeField read_space_time_field(const json& j, const Grid& grid, const std::string& path);
/// Array with one value per step, or number/expression in t evaluated at step midpoints.
std::vector<double> read_profile(const json& j, const Grid& grid, const std::string& path);

/// {"atoms": [{"x": [..], "mass": m}], "density": expr}.
SpatialMeasure read_spatial_measure(const json& j, const Grid& grid, const std::string& path);
/// {"atoms": [{"x", "t", "mass"}], "density": expr, "product": {"omega": .., "profile": ..}}.
SpaceTimeMeasure read_space_time_measure(const json& j, const Grid& grid, const std::string& path);

/// {"kind": "power"|"exponential"|"truncated_exp"|"none", "q", "tau", "beta", "l"}.
Nonlinearity read_nonlinearity(const json& j, const std::string& path);
/// {"role": "absorption"|"source"|"none", "G": {...}, "lambda"}.
Perturbation read_perturbation(const json& j, const std::string& path);

/// Grid plus "mu", "u0", "p", "perturbation", "weight", "Lambda1", "Lambda2".
ParabolicProblem read_parabolic(const json& cfg, const Grid& grid, const std::string& path = "");

RadialQuadrature read_quadrature(const json& cfg);

// Output

/// Shortest round-trip-stable formatting with fixed precision, so repeated runs are byte-identical.
std::string fmt(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
/// Rows (x[, y[, z]], value).
void write_field_csv(const std::filesystem::path& path, const Field& f, const std::string& name = "value");
/// Rows (t, x[, y[, z]], u) with t = t_{s+1}.
void write_solution_csv(const std::filesystem::path& path, const Solution& sol);

}  // namespace qplab::cli
