#pragma once

#include <random>
#include <utility>

#include "qplab/parabolic.hpp"

namespace qplab::cli {

/// Random data pair with lower <= upper: smooth signed initial data and
/// forcing densities, an optional shared atom whose mass grows from lower to
/// upper, and a shared power absorption in half of the draws.
std::pair<ParabolicProblem, ParabolicProblem> ordered_pair(const Grid& grid, double p, std::mt19937_64& rng);

}  // namespace qplab::cli
