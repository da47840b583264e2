#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace epifamily {

struct NelderMeadOptions {
    /// Initial vertex i is x0 + step * e_i.
    double initial_step = 0.1;
    /// Stop when the largest vertex distance from the best vertex falls below this.
    double diameter_tolerance = 1e-6;
    std::size_t max_iterations = 500;
    /// Stop as soon as f reaches this value (a known lower bound of f).
    double lower_bound = -std::numeric_limits<double>::infinity();
    /// After convergence, restart from the best vertex with a fresh simplex
    /// up to this many times while the restart keeps improving f.
    std::size_t restarts = 2;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Deterministic for a given starting point;
/// ties keep earlier vertices ranked first, so a flat objective returns x0.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                             const NelderMeadOptions& options = {});

} // namespace epifamily
