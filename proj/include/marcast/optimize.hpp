#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace marcast::opt {

/// Objective to minimize. May return +inf outside the feasible region.
using Objective = std::function<double(std::span<const double>)>;

struct Result {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    std::size_t max_evaluations = 4000;
    double f_tolerance = 1e-10;  ///< spread of simplex values, relative to 1 + |f_best|
    double x_tolerance = 1e-9;   ///< simplex diameter (max abs coordinate difference)
};

/// Nelder-Mead simplex with standard coefficients. `steps` gives the initial
/// edge length per coordinate.
[[nodiscard]] Result nelder_mead(const Objective& f, std::vector<double> start, std::span<const double> steps,
                                 const NelderMeadOptions& options = {});

struct BfgsOptions {
    std::size_t max_iterations = 200;
    double gradient_tolerance = 1e-7;
    double step = 1e-6;  ///< relative finite-difference step
};

/// Quasi-Newton BFGS with central-difference gradients and backtracking line search.
[[nodiscard]] Result bfgs(const Objective& f, std::vector<double> start, const BfgsOptions& options = {});

/// Central-difference gradient. Falls back to a one-sided difference when a probe is infeasible.
[[nodiscard]] std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x,
                                                     double relative_step = 1e-6);

/// Central-difference Hessian (row-major n x n). Entries are NaN if any probe is infeasible.
[[nodiscard]] std::vector<double> numerical_hessian(const Objective& f, std::span<const double> x,
                                                    double relative_step = 1e-4);

}  // namespace marcast::opt
