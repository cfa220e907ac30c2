#pragma once

#include <functional>
#include <vector>

#include "essdyn/sphere.hpp"

namespace essdyn {

/// Tuning for the grid-seeded complex Newton solver.
struct NewtonParams {
    int grid = 64;              // seeds per axis across the window
    int max_steps = 60;
    double step_tol = 1e-12;    // stop when |dz| <= step_tol
    double diverge_radius = 1e6;
    double dedup_tol = 1e-9;
    double residual_tol = 1e-8;
};

/// Roots of fn inside the window, found by Newton iteration seeded on a
/// uniform grid. fd is the derivative. Either callback may signal "no value"
/// by returning false. Results are deduplicated and sorted by (re, im).
std::vector<Complex> grid_newton_roots(
    const std::function<bool(Complex, Complex&)>& fn,
    const std::function<bool(Complex, Complex&)>& fd, const Window& window,
    const NewtonParams& params = {});

}  // namespace essdyn
