#include "essdyn/roots.hpp"

#include <algorithm>
#include <cmath>

namespace essdyn {

std::vector<Complex> grid_newton_roots(
    const std::function<bool(Complex, Complex&)>& fn,
    const std::function<bool(Complex, Complex&)>& fd, const Window& window,
    const NewtonParams& params) {
    std::vector<Complex> roots;
    if (!window.valid()) return roots;

    const double dx = window.width() / params.grid;
    const double dy = window.height() / params.grid;

    auto accept = [&](Complex z) {
        Complex r;
        if (!fn(z, r) || std::abs(r) > params.residual_tol) return;
        if (!window.contains(z)) return;
        for (const Complex& known : roots)
            if (std::abs(z - known) <= params.dedup_tol) return;
        roots.push_back(z);
    };

    for (int iy = 0; iy < params.grid; ++iy) {
        for (int ix = 0; ix < params.grid; ++ix) {
            Complex z(window.re_min + (ix + 0.5) * dx, window.im_min + (iy + 0.5) * dy);
            bool ok = true;
            for (int step = 0; step < params.max_steps; ++step) {
                Complex v, d;
                if (!fn(z, v) || !fd(z, d) || d == Complex(0.0)) {
                    ok = false;
                    break;
                }
                Complex dz = v / d;
                z -= dz;
                if (std::isnan(z.real()) || std::isnan(z.imag()) ||
                    std::abs(z) > params.diverge_radius) {
                    ok = false;
                    break;
                }
                if (std::abs(dz) <= params.step_tol) break;
            }
            if (ok) accept(z);
        }
    }

    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

}  // namespace essdyn
