#include "pimbrl/numerics/convergence.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pimbrl/numerics/grid.hpp"
#include "pimbrl/numerics/integrators.hpp"

namespace pimbrl::numerics {

double fit_log_slope(std::span<const double> resolution, std::span<const double> error) {
    if (resolution.size() != error.size() || resolution.size() < 3) {
        throw std::invalid_argument("fit_log_slope: need >= 3 matching samples");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(resolution.size());
    for (std::size_t i = 0; i < resolution.size(); ++i) {
        if (!(error[i] > 1e-14)) {
            throw std::runtime_error("fit_log_slope: degenerate fit, error at floating-point floor");
        }
        const double x = std::log(resolution[i]);
        const double y = std::log(error[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) {
        throw std::runtime_error("fit_log_slope: degenerate fit, identical resolutions");
    }
    return (n * sxy - sx * sy) / denom;
}

double estimate_order(const std::function<double(int)>& error_at_resolution,
                      std::span<const int> resolutions) {
    if (resolutions.size() < 3) {
        throw std::invalid_argument("estimate_order: need >= 3 refinements");
    }
    std::vector<double> h(resolutions.size()), err(resolutions.size());
    for (std::size_t i = 0; i < resolutions.size(); ++i) {
        h[i] = 1.0 / static_cast<double>(resolutions[i]);
        err[i] = error_at_resolution(resolutions[i]);
    }
    return fit_log_slope(h, err);
}

double estimate_stencil_order(StencilKind kind, double wavenumber, double length,
                              std::span<const int> resolutions) {
    const double k = wavenumber;
    auto error_at = [&](int n) {
        Grid1D grid(n, length);
        std::vector<double> u(n), exact(n);
        for (int i = 0; i < n; ++i) {
            const double x = grid.node(i);
            u[i] = std::sin(k * x);
            switch (kind) {
                case StencilKind::Central6D1: exact[i] = k * std::cos(k * x); break;
                case StencilKind::Central4D2:
                case StencilKind::Central6D2: exact[i] = -k * k * std::sin(k * x); break;
                case StencilKind::Central6D4:
                    exact[i] = k * k * k * k * std::sin(k * x);
                    break;
                case StencilKind::Upwind2Convection:
                    exact[i] = std::sin(k * x) * k * std::cos(k * x);
                    break;
            }
        }
        std::vector<double> got = apply_stencil(u, grid, kind);
        double max_err = 0.0;
        for (int i = 0; i < n; ++i) max_err = std::max(max_err, std::abs(got[i] - exact[i]));
        return max_err;
    };
    return estimate_order(error_at, resolutions);
}

double estimate_rk4_order(std::span<const int> step_counts) {
    RhsFn decay = [](std::span<const double> u, std::span<double> out) { out[0] = -u[0]; };
    auto error_at = [&](int steps) {
        std::vector<double> u{1.0};
        const double dt = 1.0 / steps;
        Rk4Workspace ws(1);
        for (int s = 0; s < steps; ++s) ws.step(decay, u, dt, s);
        return std::abs(u[0] - std::exp(-1.0));
    };
    return estimate_order(error_at, step_counts);
}

}  // namespace pimbrl::numerics
