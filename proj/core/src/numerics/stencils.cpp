#include "pimbrl/numerics/stencils.hpp"

#include <cmath>
#include <stdexcept>

namespace pimbrl::numerics {

namespace {

// Coefficient tables from standard central-difference references, indexed by
// offset -radius..radius. Scale by spacing^-deriv_power.
const StencilTable kCentral4D2 = {
    2, 2, {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0, 0, 0, 0, 0}};

const StencilTable kCentral6D2 = {
    3, 2,
    {1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0,
     1.0 / 90.0, 0, 0}};

const StencilTable kCentral6D4 = {
    4, 4,
    {7.0 / 240.0, -2.0 / 5.0, 169.0 / 60.0, -122.0 / 15.0, 91.0 / 8.0,
     -122.0 / 15.0, 169.0 / 60.0, -2.0 / 5.0, 7.0 / 240.0}};

const StencilTable kCentral6D1 = {
    3, 1,
    {-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0,
     1.0 / 60.0, 0, 0}};

inline int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

}  // namespace

const StencilTable& stencil_table(StencilKind kind) {
    switch (kind) {
        case StencilKind::Central4D2: return kCentral4D2;
        case StencilKind::Central6D2: return kCentral6D2;
        case StencilKind::Central6D4: return kCentral6D4;
        case StencilKind::Central6D1: return kCentral6D1;
        case StencilKind::Upwind2Convection:
            throw std::invalid_argument("Upwind2Convection has no fixed coefficient table");
    }
    throw std::invalid_argument("unknown stencil kind");
}

bool stencil_is_linear(StencilKind kind) {
    return kind != StencilKind::Upwind2Convection;
}

int stencil_order(StencilKind kind) {
    switch (kind) {
        case StencilKind::Upwind2Convection: return 2;
        case StencilKind::Central4D2: return 4;
        case StencilKind::Central6D2: return 6;
        case StencilKind::Central6D4: return 6;
        case StencilKind::Central6D1: return 6;
    }
    throw std::invalid_argument("unknown stencil kind");
}

void upwind_one_sided_derivative(std::span<const double> u, std::span<double> out,
                                 double spacing) {
    const int n = static_cast<int>(u.size());
    if (static_cast<int>(out.size()) != n) {
        throw std::invalid_argument("upwind_one_sided_derivative: output size mismatch");
    }
    const double inv2h = 1.0 / (2.0 * spacing);
    for (int i = 0; i < n; ++i) {
        // backward-biased for u_i > 0, forward-biased for u_i < 0
        const double backward =
            (3.0 * u[i] - 4.0 * u[wrap(i - 1, n)] + u[wrap(i - 2, n)]) * inv2h;
        const double forward =
            (-3.0 * u[i] + 4.0 * u[wrap(i + 1, n)] - u[wrap(i + 2, n)]) * inv2h;
        if (u[i] > 0.0) {
            out[i] = backward;
        } else if (u[i] < 0.0) {
            out[i] = forward;
        } else {
            out[i] = 0.5 * (backward + forward);
        }
    }
}

void apply_stencil(std::span<const double> field, std::span<double> out,
                   StencilKind kind, double spacing) {
    const int n = static_cast<int>(field.size());
    if (static_cast<int>(out.size()) != n) {
        throw std::invalid_argument("apply_stencil: output size mismatch");
    }
    if (n == 0) throw std::invalid_argument("apply_stencil: empty field");

    if (kind == StencilKind::Upwind2Convection) {
        upwind_one_sided_derivative(field, out, spacing);
        for (int i = 0; i < n; ++i) out[i] *= field[i];
        return;
    }

    const StencilTable& t = stencil_table(kind);
    const double scale = 1.0 / std::pow(spacing, t.deriv_power);
    const int r = t.radius;
    if (n < 2 * r + 1) {
        throw std::invalid_argument("apply_stencil: field shorter than stencil support");
    }
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        // interior fast path: no wrapping needed
        if (i >= r && i < n - r) {
            for (int j = -r; j <= r; ++j) acc += t.coeffs[j + r] * field[i + j];
        } else {
            for (int j = -r; j <= r; ++j) acc += t.coeffs[j + r] * field[wrap(i + j, n)];
        }
        out[i] = acc * scale;
    }
}

std::vector<double> apply_stencil(std::span<const double> field, const Grid1D& grid,
                                  StencilKind kind) {
    if (static_cast<int>(field.size()) != grid.n_points) {
        throw std::invalid_argument("apply_stencil: field length does not match grid");
    }
    std::vector<double> out(field.size());
    apply_stencil(field, out, kind, grid.spacing);
    return out;
}

}  // namespace pimbrl::numerics
