#pragma once

#include <span>
#include <vector>

#include "pimbrl/numerics/grid.hpp"

namespace pimbrl::numerics {

/// Periodic finite-difference operators.
///
/// Linear kinds and their truncation orders:
///   Central4D2 -- d2/dx2, 4th order, radius 2
///   Central6D2 -- d2/dx2, 6th order, radius 3
///   Central6D4 -- d4/dx4, 6th order, radius 4
///   Central6D1 -- d/dx,   6th order, radius 3
/// Upwind2Convection is nonlinear: it returns the advective convection term
/// u * du/dx, where du/dx is the one-sided 2nd-order difference biased
/// against the local flow direction (sign of u at the node). At u_i == 0 the
/// two one-sided differences are averaged; the product is zero there either
/// way, but the rule also fixes the derivative used by gradient code.
enum class StencilKind {
    Upwind2Convection,
    Central4D2,
    Central6D2,
    Central6D4,
    Central6D1,
};

/// Fixed coefficient table of a linear stencil: coefficients over offsets
/// [-radius, radius], to be scaled by spacing^-deriv_power.
struct StencilTable {
    int radius;
    int deriv_power;
    double coeffs[9];
};

/// Table lookup for the linear kinds; throws for Upwind2Convection.
const StencilTable& stencil_table(StencilKind kind);

bool stencil_is_linear(StencilKind kind);

/// Nominal convergence order of the scheme (2, 4 or 6).
int stencil_order(StencilKind kind);

/// Applies the operator with periodic wraparound. `field` and `out` must
/// both have grid-many entries and must not alias.
void apply_stencil(std::span<const double> field, std::span<double> out,
                   StencilKind kind, double spacing);

/// Convenience allocating overload.
std::vector<double> apply_stencil(std::span<const double> field, const Grid1D& grid,
                                  StencilKind kind);

/// One-sided 2nd-order first derivative, upwinded by sign(u_i) with the
/// centered-average tie rule at u_i == 0. This is the du/dx factor inside
/// Upwind2Convection, exposed for gradient code and tests.
void upwind_one_sided_derivative(std::span<const double> u, std::span<double> out,
                                 double spacing);

}  // namespace pimbrl::numerics
