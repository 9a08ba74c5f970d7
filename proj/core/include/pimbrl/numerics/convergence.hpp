#pragma once

#include <functional>
#include <span>

#include "pimbrl/numerics/stencils.hpp"

namespace pimbrl::numerics {

/// Least-squares slope of log(error) vs log(resolution measure). Used to
/// measure empirical convergence orders from >= 3 refinements. Throws
/// std::runtime_error ("degenerate fit") when any error sits at the
/// floating-point floor, where the slope is meaningless.
double fit_log_slope(std::span<const double> resolution, std::span<const double> error);

/// Convergence order of `error_at(n)` as the grid is refined over the given
/// resolutions. Errors are expected to scale like spacing^p; the returned
/// value is p.
double estimate_order(const std::function<double(int)>& error_at_resolution,
                      std::span<const int> resolutions);

/// Order of a spatial stencil measured against a manufactured solution
/// u(x) = sin(k x) on a periodic domain of the given length.
double estimate_stencil_order(StencilKind kind, double wavenumber, double length,
                              std::span<const int> resolutions);

/// Order of the RK4 integrator measured on du/dt = -u over a unit interval.
double estimate_rk4_order(std::span<const int> step_counts);

}  // namespace pimbrl::numerics
