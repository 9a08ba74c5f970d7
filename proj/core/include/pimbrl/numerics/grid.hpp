#pragma once

#include <stdexcept>

namespace pimbrl::numerics {

/// Uniform periodic 1-D grid. Node i sits at x = i * spacing; node n_points
/// wraps back to node 0.
struct Grid1D {
    int n_points = 0;
    double length = 0.0;
    double spacing = 0.0;

    Grid1D() = default;

    Grid1D(int n, double domain_length)
        : n_points(n), length(domain_length), spacing(domain_length / n) {
        if (n <= 0) throw std::invalid_argument("Grid1D: n_points must be positive");
        if (!(spacing > 0.0)) throw std::invalid_argument("Grid1D: spacing must be positive");
    }

    double node(int i) const { return i * spacing; }
};

}  // namespace pimbrl::numerics
