#pragma once

#include <functional>
#include <span>
#include <vector>

namespace pimbrl::numerics {

/// Right-hand side of du/dt = rhs(u): reads the state span, writes the
/// derivative span of the same length.
using RhsFn = std::function<void(std::span<const double>, std::span<double>)>;

/// Forward Euler: u + dt * rhs(u). Throws NumericBlowupError carrying
/// `step_index` if the result is non-finite.
std::vector<double> euler_step(const RhsFn& rhs, std::span<const double> u, double dt,
                               long step_index = 0);

/// Classical four-stage Runge-Kutta update.
std::vector<double> rk4_step(const RhsFn& rhs, std::span<const double> u, double dt,
                             long step_index = 0);

/// Allocation-free RK4 stepping for hot loops; the workspace owns the stage
/// buffers and advances `u` in place.
class Rk4Workspace {
public:
    explicit Rk4Workspace(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

    void step(const RhsFn& rhs, std::span<double> u, double dt, long step_index = 0);

private:
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Allocation-free forward Euler stepping.
class EulerWorkspace {
public:
    explicit EulerWorkspace(std::size_t n) : k_(n) {}

    void step(const RhsFn& rhs, std::span<double> u, double dt, long step_index = 0);

private:
    std::vector<double> k_;
};

bool all_finite(std::span<const double> v);

}  // namespace pimbrl::numerics
