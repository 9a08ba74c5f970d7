#include "pimbrl/numerics/integrators.hpp"

#include <cmath>
#include <stdexcept>

#include "pimbrl/util/errors.hpp"

namespace pimbrl::numerics {

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

namespace {

void check_finite(std::span<const double> v, const char* what, long step_index) {
    if (!all_finite(v)) throw NumericBlowupError(what, step_index);
}

}  // namespace

std::vector<double> euler_step(const RhsFn& rhs, std::span<const double> u, double dt,
                               long step_index) {
    if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be positive");
    std::vector<double> out(u.begin(), u.end());
    EulerWorkspace ws(u.size());
    ws.step(rhs, out, dt, step_index);
    return out;
}

void EulerWorkspace::step(const RhsFn& rhs, std::span<double> u, double dt,
                          long step_index) {
    if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be positive");
    if (u.size() != k_.size()) throw std::invalid_argument("euler_step: size mismatch");
    rhs(u, k_);
    check_finite(k_, "euler_step: non-finite derivative", step_index);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += dt * k_[i];
    check_finite(u, "euler_step: non-finite state", step_index);
}

std::vector<double> rk4_step(const RhsFn& rhs, std::span<const double> u, double dt,
                             long step_index) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
    std::vector<double> out(u.begin(), u.end());
    Rk4Workspace ws(u.size());
    ws.step(rhs, out, dt, step_index);
    return out;
}

void Rk4Workspace::step(const RhsFn& rhs, std::span<double> u, double dt,
                        long step_index) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
    const std::size_t n = u.size();
    if (n != k1_.size()) throw std::invalid_argument("rk4_step: size mismatch");

    rhs(u, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = u[i] + 0.5 * dt * k1_[i];
    rhs(tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = u[i] + 0.5 * dt * k2_[i];
    rhs(tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = u[i] + dt * k3_[i];
    rhs(tmp_, k4_);
    check_finite(k4_, "rk4_step: non-finite derivative", step_index);

    const double sixth = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        u[i] += sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
    check_finite(u, "rk4_step: non-finite state", step_index);
}

}  // namespace pimbrl::numerics
