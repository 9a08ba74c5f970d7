#include "pimbrl/env/burgers.hpp"

#include <cmath>
#include <stdexcept>

#include "pimbrl/numerics/stencils.hpp"
#include "pimbrl/util/errors.hpp"

namespace pimbrl::env {

namespace {

constexpr double kPi = 3.14159265358979323846;

void burgers_rhs_into(std::span<const double> u, std::span<const double> forcing,
                      std::span<double> out, std::span<double> scratch,
                      double spacing, double viscosity) {
    using numerics::StencilKind;
    // out <- convection term u u_x, scratch <- u_xx
    numerics::apply_stencil(u, out, StencilKind::Upwind2Convection, spacing);
    numerics::apply_stencil(u, scratch, StencilKind::Central4D2, spacing);
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = -0.5 * out[i] + viscosity * scratch[i] + forcing[i];
    }
}

}  // namespace

Eigen::VectorXd burgers_forcing(const numerics::Grid1D& grid, const Eigen::Vector2d& a) {
    Eigen::VectorXd f(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) {
        const double s = grid.node(i) / grid.length;
        const double b1 = 15.0 * (s - 0.25);
        const double b2 = 15.0 * (s - 0.75);
        f[i] = a[0] * std::exp(-b1 * b1) + a[1] * std::exp(-b2 * b2);
    }
    return f;
}

double burgers_reference(double t) { return 0.05 * std::sin(t) + 0.5; }

Eigen::VectorXd burgers_rhs(const Eigen::VectorXd& u, const numerics::Grid1D& grid,
                            const Eigen::Vector2d& a, double viscosity) {
    if (u.size() != grid.n_points) {
        throw std::invalid_argument("burgers_rhs: field length does not match grid");
    }
    Eigen::VectorXd forcing = burgers_forcing(grid, a);
    Eigen::VectorXd out(u.size());
    std::vector<double> scratch(u.size());
    burgers_rhs_into({u.data(), static_cast<std::size_t>(u.size())},
                     {forcing.data(), static_cast<std::size_t>(forcing.size())},
                     {out.data(), static_cast<std::size_t>(out.size())}, scratch,
                     grid.spacing, viscosity);
    if (!numerics::all_finite({out.data(), static_cast<std::size_t>(out.size())})) {
        throw NumericBlowupError("burgers_rhs: non-finite output", 0);
    }
    return out;
}

double burgers_reward(const Eigen::VectorXd& observation) {
    if (observation.size() == 0) return 0.0;
    const double rms = std::sqrt(observation.squaredNorm() / observation.size());
    return -10.0 * rms;
}

BurgersEnv::BurgersEnv()
    : grid_(params_.n_points, params_.length), euler_(params_.n_points) {
    spec_.id = EnvId::burgers;
    spec_.obs_dim = params_.n_points;
    spec_.action_dim = 2;
    spec_.action_space.low = Eigen::VectorXd::Constant(2, params_.action_low);
    spec_.action_space.high = Eigen::VectorXd::Constant(2, params_.action_high);
    spec_.control_steps_per_episode = 60;
    spec_.inner_steps_per_control = 500;
    spec_.inner_dt = 0.01;
    spec_.aux_dim = 1;
    state_ = Eigen::VectorXd::Zero(params_.n_points);
    forcing_.resize(params_.n_points);
    scratch_.resize(params_.n_points);
}

double BurgersEnv::phase_per_control_step() const {
    return 2.0 * kPi / spec_.control_steps_per_episode;
}

Eigen::VectorXd BurgersEnv::initial_condition(double c) const {
    Eigen::VectorXd u(grid_.n_points);
    for (int i = 0; i < grid_.n_points; ++i) {
        const double s = grid_.node(i) / grid_.length;
        const double bump = 5.0 * (s - 0.5);
        u[i] = 0.2 * c * std::exp(-bump * bump) +
               0.2 * (1.0 - c) * (0.5 * std::sin(4.0 * kPi * s) + 0.5);
    }
    return u;
}

Eigen::VectorXd BurgersEnv::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    state_ = initial_condition(rng_.uniform());
    steps_ = 0;
    episode_over_ = false;
    return state_.array() - burgers_reference(0.0);
}

Eigen::VectorXd BurgersEnv::aux() const {
    Eigen::VectorXd a(1);
    a[0] = steps_ * phase_per_control_step();
    return a;
}

StepResult BurgersEnv::step(const Eigen::VectorXd& action) {
    if (episode_over_) throw std::logic_error("BurgersEnv::step: episode already over");
    if (action.size() != 2) throw std::invalid_argument("BurgersEnv::step: action must be 2-d");
    Eigen::Vector2d a = spec_.action_space.clamp(action);

    const Eigen::VectorXd f = burgers_forcing(grid_, a);
    std::copy(f.data(), f.data() + f.size(), forcing_.begin());

    const double spacing = grid_.spacing;
    const double nu = params_.viscosity;
    numerics::RhsFn rhs = [&](std::span<const double> u, std::span<double> out) {
        burgers_rhs_into(u, forcing_, out, scratch_, spacing, nu);
    };

    std::span<double> u_span{state_.data(), static_cast<std::size_t>(state_.size())};
    const long base_step = static_cast<long>(steps_) * spec_.inner_steps_per_control;
    for (int s = 0; s < spec_.inner_steps_per_control; ++s) {
        euler_.step(rhs, u_span, spec_.inner_dt, base_step + s);
    }
    ++steps_;

    StepResult r;
    const double ref = burgers_reference(steps_ * phase_per_control_step());
    r.observation = state_.array() - ref;
    r.reward = burgers_reward(r.observation);
    r.done = false;
    r.truncated = steps_ >= spec_.control_steps_per_episode;
    r.info["reference"] = ref;
    episode_over_ = r.episode_over();
    return r;
}

void BurgersEnv::set_state(const Eigen::VectorXd& state) {
    if (state.size() != grid_.n_points) {
        throw std::invalid_argument("BurgersEnv::set_state: field length mismatch");
    }
    state_ = state;
    episode_over_ = false;
}

}  // namespace pimbrl::env
