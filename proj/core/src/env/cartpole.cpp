#include "pimbrl/env/cartpole.hpp"

#include <cmath>
#include <stdexcept>

namespace pimbrl::env {

std::pair<double, double> cartpole_derivatives(const Eigen::Vector4d& state, double force,
                                               const CartPoleParams& p) {
    const double theta = state[2];
    const double theta_dot = state[3];
    const double total_mass = p.cart_mass + p.pole_mass;
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);

    const double temp =
        (force + p.pole_mass * p.pole_half_length * theta_dot * theta_dot * sin_t) /
        total_mass;
    const double theta_ddot =
        (p.gravity * sin_t - cos_t * temp) /
        (p.pole_half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
    const double x_ddot =
        temp - p.pole_mass * p.pole_half_length * theta_ddot / total_mass;
    return {x_ddot, theta_ddot};
}

bool CartPoleEnv::failed(const Eigen::Vector4d& state, const CartPoleParams& p) {
    return std::abs(state[2]) > p.theta_limit || std::abs(state[0]) > p.x_limit;
}

CartPoleEnv::CartPoleEnv() {
    spec_.id = EnvId::cartpole;
    spec_.obs_dim = 4;
    spec_.action_dim = 1;
    spec_.action_space.low = Eigen::VectorXd::Constant(1, -10.0);
    spec_.action_space.high = Eigen::VectorXd::Constant(1, 10.0);
    spec_.action_space.sign_discrete = true;
    spec_.control_steps_per_episode = 200;
    spec_.inner_steps_per_control = 1;
    spec_.inner_dt = 0.02;
    state_ = Eigen::VectorXd::Zero(4);
}

Eigen::VectorXd CartPoleEnv::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    for (int i = 0; i < 4; ++i) state_[i] = rng_.uniform(-0.05, 0.05);
    steps_ = 0;
    episode_over_ = false;
    return state_;
}

StepResult CartPoleEnv::step(const Eigen::VectorXd& action) {
    if (episode_over_) throw std::logic_error("CartPoleEnv::step: episode already over");
    if (action.size() != 1) throw std::invalid_argument("CartPoleEnv::step: action must be 1-d");
    const double force = action[0] >= 0.0 ? 10.0 : -10.0;

    const auto [x_ddot, theta_ddot] = cartpole_derivatives(state_, force, params_);
    state_[0] += spec_.inner_dt * state_[1];
    state_[1] += spec_.inner_dt * x_ddot;
    state_[2] += spec_.inner_dt * state_[3];
    state_[3] += spec_.inner_dt * theta_ddot;
    ++steps_;

    StepResult r;
    r.observation = state_;
    r.reward = 1.0;
    r.done = failed(state_, params_);
    r.truncated = !r.done && steps_ >= spec_.control_steps_per_episode;
    episode_over_ = r.episode_over();
    return r;
}

void CartPoleEnv::set_state(const Eigen::VectorXd& state) {
    if (state.size() != 4) throw std::invalid_argument("CartPoleEnv::set_state: need 4 components");
    state_ = state;
    episode_over_ = false;
}

}  // namespace pimbrl::env
