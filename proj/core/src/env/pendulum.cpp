#include "pimbrl/env/pendulum.hpp"

#include <cmath>
#include <stdexcept>

namespace pimbrl::env {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double pendulum_derivatives(double theta, double theta_dot, double torque,
                            const PendulumParams& p) {
    (void)theta_dot;
    return -(3.0 * p.gravity / (2.0 * p.length)) * std::sin(theta + kPi) +
           3.0 / (p.mass * p.length * p.length) * torque;
}

double pendulum_reward(double theta, double theta_dot, double torque) {
    return -theta * theta - 0.1 * theta_dot * theta_dot - 0.001 * torque * torque;
}

double wrap_to_pi(double angle) {
    double wrapped = std::fmod(angle + kPi, 2.0 * kPi);
    if (wrapped < 0.0) wrapped += 2.0 * kPi;
    return wrapped - kPi;
}

PendulumEnv::PendulumEnv() {
    spec_.id = EnvId::pendulum;
    spec_.obs_dim = 2;
    spec_.action_dim = 1;
    spec_.action_space.low = Eigen::VectorXd::Constant(1, -2.0);
    spec_.action_space.high = Eigen::VectorXd::Constant(1, 2.0);
    spec_.control_steps_per_episode = 200;
    spec_.inner_steps_per_control = 1;
    spec_.inner_dt = 0.05;
    state_ = Eigen::VectorXd::Zero(2);
}

Eigen::VectorXd PendulumEnv::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    state_[0] = rng_.uniform(-1.0, 1.0);
    state_[1] = rng_.uniform(-1.0, 1.0);
    steps_ = 0;
    episode_over_ = false;
    return state_;
}

StepResult PendulumEnv::step(const Eigen::VectorXd& action) {
    if (episode_over_) throw std::logic_error("PendulumEnv::step: episode already over");
    if (action.size() != 1) throw std::invalid_argument("PendulumEnv::step: action must be 1-d");
    const double torque = std::clamp(action[0], -params_.max_torque, params_.max_torque);

    const double theta_ddot = pendulum_derivatives(state_[0], state_[1], torque, params_);
    state_[0] = wrap_to_pi(state_[0] + spec_.inner_dt * state_[1]);
    state_[1] = std::clamp(state_[1] + spec_.inner_dt * theta_ddot, -params_.max_speed,
                           params_.max_speed);
    ++steps_;

    StepResult r;
    r.observation = state_;
    r.reward = pendulum_reward(state_[0], state_[1], torque);
    r.done = false;
    r.truncated = steps_ >= spec_.control_steps_per_episode;
    episode_over_ = r.episode_over();
    return r;
}

void PendulumEnv::set_state(const Eigen::VectorXd& state) {
    if (state.size() != 2) throw std::invalid_argument("PendulumEnv::set_state: need 2 components");
    state_ = state;
    episode_over_ = false;
}

}  // namespace pimbrl::env
