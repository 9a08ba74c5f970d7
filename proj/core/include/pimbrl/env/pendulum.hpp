#pragma once

#include "pimbrl/env/env.hpp"
#include "pimbrl/util/rng.hpp"

namespace pimbrl::env {

struct PendulumParams {
    double gravity = 10.0;
    double length = 1.0;
    double mass = 1.0;
    double max_speed = 8.0;
    double max_torque = 2.0;
};

/// Angular acceleration under the applied torque.
double pendulum_derivatives(double theta, double theta_dot, double torque,
                            const PendulumParams& p = {});

/// r = -theta^2 - 0.1 theta_dot^2 - 0.001 torque^2, with theta in [-pi, pi].
double pendulum_reward(double theta, double theta_dot, double torque);

double wrap_to_pi(double angle);

/// Swing-up task. State (theta, theta_dot); theta kept wrapped to [-pi, pi],
/// theta_dot capped to [-8, 8] after every inner step. Fixed 200-step
/// horizon, no failure termination.
class PendulumEnv final : public Environment {
public:
    PendulumEnv();

    const EnvSpec& spec() const override { return spec_; }
    Eigen::VectorXd reset(std::uint64_t seed) override;
    StepResult step(const Eigen::VectorXd& action) override;
    const Eigen::VectorXd& state() const override { return state_; }
    void set_state(const Eigen::VectorXd& state) override;
    int elapsed_control_steps() const override { return steps_; }

private:
    EnvSpec spec_;
    PendulumParams params_;
    Eigen::VectorXd state_;
    int steps_ = 0;
    bool episode_over_ = true;
    Rng rng_{0};
};

}  // namespace pimbrl::env
