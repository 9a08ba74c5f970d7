#pragma once

#include "pimbrl/env/env.hpp"
#include "pimbrl/util/rng.hpp"

namespace pimbrl::env {

struct CartPoleParams {
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double pole_half_length = 0.5;
    double gravity = 9.8;
    double theta_limit = 3.14159265358979323846 / 12.0;
    double x_limit = 2.4;
};

/// Accelerations (x_ddot, theta_ddot) of the cart-pole under the applied
/// force. theta_ddot is solved first from its closed form, then fed into the
/// cart acceleration.
std::pair<double, double> cartpole_derivatives(const Eigen::Vector4d& state, double force,
                                               const CartPoleParams& p = {});

/// Pole balancing with a two-valued horizontal force. State (x, x_dot,
/// theta, theta_dot), reward +1 per step taken, failure when the pole or
/// cart leaves its admissible band, 200-step cap (truncation, not failure).
class CartPoleEnv final : public Environment {
public:
    CartPoleEnv();

    const EnvSpec& spec() const override { return spec_; }
    Eigen::VectorXd reset(std::uint64_t seed) override;
    StepResult step(const Eigen::VectorXd& action) override;
    const Eigen::VectorXd& state() const override { return state_; }
    void set_state(const Eigen::VectorXd& state) override;
    int elapsed_control_steps() const override { return steps_; }

    static bool failed(const Eigen::Vector4d& state, const CartPoleParams& p = {});

private:
    EnvSpec spec_;
    CartPoleParams params_;
    Eigen::VectorXd state_;
    int steps_ = 0;
    bool episode_over_ = true;
    Rng rng_{0};
};

}  // namespace pimbrl::env
