#pragma once

#include "pimbrl/env/env.hpp"
#include "pimbrl/numerics/grid.hpp"
#include "pimbrl/numerics/integrators.hpp"
#include "pimbrl/util/rng.hpp"

namespace pimbrl::env {

struct BurgersParams {
    int n_points = 150;
    double length = 2.0 * 3.14159265358979323846;
    double viscosity = 0.01;
    double action_low = -0.025;
    double action_high = 0.075;
};

/// Two Gaussian actuator bumps at x/l = 0.25 and 0.75 with amplitudes a.
Eigen::VectorXd burgers_forcing(const numerics::Grid1D& grid, const Eigen::Vector2d& a);

/// Spatially uniform reference level 0.05 sin(t) + 0.5; `t` is the episode
/// phase in [0, 2*pi] (one reference period spans one episode).
double burgers_reference(double t);

/// du/dt = -1/2 upwind(u u_x) + nu central4(u_xx) + forcing.
Eigen::VectorXd burgers_rhs(const Eigen::VectorXd& u, const numerics::Grid1D& grid,
                            const Eigen::Vector2d& a, double viscosity = 0.01);

/// -10 times the RMS of the observation over grid nodes.
double burgers_reward(const Eigen::VectorXd& observation);

/// Reference-tracking control of the viscous Burgers' equation. Observation
/// is the discrepancy u - u_re at the control step; 60 control steps per
/// episode, each covering 500 forward-Euler steps of dt 0.01.
class BurgersEnv final : public Environment {
public:
    BurgersEnv();

    const EnvSpec& spec() const override { return spec_; }
    Eigen::VectorXd reset(std::uint64_t seed) override;
    StepResult step(const Eigen::VectorXd& action) override;
    const Eigen::VectorXd& state() const override { return state_; }
    void set_state(const Eigen::VectorXd& state) override;
    Eigen::VectorXd aux() const override;
    int elapsed_control_steps() const override { return steps_; }

    const numerics::Grid1D& grid() const { return grid_; }
    /// Phase advance per control step (one reference period per episode).
    double phase_per_control_step() const;
    /// Initial condition for a given mixing coefficient c in [0, 1).
    Eigen::VectorXd initial_condition(double c) const;

private:
    EnvSpec spec_;
    BurgersParams params_;
    numerics::Grid1D grid_;
    Eigen::VectorXd state_;
    int steps_ = 0;
    bool episode_over_ = true;
    Rng rng_{0};
    // hot-loop buffers
    std::vector<double> forcing_, scratch_;
    numerics::EulerWorkspace euler_;
};

}  // namespace pimbrl::env
