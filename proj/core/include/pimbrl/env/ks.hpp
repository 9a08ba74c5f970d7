#pragma once

#include <memory>
#include <vector>

#include "pimbrl/env/env.hpp"
#include "pimbrl/numerics/grid.hpp"
#include "pimbrl/numerics/integrators.hpp"
#include "pimbrl/util/rng.hpp"

namespace pimbrl::env {

struct KsParams {
    int n_points = 64;
    double length = 8.0 * 3.14159265358979323846;
    double action_bound = 0.5;
    int n_actuators = 4;
};

/// Four unit-variance Gaussian actuators at x in {0, l/4, l/2, 3l/4},
/// amplitudes a / sqrt(2 pi); tails wrapped over +-1 period since x = 0 sits
/// on the periodic seam.
Eigen::VectorXd ks_forcing(const numerics::Grid1D& grid, const Eigen::Vector4d& a);

/// du/dt = -central6(u_xx) - central6(u_xxxx) - 1/2 upwind(u u_x) + forcing.
Eigen::VectorXd ks_rhs(const Eigen::VectorXd& u, const numerics::Grid1D& grid,
                       const Eigen::Vector4d& a);

/// Control-step reward -(1/(T l)) integral of (u_xx^2 + u_x^2 + u f) over
/// the step: trapezoidal in time over the given equally spaced snapshots,
/// node-sum times spacing in space. `duration` is the control-step length T.
double ks_reward(const std::vector<Eigen::VectorXd>& u_snapshots,
                 const std::vector<Eigen::VectorXd>& f_snapshots,
                 const numerics::Grid1D& grid, double duration);

/// Spatial integrand average (u_xx^2 + u_x^2 + u f) / l for one snapshot.
double ks_reward_integrand(const Eigen::VectorXd& u, const Eigen::VectorXd& f,
                           const numerics::Grid1D& grid);

/// Immutable bank of unforced-attractor snapshots shared between environment
/// instances. Generated once per (seed, size, burn_in) key: integrate the
/// unforced equation from a small random perturbation for `burn_in` time
/// units, then harvest a snapshot every `harvest_gap` time units.
class KsAttractorBank {
public:
    static std::shared_ptr<const KsAttractorBank> shared(std::uint64_t seed, int size);

    KsAttractorBank(std::uint64_t seed, int size, double burn_in = 500.0,
                    double harvest_gap = 5.0, double dt = 0.001);

    const Eigen::VectorXd& snapshot(std::size_t i) const { return snapshots_.at(i); }
    std::size_t size() const { return snapshots_.size(); }

private:
    std::vector<Eigen::VectorXd> snapshots_;
};

/// Chaos suppression in the Kuramoto-Sivashinsky equation: 400 control steps
/// per episode, each covering 250 RK4 steps of dt 0.001. Observation is the
/// full state.
class KsEnv final : public Environment {
public:
    explicit KsEnv(const EnvOptions& options = {});

    const EnvSpec& spec() const override { return spec_; }
    Eigen::VectorXd reset(std::uint64_t seed) override;
    StepResult step(const Eigen::VectorXd& action) override;
    const Eigen::VectorXd& state() const override { return state_; }
    void set_state(const Eigen::VectorXd& state) override;
    int elapsed_control_steps() const override { return steps_; }

    const numerics::Grid1D& grid() const { return grid_; }

private:
    EnvSpec spec_;
    KsParams params_;
    numerics::Grid1D grid_;
    std::shared_ptr<const KsAttractorBank> bank_;
    Eigen::VectorXd state_;
    int steps_ = 0;
    bool episode_over_ = true;
    Rng rng_{0};
    std::vector<double> forcing_, conv_, d2_, d4_;
    numerics::Rk4Workspace rk4_;
};

}  // namespace pimbrl::env
