#include "pimbrl/model/physics.hpp"

#include <cmath>
#include <stdexcept>

#include "pimbrl/env/burgers.hpp"
#include "pimbrl/env/cartpole.hpp"
#include "pimbrl/env/ks.hpp"
#include "pimbrl/env/pendulum.hpp"
#include "pimbrl/model/transition_model.hpp"

namespace pimbrl::model {

using nn::Matrix;
using nn::NormKind;
using nn::Tape;
using nn::Var;

namespace {

// ---------------------------------------------------------------------------
// Cart-pole
// ---------------------------------------------------------------------------

class CartPolePhysics final : public DifferentiablePhysics {
public:
    env::EnvId id() const override { return env::EnvId::cartpole; }
    NormKind norm_kind() const override { return NormKind::Euclidean; }
    double control_duration() const override { return 0.02; }

    Var rhs(Tape& t, Var state, const Matrix& actions) const override {
        const env::CartPoleParams p;
        const double total_mass = p.cart_mass + p.pole_mass;
        Var x_dot = t.slice_rows(state, 1, 1);
        Var theta = t.slice_rows(state, 2, 1);
        Var theta_dot = t.slice_rows(state, 3, 1);
        Var sin_t = t.sin(theta);
        Var cos_t = t.cos(theta);
        Var force = t.input(actions);

        // temp = (f + m_p l theta_dot^2 sin) / (m_c + m_p)
        Var temp = t.scale(
            t.add(force, t.scale(t.hadamard(t.square(theta_dot), sin_t),
                                 p.pole_mass * p.pole_half_length)),
            1.0 / total_mass);
        // theta_ddot = (g sin - cos temp) / (l (4/3 - m_p cos^2 / M))
        Var denom = t.scale(
            t.add_scalar(t.scale(t.square(cos_t), -p.pole_mass / total_mass), 4.0 / 3.0),
            p.pole_half_length);
        Var theta_ddot =
            t.hadamard(t.sub(t.scale(sin_t, p.gravity), t.hadamard(cos_t, temp)),
                       t.reciprocal(denom));
        Var x_ddot = t.sub(temp, t.scale(theta_ddot,
                                         p.pole_mass * p.pole_half_length / total_mass));
        std::array<Var, 4> rows = {x_dot, x_ddot, theta_dot, theta_ddot};
        return t.concat_rows(rows);
    }
};

class CartPoleSynthetic final : public SyntheticDynamics {
public:
    Step evaluate(const Eigen::VectorXd&, const Eigen::VectorXd&,
                  const ModelPrediction& prediction, const Eigen::VectorXd&) const override {
        Step s;
        s.reward = 1.0;
        s.done = env::CartPoleEnv::failed(prediction.next_state()) ? 1.0 : 0.0;
        return s;
    }
};

// ---------------------------------------------------------------------------
// Pendulum
// ---------------------------------------------------------------------------

class PendulumPhysics final : public DifferentiablePhysics {
public:
    env::EnvId id() const override { return env::EnvId::pendulum; }
    NormKind norm_kind() const override { return NormKind::Euclidean; }
    double control_duration() const override { return 0.05; }

    Var rhs(Tape& t, Var state, const Matrix& actions) const override {
        const env::PendulumParams p;
        Var theta = t.slice_rows(state, 0, 1);
        Var theta_dot = t.slice_rows(state, 1, 1);
        // -(3g/2l) sin(theta + pi) = +(3g/2l) sin(theta)
        Var accel = t.add(t.scale(t.sin(theta), 1.5 * p.gravity / p.length),
                          t.input(3.0 / (p.mass * p.length * p.length) * actions));
        std::array<Var, 2> rows = {theta_dot, accel};
        return t.concat_rows(rows);
    }

    /// The angle coordinate lives on the circle; difference it modulo 2 pi
    /// so that residuals of wrapped trajectories stay small.
    Var state_difference(Tape& t, Var next, Var prev) const override {
        Var d = t.sub(next, prev);
        Var d_theta = t.wrap_angle(t.slice_rows(d, 0, 1));
        Var d_vel = t.slice_rows(d, 1, 1);
        std::array<Var, 2> rows = {d_theta, d_vel};
        return t.concat_rows(rows);
    }
};

class PendulumSynthetic final : public SyntheticDynamics {
public:
    Step evaluate(const Eigen::VectorXd&, const Eigen::VectorXd& action,
                  const ModelPrediction& prediction, const Eigen::VectorXd&) const override {
        const Eigen::VectorXd& next = prediction.next_state();
        Step s;
        s.reward = env::pendulum_reward(env::wrap_to_pi(next[0]), next[1], action[0]);
        return s;
    }
};

// ---------------------------------------------------------------------------
// Burgers'
// ---------------------------------------------------------------------------

class BurgersPhysics final : public DifferentiablePhysics {
public:
    BurgersPhysics()
        : grid_(env::BurgersParams{}.n_points, env::BurgersParams{}.length),
          phase_step_(2.0 * 3.14159265358979323846 / 60.0) {}

    env::EnvId id() const override { return env::EnvId::burgers; }
    NormKind norm_kind() const override { return NormKind::GridRms; }
    double control_duration() const override { return 5.0; }

    /// Physics acts on the full state u = u_obs + u_re(t); the reference
    /// level is interpolated in phase across the control step.
    Var to_physical(Tape& t, Var obs, const Matrix& aux, int step_index,
                    int n_steps) const override {
        const int n = grid_.n_points;
        Matrix ref(n, aux.cols());
        for (int j = 0; j < aux.cols(); ++j) {
            const double phase =
                aux(0, j) + phase_step_ * static_cast<double>(step_index) / n_steps;
            ref.col(j).setConstant(env::burgers_reference(phase));
        }
        return t.add(obs, t.input(std::move(ref)));
    }

    Var rhs(Tape& t, Var physical, const Matrix& actions) const override {
        const env::BurgersParams p;
        Matrix forcing(grid_.n_points, actions.cols());
        for (int j = 0; j < actions.cols(); ++j) {
            forcing.col(j) = env::burgers_forcing(grid_, actions.col(j));
        }
        Var conv = t.upwind_convection(physical, grid_.spacing);
        Var diff = t.stencil(physical, numerics::StencilKind::Central4D2, grid_.spacing);
        return t.add(t.add(t.scale(conv, -0.5), t.scale(diff, p.viscosity)),
                     t.input(std::move(forcing)));
    }

private:
    numerics::Grid1D grid_;
    double phase_step_;
};

class BurgersSynthetic final : public SyntheticDynamics {
public:
    BurgersSynthetic() : phase_step_(2.0 * 3.14159265358979323846 / 60.0) {}

    Step evaluate(const Eigen::VectorXd&, const Eigen::VectorXd&,
                  const ModelPrediction& prediction, const Eigen::VectorXd& aux) const override {
        Step s;
        s.reward = env::burgers_reward(prediction.next_state());
        s.aux_next = aux;
        s.aux_next[0] += phase_step_;
        return s;
    }

private:
    double phase_step_;
};

// ---------------------------------------------------------------------------
// Kuramoto-Sivashinsky
// ---------------------------------------------------------------------------

class KsPhysics final : public DifferentiablePhysics {
public:
    KsPhysics() : grid_(env::KsParams{}.n_points, env::KsParams{}.length) {}

    env::EnvId id() const override { return env::EnvId::ks; }
    NormKind norm_kind() const override { return NormKind::GridRms; }
    double control_duration() const override { return 0.25; }

    Var rhs(Tape& t, Var physical, const Matrix& actions) const override {
        Matrix forcing(grid_.n_points, actions.cols());
        for (int j = 0; j < actions.cols(); ++j) {
            forcing.col(j) = env::ks_forcing(grid_, actions.col(j));
        }
        Var d2 = t.stencil(physical, numerics::StencilKind::Central6D2, grid_.spacing);
        Var d4 = t.stencil(physical, numerics::StencilKind::Central6D4, grid_.spacing);
        Var conv = t.upwind_convection(physical, grid_.spacing);
        return t.add(t.sub(t.scale(conv, -0.5), t.add(d2, d4)),
                     t.input(std::move(forcing)));
    }

private:
    numerics::Grid1D grid_;
};

class KsSynthetic final : public SyntheticDynamics {
public:
    KsSynthetic() : grid_(env::KsParams{}.n_points, env::KsParams{}.length) {}

    /// Reward quadrature over the model's intermediate snapshots (coarser
    /// than the simulator's per-inner-step quadrature, same trapezoidal
    /// rule).
    Step evaluate(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                  const ModelPrediction& prediction, const Eigen::VectorXd&) const override {
        std::vector<Eigen::VectorXd> snapshots;
        snapshots.reserve(prediction.states.size() + 1);
        snapshots.push_back(obs);
        for (const auto& s : prediction.states) snapshots.push_back(s);
        std::vector<Eigen::VectorXd> forcing(snapshots.size(),
                                             env::ks_forcing(grid_, action));
        Step s;
        s.reward = env::ks_reward(snapshots, forcing, grid_, 0.25);
        return s;
    }

private:
    numerics::Grid1D grid_;
};

}  // namespace

EnvPhysics make_env_physics(env::EnvId id) {
    EnvPhysics p;
    switch (id) {
        case env::EnvId::cartpole:
            p.diff = std::make_unique<CartPolePhysics>();
            p.synthetic = std::make_unique<CartPoleSynthetic>();
            return p;
        case env::EnvId::pendulum:
            p.diff = std::make_unique<PendulumPhysics>();
            p.synthetic = std::make_unique<PendulumSynthetic>();
            return p;
        case env::EnvId::burgers:
            p.diff = std::make_unique<BurgersPhysics>();
            p.synthetic = std::make_unique<BurgersSynthetic>();
            return p;
        case env::EnvId::ks:
            p.diff = std::make_unique<KsPhysics>();
            p.synthetic = std::make_unique<KsSynthetic>();
            return p;
    }
    throw std::invalid_argument("make_env_physics: unknown EnvId");
}

}  // namespace pimbrl::model
