#pragma once

#include <memory>

#include "pimbrl/env/env.hpp"
#include "pimbrl/nn/tape.hpp"

namespace pimbrl::model {

struct ModelPrediction;

/// Differentiable form of an environment's governing equations, built from
/// the same stencil tables as the simulated environments. States enter in
/// observation coordinates; `to_physical` reconstructs the field the
/// equations act on (identity except for the Burgers' discrepancy
/// observation, which adds the reference level back).
class DifferentiablePhysics {
public:
    virtual ~DifferentiablePhysics() = default;

    virtual env::EnvId id() const = 0;
    virtual nn::NormKind norm_kind() const = 0;
    /// Duration of one control step (the physics-loss residual spreads it
    /// over N forward-Euler intervals).
    virtual double control_duration() const = 0;

    /// Observation -> physical state at intermediate index `step_index` of
    /// `n_steps` (0 = the control-step start). `aux` columns carry the
    /// per-sample auxiliary record.
    virtual nn::Var to_physical(nn::Tape& t, nn::Var obs, const nn::Matrix& aux,
                                int step_index, int n_steps) const {
        (void)aux;
        (void)step_index;
        (void)n_steps;
        return obs;
    }

    /// d(state)/dt of the governing equations at the given physical states;
    /// `actions` columns are executed actions in environment units.
    virtual nn::Var rhs(nn::Tape& t, nn::Var physical, const nn::Matrix& actions) const = 0;

    /// Difference next - prev entering the temporal derivative; the pendulum
    /// overrides this to difference its angle row on the circle.
    virtual nn::Var state_difference(nn::Tape& t, nn::Var next, nn::Var prev) const {
        return t.sub(next, prev);
    }
};

/// Analytic reward, termination and auxiliary-record advance applied to
/// model-predicted steps when synthesizing rollout transitions.
class SyntheticDynamics {
public:
    virtual ~SyntheticDynamics() = default;

    struct Step {
        double reward = 0.0;
        double done = 0.0;
        Eigen::VectorXd aux_next;
    };

    virtual Step evaluate(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                          const ModelPrediction& prediction,
                          const Eigen::VectorXd& aux) const = 0;
};

struct EnvPhysics {
    std::unique_ptr<DifferentiablePhysics> diff;
    std::unique_ptr<SyntheticDynamics> synthetic;
};

EnvPhysics make_env_physics(env::EnvId id);

}  // namespace pimbrl::model
