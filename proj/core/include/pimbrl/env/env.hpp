#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <string>

namespace pimbrl::env {

enum class EnvId { cartpole, pendulum, burgers, ks };

std::string to_string(EnvId id);
EnvId env_id_from_string(const std::string& s);

/// Action space of an environment. Continuous environments are boxes; the
/// cart-pole's two-valued force set is driven by a one-dimensional
/// continuous signal mapped to {low, high} by sign.
struct ActionSpace {
    Eigen::VectorXd low;
    Eigen::VectorXd high;
    bool sign_discrete = false;

    int dim() const { return static_cast<int>(low.size()); }
    Eigen::VectorXd center() const { return 0.5 * (low + high); }
    Eigen::VectorXd half_range() const { return 0.5 * (high - low); }

    /// Maps a raw policy output in [-1,1]^d to an executable action.
    Eigen::VectorXd from_raw(const Eigen::VectorXd& raw) const;
    /// Maps an executable action back to [-1,1]^d (sign for discrete).
    Eigen::VectorXd to_raw(const Eigen::VectorXd& action) const;
    /// Clamps an executable action into the space.
    Eigen::VectorXd clamp(const Eigen::VectorXd& action) const;
};

struct EnvSpec {
    EnvId id;
    int obs_dim = 0;
    int action_dim = 0;
    ActionSpace action_space;
    int control_steps_per_episode = 0;
    int inner_steps_per_control = 0;
    double inner_dt = 0.0;
    int aux_dim = 0;  // extra model-side inputs carried per transition

    double control_dt() const { return inner_steps_per_control * inner_dt; }
};

struct StepResult {
    Eigen::VectorXd observation;
    double reward = 0.0;
    bool done = false;       // genuine failure termination (masks bootstrapping)
    bool truncated = false;  // horizon cap / fixed-length episode end
    std::map<std::string, double> info;

    bool episode_over() const { return done || truncated; }
};

struct EnvOptions {
    std::uint64_t ks_bank_seed = 20240901ULL;
    int ks_bank_size = 100;
};

/// Single-owner mutable environment. Distinct instances may run concurrently;
/// nothing is shared between instances except immutable data (the KS
/// attractor bank).
class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvSpec& spec() const = 0;

    /// Resets to a seeded random initial state; returns the observation.
    virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;

    /// Advances one control step (inner_steps_per_control numerical steps
    /// under zero-order-hold action). Throws std::logic_error if the episode
    /// is already over and NumericBlowupError if the state diverges.
    virtual StepResult step(const Eigen::VectorXd& action) = 0;

    /// Full physical state u (not the observation).
    virtual const Eigen::VectorXd& state() const = 0;

    /// Overwrites the full physical state and marks the episode active;
    /// the control-step counter is preserved. Used by test and report
    /// harnesses that need trajectories from chosen states.
    virtual void set_state(const Eigen::VectorXd& state) = 0;

    /// Model-side auxiliary inputs at the current control step (empty for
    /// most environments; the Burgers' environment exposes its reference
    /// phase here).
    virtual Eigen::VectorXd aux() const { return Eigen::VectorXd(); }

    virtual int elapsed_control_steps() const = 0;
};

std::unique_ptr<Environment> make_environment(EnvId id, const EnvOptions& options = {});

EnvSpec make_env_spec(EnvId id);

}  // namespace pimbrl::env
