#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include "pimbrl/env/env.hpp"
#include "pimbrl/nn/layers.hpp"
#include "pimbrl/rl/replay_buffer.hpp"

namespace pimbrl::rl {

struct Td3Config {
    double gamma = 0.99;
    double rho = 0.995;  // polyak factor: target <- rho*target + (1-rho)*live
    int policy_delay = 2;
    double lr = 1e-3;
    double explore_noise = 0.1;  // sigma in [-1,1] policy-output space
    double target_noise = 0.2;   // target-smoothing sigma, same space
    double noise_clip = 0.5;
    int hidden = 256;
};

/// Two-hidden-layer MLP with a configurable head.
struct Mlp {
    nn::DenseLayer l1, l2, head;
    nn::ParameterSet params;

    void init(const std::string& name, int in, int hidden, int out,
              nn::Activation head_act, double head_scale, Rng& rng);
    nn::Matrix forward(const nn::Matrix& x) const;
    nn::Var forward(nn::Tape& t, nn::Var x);
};

/// Twin-delayed deep deterministic policy gradient agent: deterministic
/// actor, twin critics with min-bootstrap targets, target-policy smoothing,
/// and actor/target updates gated to every policy_delay-th iteration.
///
/// The actor emits values in [-1,1]^d that the action space maps to executed
/// actions (sign mapping for the cart-pole's two-valued force set); critics
/// consume actions in the same normalized coordinates.
class Td3Agent {
public:
    Td3Agent(const env::EnvSpec& spec, Td3Config config, std::uint64_t seed);

    const Td3Config& config() const { return config_; }
    const env::EnvSpec& env_spec() const { return spec_; }

    /// Executed action for one observation; exploration adds clamped
    /// Gaussian noise to the raw policy output before the box mapping.
    Eigen::VectorXd select_action(const Eigen::VectorXd& obs, bool explore, Rng& rng) const;

    /// Column-wise batched variant (rollout generation, evaluation).
    nn::Matrix select_actions(const nn::Matrix& obs, bool explore, Rng& rng) const;

    /// Q_j = r_j + gamma (1 - d_j) min_i q_targ,i(u', pi_targ(u') + noise).
    Eigen::VectorXd compute_td3_target(std::span<const Transition* const> batch,
                                       Rng& rng) const;

    /// One Adam step per critic on the squared TD error; returns both losses.
    std::pair<double, double> update_critics(std::span<const Transition* const> batch,
                                             const Eigen::VectorXd& targets);

    /// Every policy_delay-th iteration: one ascent step on q1(u, pi(u)) and a
    /// polyak update of all three targets; otherwise a no-op returning
    /// std::nullopt. `iteration` is 1-based (Algorithm-style k).
    std::optional<double> update_actor_delayed(std::span<const Transition* const> batch,
                                               long iteration);

    void polyak_all_targets();

    void save(const std::filesystem::path& file) const;
    void load(const std::filesystem::path& file);

    // component access (tests, diagnostics)
    Mlp& actor() { return actor_; }
    const Mlp& actor() const { return actor_; }
    Mlp& critic1() { return q1_; }
    Mlp& critic2() { return q2_; }
    Mlp& actor_target() { return actor_targ_; }
    Mlp& critic1_target() { return q1_targ_; }
    Mlp& critic2_target() { return q2_targ_; }

    double q1_value(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const;

private:
    nn::Matrix critic_input(const nn::Matrix& obs, const nn::Matrix& raw_actions) const;

    env::EnvSpec spec_;
    Td3Config config_;
    Mlp actor_, q1_, q2_;
    Mlp actor_targ_, q1_targ_, q2_targ_;
};

}  // namespace pimbrl::rl
