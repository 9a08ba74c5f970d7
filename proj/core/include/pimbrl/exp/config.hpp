#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pimbrl/env/env.hpp"

namespace pimbrl::exp {

enum class Algo { mfrl, mbrl, pimbrl };

std::string to_string(Algo a);
Algo algo_from_string(const std::string& s);

/// Resolved experiment configuration. Defaults mirror the reference
/// hyperparameter tables per environment; everything is overridable through
/// the config file (sections env/agent/model/loop) and CLI flags.
struct ExperimentConfig {
    // env
    env::EnvId env_id = env::EnvId::cartpole;
    std::uint64_t ks_bank_seed = 20240901ULL;
    int ks_bank_size = 100;

    // agent
    double gamma = 0.99;
    double rho = 0.995;
    int policy_delay = 2;
    int i_rl = 50;  // gradient iterations per update cycle
    int batch = 100;
    double lr = 1e-3;
    double explore_noise = 0.1;
    double target_noise = 0.2;
    double noise_clip = 0.5;
    int hidden = 256;

    // model
    double lambda_gate = 1e-4;   // accuracy threshold on the rolling data loss
    int rollout_length = 200;    // l_M
    long n_s_m = 800;            // real pairs required before data-loss updates
    long n_s_r = 1000;           // pairs across both buffers before physics updates
    int n_intermediate = 1;      // N
    int model_batch = 100;
    double model_lr = 1e-3;
    int model_updates_per_cycle = 50;
    int physics_updates_per_cycle = 50;
    int rollout_batch = 400;  // seed states per rollout round
    int gate_window = 50;     // rolling-mean window of training-batch losses
    int latent_width = 64;
    int dense_hidden = 256;
    int decoder_hidden = 256;
    bool residual_head = true;

    // loop
    Algo algo = Algo::pimbrl;
    std::uint64_t seed = 0;
    long total_steps = 0;
    int update_every = 50;
    int update_after = 500;  // real steps before agent updates begin
    int start_steps = 500;   // uniform-random warmup actions
    int eval_every = 500;
    int eval_episodes = 100;
    std::optional<double> fine_tune_threshold;
    std::size_t real_capacity = 1000000;
    std::size_t fake_capacity = 1000000;
    double real_fraction = -1.0;  // <0: uniform over the buffer union
    bool dump_trajectories = false;
    std::string out_dir;
};

/// Table defaults for one environment/algorithm pair.
ExperimentConfig default_config(env::EnvId id, Algo algo);

/// Throws ConfigError listing every violation.
void validate(const ExperimentConfig& cfg);

/// Loads a JSON config file (sections env/agent/model/loop; all keys
/// optional, unknown keys rejected) over the per-environment defaults, then
/// applies `overrides_json` (same schema) on top. An empty path applies
/// overrides to the defaults only. The environment id must come from the
/// file, the overrides, or `fallback_env`.
ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::string& overrides_json,
                             std::optional<env::EnvId> fallback_env = std::nullopt);

/// Serializes the fully resolved config (round-trips through load_config).
std::string config_to_json(const ExperimentConfig& cfg);

/// Writes the resolved-config echo into the run directory.
void echo_config(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace pimbrl::exp
