#pragma once

#include <filesystem>

#include "pimbrl/exp/config.hpp"
#include "pimbrl/rl/td3.hpp"

namespace pimbrl::train {

/// Per-run mutable bookkeeping. real_steps counts true-environment steps
/// only (the x-axis of every performance curve); model rollouts and gradient
/// iterations never touch it.
struct RunState {
    long real_steps = 0;
    long episodes = 0;
    bool gate_open = false;
    bool fine_tune = false;
};

struct EvalStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<double> per_episode;
};

/// Exploration-free evaluation over fresh environment instances with
/// per-episode seeds derived from `seed`; the agent is untouched.
EvalStats evaluate_policy(const rl::Td3Agent& agent, env::EnvId id,
                          const env::EnvOptions& options, int n_episodes,
                          std::uint64_t seed);

/// One-way model-free fine-tuning switch: latches on once the averaged
/// evaluation return exceeds the threshold and never releases.
bool fine_tune_gate(RunState& state, double avg_return, double threshold);

struct RunResult {
    std::filesystem::path out_dir;
    long steps_done = 0;
    long episodes = 0;
};

/// Executes one training run per the configured algorithm, writing the
/// config echo, metrics, timing sidecar, checkpoints, and the final real
/// buffer into cfg.out_dir.
RunResult run_experiment(const exp::ExperimentConfig& cfg);

/// Algorithm-checked entry points.
RunResult run_pimbrl(const exp::ExperimentConfig& cfg);
RunResult run_mbrl(const exp::ExperimentConfig& cfg);
RunResult run_mfrl(const exp::ExperimentConfig& cfg);

}  // namespace pimbrl::train
