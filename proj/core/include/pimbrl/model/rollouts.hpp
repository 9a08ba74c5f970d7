#pragma once

#include <functional>
#include <optional>

#include "pimbrl/model/transition_model.hpp"
#include "pimbrl/rl/replay_buffer.hpp"

namespace pimbrl::model {

/// Maps a batch of observations (columns) to executed actions (columns),
/// exploration noise included. Supplied by the training loop from the
/// current policy.
using BatchPolicy = std::function<nn::Matrix(const nn::Matrix&)>;

/// Dyna rollout generation: seeds are the next-states of transitions sampled
/// uniformly from the union of `seed_buffers`; the model is rolled forward up
/// to `length` control steps under the policy, rewards and done flags are
/// computed analytically from the predicted states, and every synthetic
/// transition is appended to `fake` with the model-generated provenance
/// flag. Trajectories truncate at analytic termination.
///
/// Returns the number of transitions added, or std::nullopt (no-op skip)
/// when the accuracy gate is closed.
std::optional<int> generate_rollouts(const TransitionModel& model,
                                     const SyntheticDynamics& synthetic,
                                     const BatchPolicy& policy,
                                     std::span<const rl::ReplayBuffer* const> seed_buffers,
                                     int n_seeds, int length, bool gate_open,
                                     rl::ReplayBuffer& fake, Rng& rng);

}  // namespace pimbrl::model
