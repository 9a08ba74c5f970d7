#include "pimbrl/model/rollouts.hpp"

#include <stdexcept>

namespace pimbrl::model {

using nn::Matrix;

std::optional<int> generate_rollouts(const TransitionModel& model,
                                     const SyntheticDynamics& synthetic,
                                     const BatchPolicy& policy,
                                     std::span<const rl::ReplayBuffer* const> seed_buffers,
                                     int n_seeds, int length, bool gate_open,
                                     rl::ReplayBuffer& fake, Rng& rng) {
    if (!gate_open) return std::nullopt;
    if (n_seeds <= 0) throw std::invalid_argument("generate_rollouts: need seed states");
    if (length <= 0) return 0;

    const auto& spec = model.env_spec();
    std::vector<const rl::Transition*> seeds =
        rl::sample_union(seed_buffers, n_seeds, rng);

    Matrix obs(spec.obs_dim, n_seeds);
    Matrix aux(spec.aux_dim, n_seeds);
    for (int j = 0; j < n_seeds; ++j) {
        obs.col(j) = seeds[j]->obs_next;
        if (spec.aux_dim > 0) aux.col(j) = seeds[j]->aux_next;
    }

    std::vector<int> active(n_seeds);
    for (int j = 0; j < n_seeds; ++j) active[j] = j;

    int added = 0;
    for (int step = 0; step < length && !active.empty(); ++step) {
        const int n = static_cast<int>(active.size());
        Matrix cur_obs(spec.obs_dim, n), cur_aux(spec.aux_dim, n);
        for (int c = 0; c < n; ++c) {
            cur_obs.col(c) = obs.col(active[c]);
            if (spec.aux_dim > 0) cur_aux.col(c) = aux.col(active[c]);
        }

        Matrix actions = policy(cur_obs);
        if (actions.rows() != spec.action_dim || actions.cols() != n) {
            throw std::invalid_argument("generate_rollouts: policy output shape mismatch");
        }
        std::vector<Matrix> pred = model.predict_batch(cur_obs, actions, cur_aux);

        std::vector<int> still_active;
        still_active.reserve(active.size());
        for (int c = 0; c < n; ++c) {
            ModelPrediction p;
            p.states.reserve(pred.size());
            for (const auto& m : pred) p.states.emplace_back(m.col(c));
            if (!p.next_state().allFinite()) continue;  // drop diverged rollouts

            const Eigen::VectorXd cur_aux_j =
                spec.aux_dim > 0 ? Eigen::VectorXd(cur_aux.col(c)) : Eigen::VectorXd();
            auto result = synthetic.evaluate(cur_obs.col(c), actions.col(c), p, cur_aux_j);

            rl::Transition tr;
            tr.obs = cur_obs.col(c);
            tr.action = actions.col(c);
            tr.obs_next = p.next_state();
            tr.reward = result.reward;
            tr.done = result.done;
            tr.real = false;
            tr.aux = cur_aux_j;
            tr.aux_next = spec.aux_dim > 0 ? result.aux_next : Eigen::VectorXd();
            fake.push(std::move(tr));
            ++added;

            if (result.done == 0.0) {
                const int j = active[c];
                obs.col(j) = p.next_state();
                if (spec.aux_dim > 0) aux.col(j) = result.aux_next;
                still_active.push_back(j);
            }
        }
        active.swap(still_active);
    }
    return added;
}

}  // namespace pimbrl::model
