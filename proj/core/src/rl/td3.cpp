#include "pimbrl/rl/td3.hpp"

#include <algorithm>
#include <stdexcept>

namespace pimbrl::rl {

using nn::Activation;
using nn::Matrix;
using nn::Tape;
using nn::Var;

void Mlp::init(const std::string& name, int in, int hidden, int out,
               Activation head_act, double head_scale, Rng& rng) {
    l1.init(params, name + ".l1", in, hidden, Activation::Relu, rng);
    l2.init(params, name + ".l2", hidden, hidden, Activation::Relu, rng);
    head.init(params, name + ".head", hidden, out, head_act, rng, head_scale);
}

Matrix Mlp::forward(const Matrix& x) const {
    return head.forward(params, l2.forward(params, l1.forward(params, x)));
}

Var Mlp::forward(Tape& t, Var x) {
    return head.forward(t, params, l2.forward(t, params, l1.forward(t, params, x)));
}

Td3Agent::Td3Agent(const env::EnvSpec& spec, Td3Config config, std::uint64_t seed)
    : spec_(spec), config_(std::move(config)) {
    Rng rng(seed);
    const int critic_in = spec_.obs_dim + spec_.action_dim;
    // near-zero initial actions keep early exploration centered in the box
    actor_.init("actor", spec_.obs_dim, config_.hidden, spec_.action_dim,
                Activation::Tanh, 0.01, rng);
    q1_.init("q1", critic_in, config_.hidden, 1, Activation::Linear, 1.0, rng);
    q2_.init("q2", critic_in, config_.hidden, 1, Activation::Linear, 1.0, rng);

    Rng dummy(0);  // target copies overwrite the values right away
    actor_targ_.init("actor_targ", spec_.obs_dim, config_.hidden, spec_.action_dim,
                     Activation::Tanh, 0.01, dummy);
    q1_targ_.init("q1_targ", critic_in, config_.hidden, 1, Activation::Linear, 1.0, dummy);
    q2_targ_.init("q2_targ", critic_in, config_.hidden, 1, Activation::Linear, 1.0, dummy);
    actor_targ_.params.copy_values_from(actor_.params);
    q1_targ_.params.copy_values_from(q1_.params);
    q2_targ_.params.copy_values_from(q2_.params);
}

Matrix Td3Agent::critic_input(const Matrix& obs, const Matrix& raw_actions) const {
    Matrix x(obs.rows() + raw_actions.rows(), obs.cols());
    x.topRows(obs.rows()) = obs;
    x.bottomRows(raw_actions.rows()) = raw_actions;
    return x;
}

Eigen::VectorXd Td3Agent::select_action(const Eigen::VectorXd& obs, bool explore,
                                        Rng& rng) const {
    return select_actions(obs, explore, rng).col(0);
}

Matrix Td3Agent::select_actions(const Matrix& obs, bool explore, Rng& rng) const {
    if (obs.rows() != spec_.obs_dim) {
        throw std::invalid_argument("Td3Agent::select_actions: observation dim mismatch");
    }
    Matrix raw = actor_.forward(obs);
    if (explore) {
        for (int j = 0; j < raw.cols(); ++j) {
            for (int i = 0; i < raw.rows(); ++i) {
                raw(i, j) = std::clamp(raw(i, j) + rng.normal(0.0, config_.explore_noise),
                                       -1.0, 1.0);
            }
        }
    }
    Matrix actions(spec_.action_dim, raw.cols());
    for (int j = 0; j < raw.cols(); ++j) {
        actions.col(j) = spec_.action_space.from_raw(raw.col(j));
    }
    return actions;
}

Eigen::VectorXd Td3Agent::compute_td3_target(std::span<const Transition* const> batch,
                                             Rng& rng) const {
    const int n = static_cast<int>(batch.size());
    if (n == 0) throw std::invalid_argument("compute_td3_target: empty batch");
    Matrix obs_next(spec_.obs_dim, n);
    for (int j = 0; j < n; ++j) obs_next.col(j) = batch[j]->obs_next;

    Matrix raw_next = actor_targ_.forward(obs_next);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < raw_next.rows(); ++i) {
            const double noise = std::clamp(rng.normal(0.0, config_.target_noise),
                                            -config_.noise_clip, config_.noise_clip);
            raw_next(i, j) = std::clamp(raw_next(i, j) + noise, -1.0, 1.0);
        }
    }
    Matrix x = critic_input(obs_next, raw_next);
    Matrix q1v = q1_targ_.forward(x);
    Matrix q2v = q2_targ_.forward(x);

    Eigen::VectorXd targets(n);
    for (int j = 0; j < n; ++j) {
        const double min_q = std::min(q1v(0, j), q2v(0, j));
        targets[j] = batch[j]->reward +
                     config_.gamma * (1.0 - batch[j]->done) * min_q;
    }
    return targets;
}

std::pair<double, double> Td3Agent::update_critics(
    std::span<const Transition* const> batch, const Eigen::VectorXd& targets) {
    const int n = static_cast<int>(batch.size());
    if (n == 0) throw std::invalid_argument("update_critics: empty batch");
    if (targets.size() != n) throw std::invalid_argument("update_critics: target size mismatch");

    Matrix obs(spec_.obs_dim, n), raw(spec_.action_dim, n);
    for (int j = 0; j < n; ++j) {
        obs.col(j) = batch[j]->obs;
        raw.col(j) = spec_.action_space.to_raw(batch[j]->action);
    }
    Matrix x = critic_input(obs, raw);
    Matrix target_row = targets.transpose();

    auto step = [&](Mlp& critic) {
        critic.params.zero_grad();
        Tape t;
        Var q = critic.forward(t, t.input(x));
        Var loss = t.mean_all(t.square(t.sub(q, t.input(target_row))));
        const double value = t.value(loss)(0, 0);
        t.backward(loss);
        nn::adam_update(critic.params, config_.lr);
        return value;
    };
    const double l1 = step(q1_);
    const double l2 = step(q2_);
    return {l1, l2};
}

std::optional<double> Td3Agent::update_actor_delayed(
    std::span<const Transition* const> batch, long iteration) {
    if (iteration % config_.policy_delay != 0) return std::nullopt;
    const int n = static_cast<int>(batch.size());
    if (n == 0) throw std::invalid_argument("update_actor_delayed: empty batch");

    Matrix obs(spec_.obs_dim, n);
    for (int j = 0; j < n; ++j) obs.col(j) = batch[j]->obs;

    actor_.params.zero_grad();
    q1_.params.zero_grad();
    Tape t;
    Var o = t.input(obs);
    Var raw = actor_.forward(t, o);
    std::array<Var, 2> parts = {o, raw};
    Var q = q1_.forward(t, t.concat_rows(parts));
    // ascend q1: descend its negation
    Var loss = t.scale(t.mean_all(q), -1.0);
    const double value = t.value(loss)(0, 0);
    t.backward(loss);
    q1_.params.zero_grad();  // the critic only provides the gradient path
    nn::adam_update(actor_.params, config_.lr);

    polyak_all_targets();
    return value;
}

void Td3Agent::polyak_all_targets() {
    nn::polyak_update(actor_targ_.params, actor_.params, config_.rho);
    nn::polyak_update(q1_targ_.params, q1_.params, config_.rho);
    nn::polyak_update(q2_targ_.params, q2_.params, config_.rho);
}

double Td3Agent::q1_value(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const {
    Matrix o = obs;
    Matrix raw = spec_.action_space.to_raw(action);
    return q1_.forward(critic_input(o, raw))(0, 0);
}

void Td3Agent::save(const std::filesystem::path& file) const {
    nn::save_checkpoint(file, {{"actor", &actor_.params},
                               {"q1", &q1_.params},
                               {"q2", &q2_.params},
                               {"actor_targ", &actor_targ_.params},
                               {"q1_targ", &q1_targ_.params},
                               {"q2_targ", &q2_targ_.params}});
}

void Td3Agent::load(const std::filesystem::path& file) {
    nn::load_checkpoint(file, {{"actor", &actor_.params},
                               {"q1", &q1_.params},
                               {"q2", &q2_.params},
                               {"actor_targ", &actor_targ_.params},
                               {"q1_targ", &q1_targ_.params},
                               {"q2_targ", &q2_targ_.params}});
}

}  // namespace pimbrl::rl
