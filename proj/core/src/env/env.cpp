#include "pimbrl/env/env.hpp"

#include <stdexcept>

#include "pimbrl/env/burgers.hpp"
#include "pimbrl/env/cartpole.hpp"
#include "pimbrl/env/ks.hpp"
#include "pimbrl/env/pendulum.hpp"

namespace pimbrl::env {

std::string to_string(EnvId id) {
    switch (id) {
        case EnvId::cartpole: return "cartpole";
        case EnvId::pendulum: return "pendulum";
        case EnvId::burgers: return "burgers";
        case EnvId::ks: return "ks";
    }
    throw std::invalid_argument("unknown EnvId");
}

EnvId env_id_from_string(const std::string& s) {
    if (s == "cartpole") return EnvId::cartpole;
    if (s == "pendulum") return EnvId::pendulum;
    if (s == "burgers") return EnvId::burgers;
    if (s == "ks") return EnvId::ks;
    throw std::invalid_argument("unknown environment id: " + s);
}

Eigen::VectorXd ActionSpace::from_raw(const Eigen::VectorXd& raw) const {
    if (sign_discrete) {
        Eigen::VectorXd a(raw.size());
        for (int i = 0; i < raw.size(); ++i) a[i] = raw[i] >= 0.0 ? high[i] : low[i];
        return a;
    }
    return (center() + half_range().cwiseProduct(raw)).cwiseMax(low).cwiseMin(high);
}

Eigen::VectorXd ActionSpace::to_raw(const Eigen::VectorXd& action) const {
    if (sign_discrete) {
        Eigen::VectorXd raw(action.size());
        for (int i = 0; i < action.size(); ++i) raw[i] = action[i] >= 0.0 ? 1.0 : -1.0;
        return raw;
    }
    Eigen::VectorXd raw(action.size());
    const Eigen::VectorXd c = center();
    const Eigen::VectorXd h = half_range();
    for (int i = 0; i < action.size(); ++i) {
        raw[i] = h[i] > 0.0 ? (action[i] - c[i]) / h[i] : 0.0;
    }
    return raw.cwiseMax(-1.0).cwiseMin(1.0);
}

Eigen::VectorXd ActionSpace::clamp(const Eigen::VectorXd& action) const {
    if (sign_discrete) return from_raw(action);
    return action.cwiseMax(low).cwiseMin(high);
}

std::unique_ptr<Environment> make_environment(EnvId id, const EnvOptions& options) {
    switch (id) {
        case EnvId::cartpole: return std::make_unique<CartPoleEnv>();
        case EnvId::pendulum: return std::make_unique<PendulumEnv>();
        case EnvId::burgers: return std::make_unique<BurgersEnv>();
        case EnvId::ks: return std::make_unique<KsEnv>(options);
    }
    throw std::invalid_argument("unknown EnvId");
}

EnvSpec make_env_spec(EnvId id) {
    switch (id) {
        case EnvId::cartpole: return CartPoleEnv().spec();
        case EnvId::pendulum: return PendulumEnv().spec();
        case EnvId::burgers: return BurgersEnv().spec();
        case EnvId::ks: {
            // avoid generating the attractor bank just for the spec
            KsParams p;
            EnvSpec s;
            s.id = EnvId::ks;
            s.obs_dim = p.n_points;
            s.action_dim = p.n_actuators;
            s.action_space.low = Eigen::VectorXd::Constant(4, -p.action_bound);
            s.action_space.high = Eigen::VectorXd::Constant(4, p.action_bound);
            s.control_steps_per_episode = 400;
            s.inner_steps_per_control = 250;
            s.inner_dt = 0.001;
            return s;
        }
    }
    throw std::invalid_argument("unknown EnvId");
}

}  // namespace pimbrl::env
