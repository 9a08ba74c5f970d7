#include "pimbrl/env/ks.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "pimbrl/numerics/stencils.hpp"
#include "pimbrl/util/errors.hpp"

namespace pimbrl::env {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

void ks_rhs_into(std::span<const double> u, std::span<const double> forcing,
                 std::span<double> out, std::span<double> conv, std::span<double> d2,
                 std::span<double> d4, double spacing) {
    using numerics::StencilKind;
    numerics::apply_stencil(u, conv, StencilKind::Upwind2Convection, spacing);
    numerics::apply_stencil(u, d2, StencilKind::Central6D2, spacing);
    numerics::apply_stencil(u, d4, StencilKind::Central6D4, spacing);
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = -d2[i] - d4[i] - 0.5 * conv[i] + forcing[i];
    }
}

}  // namespace

Eigen::VectorXd ks_forcing(const numerics::Grid1D& grid, const Eigen::Vector4d& a) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(grid.n_points);
    const double l = grid.length;
    for (int k = 0; k < 4; ++k) {
        const double xk = 0.25 * k * l;
        for (int i = 0; i < grid.n_points; ++i) {
            const double x = grid.node(i);
            // periodic images of the actuator on both sides of the seam
            for (int p = -1; p <= 1; ++p) {
                const double d = x - xk + p * l;
                f[i] += a[k] * std::exp(-0.5 * d * d) * kInvSqrt2Pi;
            }
        }
    }
    return f;
}

Eigen::VectorXd ks_rhs(const Eigen::VectorXd& u, const numerics::Grid1D& grid,
                       const Eigen::Vector4d& a) {
    if (u.size() != grid.n_points) {
        throw std::invalid_argument("ks_rhs: field length does not match grid");
    }
    const std::size_t n = u.size();
    Eigen::VectorXd forcing = ks_forcing(grid, a);
    Eigen::VectorXd out(n);
    std::vector<double> conv(n), d2(n), d4(n);
    ks_rhs_into({u.data(), n}, {forcing.data(), n}, {out.data(), n}, conv, d2, d4,
                grid.spacing);
    if (!numerics::all_finite({out.data(), n})) {
        throw NumericBlowupError("ks_rhs: non-finite output", 0);
    }
    return out;
}

double ks_reward_integrand(const Eigen::VectorXd& u, const Eigen::VectorXd& f,
                           const numerics::Grid1D& grid) {
    using numerics::StencilKind;
    const std::size_t n = u.size();
    std::vector<double> ux(n), uxx(n);
    numerics::apply_stencil({u.data(), n}, ux, StencilKind::Central6D1, grid.spacing);
    numerics::apply_stencil({u.data(), n}, uxx, StencilKind::Central6D2, grid.spacing);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += uxx[i] * uxx[i] + ux[i] * ux[i] + u[i] * f[i];
    }
    // node-sum x spacing, normalized by domain length
    return sum * grid.spacing / grid.length;
}

double ks_reward(const std::vector<Eigen::VectorXd>& u_snapshots,
                 const std::vector<Eigen::VectorXd>& f_snapshots,
                 const numerics::Grid1D& grid, double duration) {
    if (u_snapshots.size() < 2 || u_snapshots.size() != f_snapshots.size()) {
        throw std::invalid_argument("ks_reward: need >= 2 matching snapshots");
    }
    const std::size_t m = u_snapshots.size();
    const double dt = duration / static_cast<double>(m - 1);
    double integral = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
        const double w = (s == 0 || s == m - 1) ? 0.5 : 1.0;
        integral += w * dt * ks_reward_integrand(u_snapshots[s], f_snapshots[s], grid);
    }
    return -integral / duration;
}

KsAttractorBank::KsAttractorBank(std::uint64_t seed, int size, double burn_in,
                                 double harvest_gap, double dt) {
    if (size <= 0) throw std::invalid_argument("KsAttractorBank: size must be positive");
    KsParams params;
    numerics::Grid1D grid(params.n_points, params.length);
    Rng rng(seed);
    std::vector<double> u(params.n_points);
    for (auto& v : u) v = rng.uniform(-0.1, 0.1);

    std::vector<double> forcing(params.n_points, 0.0), conv(params.n_points),
        d2(params.n_points), d4(params.n_points);
    numerics::RhsFn rhs = [&](std::span<const double> in, std::span<double> out) {
        ks_rhs_into(in, forcing, out, conv, d2, d4, grid.spacing);
    };
    numerics::Rk4Workspace ws(params.n_points);

    const long burn_steps = static_cast<long>(std::llround(burn_in / dt));
    for (long s = 0; s < burn_steps; ++s) ws.step(rhs, u, dt, s);

    const long gap_steps = static_cast<long>(std::llround(harvest_gap / dt));
    snapshots_.reserve(size);
    for (int k = 0; k < size; ++k) {
        snapshots_.emplace_back(Eigen::Map<const Eigen::VectorXd>(u.data(), u.size()));
        for (long s = 0; s < gap_steps; ++s) ws.step(rhs, u, dt, burn_steps + s);
    }
}

std::shared_ptr<const KsAttractorBank> KsAttractorBank::shared(std::uint64_t seed,
                                                               int size) {
    static std::mutex mutex;
    static std::map<std::pair<std::uint64_t, int>, std::shared_ptr<const KsAttractorBank>>
        cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(seed, size);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto bank = std::make_shared<const KsAttractorBank>(seed, size);
    cache[key] = bank;
    return bank;
}

KsEnv::KsEnv(const EnvOptions& options)
    : grid_(params_.n_points, params_.length),
      bank_(KsAttractorBank::shared(options.ks_bank_seed, options.ks_bank_size)),
      rk4_(params_.n_points) {
    if (bank_->size() == 0) throw ConfigError({"KsEnv: empty attractor bank"});
    spec_.id = EnvId::ks;
    spec_.obs_dim = params_.n_points;
    spec_.action_dim = params_.n_actuators;
    spec_.action_space.low = Eigen::VectorXd::Constant(4, -params_.action_bound);
    spec_.action_space.high = Eigen::VectorXd::Constant(4, params_.action_bound);
    spec_.control_steps_per_episode = 400;
    spec_.inner_steps_per_control = 250;
    spec_.inner_dt = 0.001;
    state_ = Eigen::VectorXd::Zero(params_.n_points);
    forcing_.resize(params_.n_points);
    conv_.resize(params_.n_points);
    d2_.resize(params_.n_points);
    d4_.resize(params_.n_points);
}

Eigen::VectorXd KsEnv::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    state_ = bank_->snapshot(rng_.uniform_index(bank_->size()));
    steps_ = 0;
    episode_over_ = false;
    return state_;
}

StepResult KsEnv::step(const Eigen::VectorXd& action) {
    if (episode_over_) throw std::logic_error("KsEnv::step: episode already over");
    if (action.size() != 4) throw std::invalid_argument("KsEnv::step: action must be 4-d");
    Eigen::Vector4d a = spec_.action_space.clamp(action);

    const Eigen::VectorXd f = ks_forcing(grid_, a);
    std::copy(f.data(), f.data() + f.size(), forcing_.begin());
    const double spacing = grid_.spacing;
    numerics::RhsFn rhs = [&](std::span<const double> u, std::span<double> out) {
        ks_rhs_into(u, forcing_, out, conv_, d2_, d4_, spacing);
    };

    // accumulate the reward integral with trapezoidal weights as we step
    const int m = spec_.inner_steps_per_control;
    const double dt = spec_.inner_dt;
    double integral = 0.5 * dt * ks_reward_integrand(state_, f, grid_);
    std::span<double> u_span{state_.data(), static_cast<std::size_t>(state_.size())};
    const long base_step = static_cast<long>(steps_) * m;
    for (int s = 0; s < m; ++s) {
        rk4_.step(rhs, u_span, dt, base_step + s);
        const double w = (s == m - 1) ? 0.5 : 1.0;
        integral += w * dt * ks_reward_integrand(state_, f, grid_);
    }
    ++steps_;

    StepResult r;
    r.observation = state_;
    r.reward = -integral / spec_.control_dt();
    r.done = false;
    r.truncated = steps_ >= spec_.control_steps_per_episode;
    episode_over_ = r.episode_over();
    return r;
}

void KsEnv::set_state(const Eigen::VectorXd& state) {
    if (state.size() != grid_.n_points) {
        throw std::invalid_argument("KsEnv::set_state: field length mismatch");
    }
    state_ = state;
    episode_over_ = false;
}

}  // namespace pimbrl::env
