#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pimbrl/env/burgers.hpp"
#include "pimbrl/env/cartpole.hpp"
#include "pimbrl/env/ks.hpp"
#include "pimbrl/env/pendulum.hpp"
#include "pimbrl/env/trajectory_io.hpp"
#include "pimbrl/util/errors.hpp"
#include "test_util.hpp"

using namespace pimbrl;
using namespace pimbrl::env;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ============================================================================
// Cart-pole
// ============================================================================

TEST_CASE("cartpole derivatives at equilibrium") {
    Eigen::Vector4d origin = Eigen::Vector4d::Zero();
    auto [x_ddot, theta_ddot] = cartpole_derivatives(origin, 0.0);
    CHECK(x_ddot == 0.0);
    CHECK(theta_ddot == 0.0);
}

TEST_CASE("cartpole derivatives under +-10 force") {
    // hand evaluation with m_c = 1.0, m_p = 0.1, l = 0.5, g = 9.8:
    // temp = 10/1.1, theta_ddot = -temp / (0.5 (4/3 - 0.1/1.1)) = -14.6341...,
    // x_ddot = temp - 0.05 theta_ddot / 1.1 = 9.7561...
    Eigen::Vector4d origin = Eigen::Vector4d::Zero();
    auto [x_pos, t_pos] = cartpole_derivatives(origin, 10.0);
    CHECK(t_pos == doctest::Approx(-14.634146341).epsilon(1e-8));
    CHECK(x_pos == doctest::Approx(9.756097561).epsilon(1e-8));

    auto [x_neg, t_neg] = cartpole_derivatives(origin, -10.0);
    CHECK(x_neg == doctest::Approx(-x_pos).epsilon(1e-12));
    CHECK(t_neg == doctest::Approx(-t_pos).epsilon(1e-12));
}

TEST_CASE("cartpole failure thresholds") {
    CHECK(CartPoleEnv::failed({0, 0, kPi / 10.0, 0}));
    CHECK_FALSE(CartPoleEnv::failed({0, 0, kPi / 13.0, 0}));
    CHECK(CartPoleEnv::failed({2.5, 0, 0, 0}));
}

TEST_CASE("cartpole at equilibrium with alternating forces survives to the cap") {
    // bang-bang feedback alternates between the two valid forces and keeps
    // the pole upright; the reward is +1 on every surviving step
    CartPoleEnv env;
    env.reset(3);
    env.set_state(Eigen::Vector4d::Zero());
    double total = 0.0;
    int steps = 0;
    Eigen::VectorXd action(1);
    for (;;) {
        const auto& s = env.state();
        action[0] = (s[2] + 0.5 * s[3] >= 0.0) ? 10.0 : -10.0;
        auto r = env.step(action);
        total += r.reward;
        ++steps;
        CHECK(r.reward == 1.0);
        CHECK_FALSE(r.done);
        if (r.episode_over()) break;
    }
    CHECK(steps == 200);
    CHECK(total == 200.0);
}

TEST_CASE("cartpole reset is reproducible and inside the start box") {
    CartPoleEnv a, b;
    auto oa = a.reset(77);
    auto ob = b.reset(77);
    CHECK((oa - ob).norm() == 0.0);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(oa[i]) < 0.05);
}

TEST_CASE("stepping a finished episode is a usage error") {
    CartPoleEnv env;
    CHECK_THROWS_AS(env.step(Eigen::VectorXd::Constant(1, 10.0)), std::logic_error);
}

// ============================================================================
// Pendulum
// ============================================================================

TEST_CASE("pendulum derivative examples") {
    CHECK(pendulum_derivatives(0.0, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(pendulum_derivatives(kPi / 2.0, 0.0, 0.0) == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(pendulum_derivatives(0.0, 0.0, 2.0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("pendulum reward examples") {
    CHECK(pendulum_reward(0, 0, 0) == 0.0);
    CHECK(pendulum_reward(1, 1, 1) == doctest::Approx(-1.101).epsilon(1e-12));
    CHECK(pendulum_reward(kPi, 0, 0) == doctest::Approx(-kPi * kPi).epsilon(1e-12));
}

TEST_CASE("pendulum reset bounds and determinism") {
    PendulumEnv a, b;
    auto oa = a.reset(5);
    CHECK(std::abs(oa[0]) < 1.0);
    CHECK(std::abs(oa[1]) < 1.0);
    CHECK((a.reset(9) - b.reset(9)).norm() == 0.0);
}

TEST_CASE("pendulum angular velocity stays capped") {
    PendulumEnv env;
    env.reset(1);
    env.set_state(Eigen::Vector2d(0.0, 7.9));
    Eigen::VectorXd torque = Eigen::VectorXd::Constant(1, 2.0);
    for (int i = 0; i < 200; ++i) {
        auto r = env.step(torque);
        CHECK(std::abs(r.observation[1]) <= 8.0);
        if (r.episode_over()) break;
    }
}

// ============================================================================
// Burgers'
// ============================================================================

TEST_CASE("burgers forcing examples") {
    numerics::Grid1D grid(160, 2.0 * kPi);  // 160 nodes so x/l = 0.25 is a node
    Eigen::VectorXd zero = burgers_forcing(grid, {0.0, 0.0});
    CHECK(zero.norm() == 0.0);

    Eigen::VectorXd f = burgers_forcing(grid, {0.075, 0.0});
    CHECK(f[40] == doctest::Approx(0.075).epsilon(1e-12));  // node at x/l = 0.25
    CHECK(std::abs(f[120]) < 1e-24);                        // x/l = 0.75

    Eigen::VectorXd g = burgers_forcing(grid, {0.05, 0.03});
    CHECK(g[80] == doctest::Approx(0.08 * std::exp(-3.75 * 3.75)).epsilon(1e-9));
    // ~7.8e-7 * (a1 + a2) at midpoint
    CHECK(g[80] == doctest::Approx(0.08 * 7.8e-7).epsilon(0.01));
}

TEST_CASE("burgers reference trajectory") {
    CHECK(burgers_reference(0.0) == 0.5);
    CHECK(burgers_reference(kPi / 2.0) == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(burgers_reference(3.0 * kPi / 2.0) == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("burgers rhs on constants and the zero field") {
    numerics::Grid1D grid(150, 2.0 * kPi);
    Eigen::VectorXd c = Eigen::VectorXd::Constant(150, 0.8);
    CHECK(burgers_rhs(c, grid, {0.0, 0.0}).cwiseAbs().maxCoeff() < 1e-11);

    // nonlinear and viscous terms vanish at u = 0: rhs equals the forcing
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(150);
    Eigen::Vector2d a(0.075, 0.075);
    Eigen::VectorXd rhs = burgers_rhs(zero, grid, a);
    Eigen::VectorXd f = burgers_forcing(grid, a);
    CHECK((rhs - f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("burgers rhs matches the manufactured solution") {
    numerics::Grid1D grid(150, 2.0 * kPi);
    const double k = 2.0 * kPi / grid.length;  // one full period
    Eigen::VectorXd u(150), exact(150);
    for (int i = 0; i < 150; ++i) {
        const double x = grid.node(i);
        u[i] = std::sin(k * x);
        exact[i] = -0.5 * std::sin(k * x) * k * std::cos(k * x) -
                   0.01 * k * k * std::sin(k * x);
    }
    Eigen::VectorXd rhs = burgers_rhs(u, grid, {0.0, 0.0});
    // 2nd-order convection error dominates at this resolution
    CHECK((rhs - exact).cwiseAbs().maxCoeff() < 5e-4);
}

TEST_CASE("burgers reward uses the RMS convention") {
    CHECK(burgers_reward(Eigen::VectorXd::Zero(150)) == 0.0);
    CHECK(burgers_reward(Eigen::VectorXd::Constant(150, 0.1)) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    Eigen::VectorXd v = Eigen::VectorXd::Constant(150, 0.07);
    CHECK(burgers_reward(2.0 * v) == doctest::Approx(2.0 * burgers_reward(v)).epsilon(1e-12));
}

TEST_CASE("burgers initial conditions") {
    BurgersEnv env;
    Eigen::VectorXd bump = env.initial_condition(1.0);
    CHECK(bump[75] == doctest::Approx(0.2).epsilon(1e-12));  // peak at x = l/2
    CHECK(bump.maxCoeff() == doctest::Approx(0.2).epsilon(1e-12));
    Eigen::VectorXd wave = env.initial_condition(0.0);
    CHECK(wave[0] == doctest::Approx(0.1).epsilon(1e-12));  // 0.2 (0.5 sin 0 + 0.5)
}

TEST_CASE("burgers observation is the discrepancy to the reference") {
    BurgersEnv env;
    Eigen::VectorXd obs = env.reset(123);
    CHECK((obs - (env.state().array() - 0.5).matrix()).norm() == 0.0);
    auto r = env.step(Eigen::Vector2d(0.0, 0.0));
    const double ref = burgers_reference(env.phase_per_control_step());
    CHECK((r.observation - (env.state().array() - ref).matrix()).norm() == 0.0);
    CHECK(r.reward == doctest::Approx(burgers_reward(r.observation)));
}

TEST_CASE("burgers uncontrolled viscous decay: discrete energy non-increasing") {
    BurgersEnv env;
    env.reset(7);
    double energy = 0.5 * env.state().squaredNorm();
    for (int m = 0; m < 6; ++m) {
        env.step(Eigen::Vector2d(0.0, 0.0));
        const double next = 0.5 * env.state().squaredNorm();
        CHECK(next <= energy + 1e-12);
        energy = next;
    }
}

// ============================================================================
// Kuramoto-Sivashinsky
// ============================================================================

TEST_CASE("ks forcing examples") {
    numerics::Grid1D grid(64, 8.0 * kPi);
    CHECK(ks_forcing(grid, Eigen::Vector4d::Zero()).norm() == 0.0);

    Eigen::VectorXd f = ks_forcing(grid, {0.5, 0.0, 0.0, 0.0});
    CHECK(f[0] == doctest::Approx(0.5 / std::sqrt(2.0 * kPi)).epsilon(1e-9));
    CHECK(f.maxCoeff() == doctest::Approx(f[0]));

    Eigen::Vector4d a1(0.1, -0.2, 0.3, 0.0), a2(0.2, 0.1, -0.4, 0.5);
    Eigen::VectorXd sum = ks_forcing(grid, a1 + a2);
    Eigen::VectorXd parts = ks_forcing(grid, a1) + ks_forcing(grid, a2);
    CHECK((sum - parts).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("ks rhs on the zero state and a manufactured sinusoid") {
    numerics::Grid1D grid(64, 8.0 * kPi);
    CHECK(ks_rhs(Eigen::VectorXd::Zero(64), grid, Eigen::Vector4d::Zero()).norm() == 0.0);

    const double k = 0.25;
    Eigen::VectorXd u(64), exact(64);
    for (int i = 0; i < 64; ++i) {
        const double x = grid.node(i);
        u[i] = std::sin(k * x);
        exact[i] = (k * k - std::pow(k, 4)) * std::sin(k * x) -
                   0.5 * std::sin(k * x) * k * std::cos(k * x);
    }
    Eigen::VectorXd rhs = ks_rhs(u, grid, Eigen::Vector4d::Zero());
    CHECK((rhs - exact).cwiseAbs().maxCoeff() < 2e-3);  // upwind term is 2nd order
}

TEST_CASE("ks reward examples") {
    numerics::Grid1D grid(64, 8.0 * kPi);
    std::vector<Eigen::VectorXd> zeros(5, Eigen::VectorXd::Zero(64));
    CHECK(ks_reward(zeros, zeros, grid, 0.25) == 0.0);

    // frozen u = sin(kx), f = 0: r = -(k^4 + k^2)/2
    const double k = 0.25;
    Eigen::VectorXd u(64);
    for (int i = 0; i < 64; ++i) u[i] = std::sin(k * grid.node(i));
    std::vector<Eigen::VectorXd> us(5, u);
    const double r = ks_reward(us, zeros, grid, 0.25);
    CHECK(r == doctest::Approx(-(std::pow(k, 4) + k * k) / 2.0).epsilon(1e-6));

    // forcing with u f < 0 pointwise increases the reward
    std::vector<Eigen::VectorXd> fs(5, (-0.01 * u.array()).matrix());
    CHECK(ks_reward(us, fs, grid, 0.25) > r);
}

TEST_CASE("ks zero state is a fixed point of the unforced dynamics") {
    KsEnv env;
    env.reset(1);
    env.set_state(Eigen::VectorXd::Zero(64));
    auto r = env.step(Eigen::Vector4d::Zero());
    CHECK(r.observation.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.reward == 0.0);
}

TEST_CASE("ks unforced evolution from the attractor stays bounded") {
    // 10^5 RK4 steps = 400 control steps, the full episode horizon
    KsEnv env;
    env.reset(21);
    for (int m = 0; m < 400; ++m) {
        auto r = env.step(Eigen::Vector4d::Zero());
        CHECK(env.state().cwiseAbs().maxCoeff() < 10.0);
        if (r.episode_over()) break;
    }
}

TEST_CASE("ks reset draws reproducibly from the attractor bank") {
    KsEnv a, b;
    CHECK((a.reset(33) - b.reset(33)).norm() == 0.0);
    // attractor snapshots are developed turbulence, not tiny noise
    CHECK(a.reset(4).cwiseAbs().maxCoeff() > 0.5);
}

// ============================================================================
// Determinism and trajectory dumps
// ============================================================================

TEST_CASE("identical seed and action sequence give bitwise-identical trajectories") {
    for (auto id : {EnvId::cartpole, EnvId::pendulum, EnvId::burgers, EnvId::ks}) {
        auto e1 = make_environment(id);
        auto e2 = make_environment(id);
        Rng action_rng1(99), action_rng2(99);
        auto o1 = e1->reset(5);
        auto o2 = e2->reset(5);
        REQUIRE((o1 - o2).norm() == 0.0);
        const int steps = id == EnvId::ks ? 3 : 10;
        for (int s = 0; s < steps; ++s) {
            Eigen::VectorXd a1 = test_util::random_vector(e1->spec().action_dim, action_rng1);
            Eigen::VectorXd a2 = test_util::random_vector(e2->spec().action_dim, action_rng2);
            auto r1 = e1->step(e1->spec().action_space.clamp(a1));
            auto r2 = e2->step(e2->spec().action_space.clamp(a2));
            REQUIRE((r1.observation - r2.observation).norm() == 0.0);
            REQUIRE(r1.reward == r2.reward);
            if (r1.episode_over()) break;
        }
    }
}

TEST_CASE("trajectory dump round-trips") {
    auto dir = test_util::scratch_dir("trajectory");
    std::vector<TrajectoryRow> rows(3);
    Rng rng(2);
    for (int i = 0; i < 3; ++i) {
        rows[i].t = i * 0.5;
        rows[i].state = test_util::random_vector(4, rng);
        rows[i].action = test_util::random_vector(2, rng);
        rows[i].reward = rng.uniform(-1, 1);
        rows[i].done = i == 2 ? 1.0 : 0.0;
    }
    write_trajectory(dir / "ep.csv", rows);
    auto back = read_trajectory(dir / "ep.csv", 4, 2);
    REQUIRE(back.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(back[i].t == rows[i].t);
        CHECK((back[i].state - rows[i].state).norm() == 0.0);
        CHECK((back[i].action - rows[i].action).norm() == 0.0);
        CHECK(back[i].reward == rows[i].reward);
        CHECK(back[i].done == rows[i].done);
    }
}
