#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pimbrl/numerics/convergence.hpp"
#include "pimbrl/numerics/grid.hpp"
#include "pimbrl/numerics/integrators.hpp"
#include "pimbrl/numerics/stencils.hpp"
#include "pimbrl/util/errors.hpp"
#include "test_util.hpp"

using namespace pimbrl;
using namespace pimbrl::numerics;
using test_util::circshift;
using test_util::max_abs_diff;
using test_util::sinusoid;

namespace {
constexpr double kL = 8.0 * 3.14159265358979323846;
const std::vector<StencilKind> kAllKinds = {
    StencilKind::Upwind2Convection, StencilKind::Central4D2, StencilKind::Central6D2,
    StencilKind::Central6D4, StencilKind::Central6D1};
}  // namespace

TEST_CASE("grid invariants") {
    Grid1D g(64, kL);
    CHECK(g.spacing == doctest::Approx(kL / 64));
    CHECK_THROWS_AS(Grid1D(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid1D(10, -1.0), std::invalid_argument);
}

TEST_CASE("derivatives of a constant field vanish") {
    Grid1D g(64, kL);
    std::vector<double> u(64, 3.7);
    for (StencilKind kind : kAllKinds) {
        auto out = apply_stencil(u, g, kind);
        for (double v : out) CHECK(std::abs(v) < 1e-11);
    }
}

TEST_CASE("field length mismatch is an argument error") {
    Grid1D g(64, kL);
    std::vector<double> u(32, 0.0);
    CHECK_THROWS_AS(apply_stencil(u, g, StencilKind::Central4D2), std::invalid_argument);
}

TEST_CASE("manufactured sinusoid: second derivative") {
    // u = sin(kx) on l = 8*pi, k = 0.25  =>  u_xx = -k^2 sin(kx)
    const double k = 0.25;
    Grid1D g(64, kL);
    auto u = sinusoid(64, kL, k);
    auto got = apply_stencil(u, g, StencilKind::Central6D2);
    std::vector<double> exact(64);
    for (int i = 0; i < 64; ++i) exact[i] = -k * k * std::sin(k * g.node(i));
    CHECK(max_abs_diff(got, exact) < 1e-8);  // 6th-order error at this resolution
}

TEST_CASE("manufactured sinusoid: fourth derivative") {
    const double k = 0.25;
    Grid1D g(64, kL);
    auto u = sinusoid(64, kL, k);
    auto got = apply_stencil(u, g, StencilKind::Central6D4);
    std::vector<double> exact(64);
    for (int i = 0; i < 64; ++i) exact[i] = std::pow(k, 4) * std::sin(k * g.node(i));
    CHECK(max_abs_diff(got, exact) < 1e-8);
}

TEST_CASE("linearity of the linear kinds to machine precision") {
    Rng rng(7);
    Grid1D g(48, kL);
    std::vector<double> u(48), v(48);
    for (int i = 0; i < 48; ++i) {
        u[i] = rng.uniform(-1, 1);
        v[i] = rng.uniform(-1, 1);
    }
    const double a = 1.7, b = -0.4;
    for (StencilKind kind : kAllKinds) {
        if (!stencil_is_linear(kind)) continue;
        std::vector<double> mix(48);
        for (int i = 0; i < 48; ++i) mix[i] = a * u[i] + b * v[i];
        auto lhs = apply_stencil(mix, g, kind);
        auto lu = apply_stencil(u, g, kind);
        auto lv = apply_stencil(v, g, kind);
        for (int i = 0; i < 48; ++i) {
            CHECK(lhs[i] == doctest::Approx(a * lu[i] + b * lv[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("periodicity: circular shift equivariance") {
    Rng rng(11);
    Grid1D g(40, kL);
    std::vector<double> u(40);
    for (auto& x : u) x = rng.uniform(-1, 1);
    for (StencilKind kind : kAllKinds) {
        for (int s : {1, 7, 39}) {
            auto shifted_then_op = apply_stencil(circshift(u, s), g, kind);
            auto op_then_shifted = circshift(apply_stencil(u, g, kind), s);
            CHECK(max_abs_diff(shifted_then_op, op_then_shifted) < 1e-12);
        }
    }
}

TEST_CASE("convection grid sum converges to zero with refinement") {
    // periodic integral of u u_x vanishes; the upwind discretization's
    // node-sum times spacing should shrink as the grid refines (an
    // asymmetric field is used because pure sinusoids cancel exactly)
    auto weighted_sum = [&](int n) {
        Grid1D g(n, kL);
        std::vector<double> u(n);
        for (int i = 0; i < n; ++i) {
            const double x = g.node(i);
            u[i] = 0.3 + std::sin(0.25 * x) + 0.4 * std::cos(0.5 * x);
        }
        auto conv = apply_stencil(u, g, StencilKind::Upwind2Convection);
        double s = 0.0;
        for (double v : conv) s += v;
        return std::abs(s * g.spacing);
    };
    const double coarse = weighted_sum(32);
    const double mid = weighted_sum(64);
    const double fine = weighted_sum(128);
    CHECK(mid < coarse);
    CHECK(fine < mid);
    CHECK(fine < 1e-3);
}

TEST_CASE("upwind tie rule uses the centered average") {
    // at u_i = 0 the convection output is zero regardless; the one-sided
    // derivative helper must average both biased differences
    Grid1D g(8, 8.0);
    std::vector<double> u = {0.0, 1.0, 2.0, 1.0, 0.0, -1.0, -2.0, -1.0};
    std::vector<double> d(8);
    upwind_one_sided_derivative(u, d, g.spacing);
    // node 0: backward = (0 - 4*(-1) + (-2))/2 = 1, forward = (0 + 4*1 - 2)/2 = 1
    CHECK(d[0] == doctest::Approx(1.0));
    auto conv = apply_stencil(u, g, StencilKind::Upwind2Convection);
    CHECK(conv[0] == 0.0);
}

TEST_CASE("euler_step examples") {
    RhsFn decay = [](std::span<const double> u, std::span<double> out) { out[0] = -u[0]; };
    RhsFn zero = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };

    std::vector<double> u{1.0};
    CHECK(euler_step(zero, u, 0.3)[0] == 1.0);
    CHECK(euler_step(decay, u, 0.1)[0] == doctest::Approx(0.9).epsilon(1e-15));

    // two steps of dt = 0.05: (1 - 0.05)^2 = 0.9025
    auto u1 = euler_step(decay, u, 0.05);
    auto u2 = euler_step(decay, u1, 0.05);
    CHECK(u2[0] == doctest::Approx(0.9025).epsilon(1e-15));

    CHECK_THROWS_AS(euler_step(decay, u, -0.1), std::invalid_argument);
}

TEST_CASE("euler_step reports blowup with the step index") {
    RhsFn bad = [](std::span<const double>, std::span<double> out) {
        out[0] = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<double> u{1.0};
    try {
        euler_step(bad, u, 0.1, 42);
        FAIL("expected NumericBlowupError");
    } catch (const NumericBlowupError& e) {
        CHECK(e.step_index() == 42);
    }
}

TEST_CASE("rk4_step examples") {
    RhsFn decay = [](std::span<const double> u, std::span<double> out) { out[0] = -u[0]; };
    RhsFn zero = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    std::vector<double> u{1.0};
    CHECK(rk4_step(zero, u, 0.1)[0] == 1.0);
    // closed form: 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1
    CHECK(rk4_step(decay, u, 0.1)[0] == doctest::Approx(0.90483750).epsilon(1e-12));
}

TEST_CASE("measured convergence orders sit at the nominal values") {
    const std::vector<int> res = {32, 48, 64, 96};
    CHECK(estimate_stencil_order(StencilKind::Upwind2Convection, 0.25, kL, res) ==
          doctest::Approx(2.0).epsilon(0.15));
    CHECK(estimate_stencil_order(StencilKind::Central4D2, 0.25, kL, res) ==
          doctest::Approx(4.0).epsilon(0.075));
    CHECK(estimate_stencil_order(StencilKind::Central6D2, 0.25, kL, res) ==
          doctest::Approx(6.0).epsilon(0.05));
    CHECK(estimate_stencil_order(StencilKind::Central6D4, 0.25, kL, res) ==
          doctest::Approx(6.0).epsilon(0.05));
    const std::vector<int> steps = {8, 16, 32};
    CHECK(estimate_rk4_order(steps) == doctest::Approx(4.0).epsilon(0.075));
}

TEST_CASE("estimate_order rejects errors at the floating-point floor") {
    auto error_at = [](int) { return 1e-16; };
    const std::vector<int> res = {8, 16, 32};
    CHECK_THROWS_AS(estimate_order(error_at, res), std::runtime_error);
}
