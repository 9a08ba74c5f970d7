#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gradient_check.hpp"
#include "pimbrl/nn/layers.hpp"
#include "pimbrl/nn/parameters.hpp"
#include "pimbrl/nn/tape.hpp"
#include "test_util.hpp"

using namespace pimbrl;
using namespace pimbrl::nn;

// ============================================================================
// Dense layer
// ============================================================================

TEST_CASE("dense layer with identity weights passes the input through") {
    ParameterSet ps;
    Rng rng(1);
    DenseLayer layer;
    layer.init(ps, "l", 3, 3, Activation::Linear, rng);
    ps.value(layer.w) = Matrix::Identity(3, 3);
    ps.value(layer.b).setZero();

    Matrix x(3, 2);
    x << 1, -2, 0.5, 3, -1, 0.25;
    CHECK((layer.forward(ps, x) - x).cwiseAbs().maxCoeff() == 0.0);

    Tape t;
    Var y = layer.forward(t, ps, t.input(x));
    CHECK((t.value(y) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense layer with zero weights and tanh yields zeros") {
    ParameterSet ps;
    Rng rng(1);
    DenseLayer layer;
    layer.init(ps, "l", 4, 2, Activation::Tanh, rng);
    ps.value(layer.w).setZero();
    ps.value(layer.b).setZero();
    Matrix x = Matrix::Random(4, 3);
    CHECK(layer.forward(ps, x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("1x1 relu layer clips negative pre-activations") {
    ParameterSet ps;
    Rng rng(1);
    DenseLayer layer;
    layer.init(ps, "l", 1, 1, Activation::Relu, rng);
    ps.value(layer.w)(0, 0) = 2.0;
    ps.value(layer.b)(0, 0) = 1.0;
    Matrix x(1, 1);
    x(0, 0) = -3.0;  // relu(2 * -3 + 1) = relu(-5) = 0
    CHECK(layer.forward(ps, x)(0, 0) == 0.0);
}

TEST_CASE("dense layer rejects mismatched input widths") {
    ParameterSet ps;
    Rng rng(1);
    DenseLayer layer;
    layer.init(ps, "l", 4, 2, Activation::Linear, rng);
    CHECK_THROWS_AS(layer.forward(ps, Matrix::Zero(3, 1)), std::invalid_argument);
}

// ============================================================================
// LSTM cell
// ============================================================================

TEST_CASE("lstm cell with all-zero parameters maps zero cell to zero") {
    ParameterSet ps;
    Rng rng(1);
    LstmCell cell;
    cell.init(ps, "lstm", 3, 4, rng);
    ps.value(cell.wx).setZero();
    ps.value(cell.wh).setZero();
    ps.value(cell.b).setZero();

    LstmCell::MatrixState prev{Matrix::Zero(4, 2), Matrix::Zero(4, 2)};
    Matrix x = Matrix::Random(3, 2);
    auto out = cell.forward(ps, x, prev);
    CHECK(out.h.cwiseAbs().maxCoeff() == 0.0);  // o * tanh(c') = 0.5 * 0
    CHECK(out.c.cwiseAbs().maxCoeff() == 0.0);  // f*0 + i*tanh(0)
}

TEST_CASE("saturated forget gate makes the cell pure memory") {
    ParameterSet ps;
    Rng rng(1);
    LstmCell cell;
    cell.init(ps, "lstm", 2, 3, rng);
    ps.value(cell.wx).setZero();
    ps.value(cell.wh).setZero();
    ps.value(cell.b).setZero();
    ps.value(cell.b).middleRows(3, 3).setConstant(50.0);  // forget gate -> 1

    LstmCell::MatrixState prev{Matrix::Zero(3, 1), Matrix::Zero(3, 1)};
    prev.c << 0.7, -0.3, 1.2;
    auto out = cell.forward(ps, Matrix::Zero(2, 1), prev);
    CHECK((out.c - prev.c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lstm hidden state is bounded by (-1, 1)") {
    ParameterSet ps;
    Rng rng(5);
    LstmCell cell;
    cell.init(ps, "lstm", 4, 6, rng);
    LstmCell::MatrixState s{Matrix::Zero(6, 3), Matrix::Zero(6, 3)};
    Rng data(9);
    for (int step = 0; step < 20; ++step) {
        Matrix x(4, 3);
        for (int j = 0; j < 3; ++j) x.col(j) = test_util::random_vector(4, data, -3, 3);
        s = cell.forward(ps, x, s);
        CHECK(s.h.cwiseAbs().maxCoeff() < 1.0);
    }
}

TEST_CASE("tape and inference lstm paths agree") {
    ParameterSet ps;
    Rng rng(6);
    LstmCell cell;
    cell.init(ps, "lstm", 3, 5, rng);
    Matrix x = Matrix::Random(3, 4);
    LstmCell::MatrixState prev{Matrix::Random(5, 4), Matrix::Random(5, 4)};

    auto fast = cell.forward(ps, x, prev);
    Tape t;
    auto taped = cell.forward(t, ps, t.input(x), {t.input(prev.h), t.input(prev.c)});
    CHECK((t.value(taped.h) - fast.h).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((t.value(taped.c) - fast.c).cwiseAbs().maxCoeff() < 1e-14);
}

// ============================================================================
// Circular convolution
// ============================================================================

TEST_CASE("conv encoder with zero kernels produces a zero latent") {
    ParameterSet ps;
    Rng rng(2);
    Conv1dCircularLayer conv;
    conv.init(ps, "c", 1, 3, 5, 1, 12, Activation::Linear, rng);
    ps.value(conv.w).setZero();
    ps.value(conv.b).setZero();
    Matrix field = Matrix::Random(12, 2);
    CHECK(conv.forward(ps, field).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("size-1 identity kernel reproduces the field") {
    ParameterSet ps;
    Rng rng(2);
    Conv1dCircularLayer conv;
    conv.init(ps, "c", 1, 1, 1, 1, 10, Activation::Linear, rng);
    ps.value(conv.w)(0, 0) = 1.0;
    ps.value(conv.b).setZero();
    Matrix field = Matrix::Random(10, 3);
    CHECK((conv.forward(ps, field) - field).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("circular shift of the input shifts each feature map") {
    ParameterSet ps;
    Rng rng(3);
    const int n = 16;
    Conv1dCircularLayer conv;
    conv.init(ps, "c", 1, 4, 5, 1, n, Activation::Tanh, rng);

    Rng data(4);
    Eigen::VectorXd field = test_util::random_vector(n, data);
    Matrix x(n, 1);
    x.col(0) = field;
    Matrix y = conv.forward(ps, x);

    const int s = 5;
    Matrix xs(n, 1);
    for (int i = 0; i < n; ++i) xs((i + s) % n, 0) = field[i];
    Matrix ys = conv.forward(ps, xs);

    for (int ch = 0; ch < 4; ++ch) {
        for (int i = 0; i < n; ++i) {
            CHECK(ys(ch * n + (i + s) % n, 0) ==
                  doctest::Approx(y(ch * n + i, 0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("tape and inference conv paths agree with stride") {
    ParameterSet ps;
    Rng rng(8);
    Conv1dCircularLayer conv;
    conv.init(ps, "c", 2, 3, 5, 2, 12, Activation::Relu, rng);
    Matrix x = Matrix::Random(24, 3);
    Matrix fast = conv.forward(ps, x);
    Tape t;
    Var taped = conv.forward(t, ps, t.input(x));
    CHECK((t.value(taped) - fast).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(fast.rows() == 3 * 6);
}

// ============================================================================
// Reverse-mode gradients
// ============================================================================

TEST_CASE("loss = w^2 at w = 3 has gradient 6") {
    ParameterSet ps;
    const int w = ps.add("w", 1, 1);
    ps.value(w)(0, 0) = 3.0;
    Tape t;
    Var loss = t.sum_all(t.square(t.param(ps, w)));
    t.backward(loss);
    CHECK(ps.entry(w).grad(0, 0) == 6.0);
}

TEST_CASE("parameters off the path get exactly zero gradient") {
    ParameterSet ps;
    const int w = ps.add("w", 1, 1);
    const int unused = ps.add("unused", 2, 2);
    ps.value(w)(0, 0) = 2.0;
    ps.value(unused).setConstant(5.0);
    Tape t;
    Var loss = t.sum_all(t.square(t.param(ps, w)));
    t.backward(loss);
    CHECK(ps.entry(unused).grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward without a recorded forward pass is a usage error") {
    Tape t;
    CHECK_THROWS_AS(t.backward(Var{0}), std::logic_error);
}

TEST_CASE("composite network gradients match central finite differences") {
    Rng rng(42);
    for (int trial = 0; trial < 4; ++trial) {
        ParameterSet ps;
        Rng init(100 + trial);
        DenseLayer l1, l2;
        l1.init(ps, "l1", 5, 7, Activation::Tanh, init);
        l2.init(ps, "l2", 7, 2, Activation::Linear, init);
        Matrix x(5, 3);
        for (int j = 0; j < 3; ++j) x.col(j) = test_util::random_vector(5, rng);
        auto build = [&](Tape& t, ParameterSet& p) {
            Var h = l1.forward(t, p, t.input(x));
            Var y = l2.forward(t, p, h);
            return t.mean_all(t.square(y));
        };
        CHECK(test_util::gradient_check(ps, build) < 1e-6);
    }
}

TEST_CASE("grid-operator gradients match finite differences") {
    Rng rng(14);
    ParameterSet ps;
    const int field = ps.add("field", 12, 2);
    for (int j = 0; j < 2; ++j) {
        // keep nodes away from zero so the upwind sign mask is stable
        for (int i = 0; i < 12; ++i) {
            double v = rng.uniform(0.2, 1.0);
            ps.value(field)(i, j) = rng.uniform() < 0.5 ? -v : v;
        }
    }
    const double spacing = 0.7;
    auto build = [&](Tape& t, ParameterSet& p) {
        Var u = t.param(p, field);
        Var a = t.stencil(u, numerics::StencilKind::Central6D2, spacing);
        Var b = t.stencil(u, numerics::StencilKind::Central6D4, spacing);
        Var c = t.stencil(u, numerics::StencilKind::Central6D1, spacing);
        Var d = t.upwind_convection(u, spacing);
        Var mix = t.add(t.add(a, b), t.add(c, d));
        return t.column_norm_mean(mix, NormKind::GridRms);
    };
    CHECK(test_util::gradient_check(ps, build) < 1e-6);
}

TEST_CASE("trig and reciprocal gradients match finite differences") {
    ParameterSet ps;
    Rng rng(21);
    const int w = ps.add("w", 4, 2);
    for (int j = 0; j < 2; ++j) ps.value(w).col(j) = test_util::random_vector(4, rng, 0.5, 1.5);
    auto build = [&](Tape& t, ParameterSet& p) {
        Var x = t.param(p, w);
        Var y = t.hadamard(t.sin(x), t.cos(t.scale(x, 0.5)));
        Var z = t.add(y, t.reciprocal(t.add_scalar(t.square(x), 1.0)));
        return t.mean_all(z);
    };
    CHECK(test_util::gradient_check(ps, build) < 1e-6);
}

// ============================================================================
// Adam
// ============================================================================

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
    ParameterSet ps;
    const int w = ps.add("w", 3, 3);
    ps.value(w).setConstant(1.5);
    ps.zero_grad();
    adam_update(ps, 1e-3);
    CHECK((ps.value(w).array() == 1.5).all());
}

TEST_CASE("first adam step with unit gradient moves by about -lr") {
    ParameterSet ps;
    const int w = ps.add("w", 1, 1);
    ps.value(w)(0, 0) = 0.3;
    ps.entry(w).grad(0, 0) = 1.0;
    adam_update(ps, 1e-3);
    // bias correction makes m_hat = v_hat = 1 on the first step
    CHECK(ps.value(w)(0, 0) == doctest::Approx(0.3 - 1e-3).epsilon(1e-7));
    CHECK(ps.step_count() == 1);
}

TEST_CASE("adam moves each parameter against its gradient sign") {
    ParameterSet ps;
    Rng rng(3);
    const int w = ps.add("w", 6, 1);
    ps.value(w) = test_util::random_vector(6, rng);
    Matrix before = ps.value(w);
    for (int i = 0; i < 6; ++i) ps.entry(w).grad(i, 0) = (i % 2 == 0) ? 0.7 : -1.3;
    adam_update(ps, 1e-2);
    for (int i = 0; i < 6; ++i) {
        const double moved = ps.value(w)(i, 0) - before(i, 0);
        CHECK(moved * ps.entry(w).grad(i, 0) < 0.0);
    }
}

TEST_CASE("non-finite updates are rejected") {
    ParameterSet ps;
    const int w = ps.add("w", 1, 1);
    ps.entry(w).grad(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(adam_update(ps, 1e-3), std::runtime_error);
}

// ============================================================================
// Checkpoints
// ============================================================================

TEST_CASE("checkpoint round-trips values, moments, and step counters") {
    auto dir = test_util::scratch_dir("checkpoint");
    ParameterSet a;
    Rng rng(17);
    DenseLayer layer;
    layer.init(a, "l", 4, 3, Activation::Tanh, rng);
    a.entry(layer.w).grad.setConstant(0.5);
    adam_update(a, 1e-3);
    a.entry(layer.w).grad.setConstant(0.5);
    adam_update(a, 1e-3);

    save_checkpoint(dir / "ck.bin", {{"net", &a}});

    ParameterSet b;
    Rng rng2(99);
    DenseLayer layer2;
    layer2.init(b, "l", 4, 3, Activation::Tanh, rng2);
    load_checkpoint(dir / "ck.bin", {{"net", &b}});

    CHECK(b.step_count() == 2);
    CHECK((b.value(layer2.w) - a.value(layer.w)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b.entry(layer2.w).m - a.entry(layer.w).m).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b.entry(layer2.w).v - a.entry(layer.w).v).cwiseAbs().maxCoeff() == 0.0);

    // identical bytes after re-saving the loaded set
    save_checkpoint(dir / "ck2.bin", {{"net", &b}});
    std::ifstream f1(dir / "ck.bin", std::ios::binary), f2(dir / "ck2.bin", std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("checkpoint loading validates names and shapes") {
    auto dir = test_util::scratch_dir("checkpoint_bad");
    ParameterSet a;
    a.add("w", 2, 2);
    save_checkpoint(dir / "ck.bin", {{"net", &a}});
    ParameterSet wrong;
    wrong.add("w", 3, 2);
    CHECK_THROWS_AS(load_checkpoint(dir / "ck.bin", {{"net", &wrong}}), std::runtime_error);
}
