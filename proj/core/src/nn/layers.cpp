#include "pimbrl/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace pimbrl::nn {

namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
    for (int j = 0; j < m.cols(); ++j) {
        for (int i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
    }
}

Matrix apply_activation(Matrix x, Activation act) {
    switch (act) {
        case Activation::Linear: return x;
        case Activation::Tanh: return x.array().tanh();
        case Activation::Sigmoid: return (1.0 / (1.0 + (-x.array()).exp())).matrix();
        case Activation::Relu: return x.cwiseMax(0.0);
    }
    throw std::invalid_argument("unknown activation");
}

}  // namespace

void DenseLayer::init(ParameterSet& ps, const std::string& prefix, int in_dim,
                      int out_dim, Activation activation, Rng& rng, double scale) {
    in = in_dim;
    out = out_dim;
    act = activation;
    w = ps.add(prefix + ".W", out_dim, in_dim);
    b = ps.add(prefix + ".b", out_dim, 1);
    const double bound = scale / std::sqrt(static_cast<double>(in_dim));
    fill_uniform(ps.value(w), bound, rng);
    fill_uniform(ps.value(b), bound, rng);
}

Var DenseLayer::forward(Tape& t, ParameterSet& ps, Var x) const {
    if (t.value(x).rows() != in) throw std::invalid_argument("DenseLayer: input width mismatch");
    Var y = t.add_col(t.matmul(t.param(ps, w), x), t.param(ps, b));
    return t.activation(y, act);
}

Matrix DenseLayer::forward(const ParameterSet& ps, const Matrix& x) const {
    if (x.rows() != in) throw std::invalid_argument("DenseLayer: input width mismatch");
    Matrix y = (ps.value(w) * x).colwise() + ps.value(b).col(0);
    return apply_activation(std::move(y), act);
}

void Conv1dCircularLayer::init(ParameterSet& ps, const std::string& prefix, int in_ch,
                               int out_ch, int ksize, int stride_, int nodes,
                               Activation activation, Rng& rng) {
    if (nodes % stride_ != 0) {
        throw std::invalid_argument("Conv1dCircularLayer: stride must divide node count");
    }
    in_channels = in_ch;
    out_channels = out_ch;
    kernel_size = ksize;
    stride = stride_;
    n_nodes = nodes;
    act = activation;
    w = ps.add(prefix + ".W", out_ch, in_ch * ksize);
    b = ps.add(prefix + ".b", out_ch, 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch * ksize));
    fill_uniform(ps.value(w), bound, rng);
    fill_uniform(ps.value(b), bound, rng);
}

Var Conv1dCircularLayer::forward(Tape& t, ParameterSet& ps, Var x) const {
    Var y = t.conv1d_circular(x, t.param(ps, w), t.param(ps, b), in_channels,
                              out_channels, kernel_size, stride, n_nodes);
    return t.activation(y, act);
}

Matrix Conv1dCircularLayer::forward(const ParameterSet& ps, const Matrix& x) const {
    if (x.rows() != in_channels * n_nodes) {
        throw std::invalid_argument("Conv1dCircularLayer: input rows mismatch");
    }
    const Matrix& W = ps.value(w);
    const Matrix& B = ps.value(b);
    const int n_out = out_nodes();
    const int half = kernel_size / 2;
    Matrix y(out_channels * n_out, x.cols());
    for (int col = 0; col < x.cols(); ++col) {
        for (int oc = 0; oc < out_channels; ++oc) {
            for (int p = 0; p < n_out; ++p) {
                const int center = p * stride;
                double acc = B(oc, 0);
                for (int ic = 0; ic < in_channels; ++ic) {
                    for (int k = 0; k < kernel_size; ++k) {
                        int pos = (center + k - half) % n_nodes;
                        if (pos < 0) pos += n_nodes;
                        acc += W(oc, ic * kernel_size + k) * x(ic * n_nodes + pos, col);
                    }
                }
                y(oc * n_out + p, col) = acc;
            }
        }
    }
    return apply_activation(std::move(y), act);
}

void LstmCell::init(ParameterSet& ps, const std::string& prefix, int input_dim,
                    int hidden_dim, Rng& rng) {
    input = input_dim;
    hidden = hidden_dim;
    wx = ps.add(prefix + ".Wx", 4 * hidden_dim, input_dim);
    wh = ps.add(prefix + ".Wh", 4 * hidden_dim, hidden_dim);
    b = ps.add(prefix + ".b", 4 * hidden_dim, 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    fill_uniform(ps.value(wx), bound, rng);
    fill_uniform(ps.value(wh), bound, rng);
    // forget-gate bias starts at 1 so early training favors remembering
    ps.value(b).middleRows(hidden_dim, hidden_dim).setOnes();
}

LstmCell::State LstmCell::forward(Tape& t, ParameterSet& ps, Var x, State prev) const {
    if (t.value(x).rows() != input || t.value(prev.h).rows() != hidden ||
        t.value(prev.c).rows() != hidden) {
        throw std::invalid_argument("LstmCell: width mismatch");
    }
    Var pre = t.add_col(
        t.add(t.matmul(t.param(ps, wx), x), t.matmul(t.param(ps, wh), prev.h)),
        t.param(ps, b));
    Var gi = t.sigmoid(t.slice_rows(pre, 0, hidden));
    Var gf = t.sigmoid(t.slice_rows(pre, hidden, hidden));
    Var gg = t.tanh(t.slice_rows(pre, 2 * hidden, hidden));
    Var go = t.sigmoid(t.slice_rows(pre, 3 * hidden, hidden));
    Var c  = t.add(t.hadamard(gf, prev.c), t.hadamard(gi, gg));
    Var h  = t.hadamard(go, t.tanh(c));
    return {h, c};
}

LstmCell::MatrixState LstmCell::forward(const ParameterSet& ps, const Matrix& x,
                                        const MatrixState& prev) const {
    if (x.rows() != input || prev.h.rows() != hidden || prev.c.rows() != hidden) {
        throw std::invalid_argument("LstmCell: width mismatch");
    }
    Matrix pre = ((ps.value(wx) * x + ps.value(wh) * prev.h).colwise() +
                  ps.value(b).col(0));
    auto sig = [](const Matrix& m) -> Matrix {
        return (1.0 / (1.0 + (-m.array()).exp())).matrix();
    };
    Matrix gi = sig(pre.topRows(hidden));
    Matrix gf = sig(pre.middleRows(hidden, hidden));
    Matrix gg = pre.middleRows(2 * hidden, hidden).array().tanh();
    Matrix go = sig(pre.middleRows(3 * hidden, hidden));
    MatrixState out;
    out.c = gf.cwiseProduct(prev.c) + gi.cwiseProduct(gg);
    out.h = go.cwiseProduct(out.c.array().tanh().matrix());
    return out;
}

}  // namespace pimbrl::nn
