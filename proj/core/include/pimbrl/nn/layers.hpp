#pragma once

#include <string>

#include "pimbrl/nn/tape.hpp"
#include "pimbrl/util/rng.hpp"

namespace pimbrl::nn {

/// Fully connected layer: activation(W x + b). Parameters live in the
/// owning ParameterSet under "<prefix>.W" / "<prefix>.b".
struct DenseLayer {
    int in = 0, out = 0;
    Activation act = Activation::Linear;
    int w = -1, b = -1;

    /// Uniform fan-in initialization, optionally scaled down (used for the
    /// near-zero output heads).
    void init(ParameterSet& ps, const std::string& prefix, int in_dim, int out_dim,
              Activation activation, Rng& rng, double scale = 1.0);

    Var forward(Tape& t, ParameterSet& ps, Var x) const;
    Matrix forward(const ParameterSet& ps, const Matrix& x) const;
};

/// 1-D convolution with circular padding (periodic boundary encoding).
struct Conv1dCircularLayer {
    int in_channels = 0, out_channels = 0, kernel_size = 0, stride = 1, n_nodes = 0;
    Activation act = Activation::Linear;
    int w = -1, b = -1;

    int out_nodes() const { return n_nodes / stride; }
    int out_rows() const { return out_channels * out_nodes(); }

    void init(ParameterSet& ps, const std::string& prefix, int in_ch, int out_ch,
              int ksize, int stride_, int nodes, Activation activation, Rng& rng);

    Var forward(Tape& t, ParameterSet& ps, Var x) const;
    Matrix forward(const ParameterSet& ps, const Matrix& x) const;
};

/// Standard LSTM cell (input/forget/output gates, tanh candidate). Gate
/// pre-activations are ordered [i; f; g; o] in the stacked weight rows.
struct LstmCell {
    int input = 0, hidden = 0;
    int wx = -1, wh = -1, b = -1;

    void init(ParameterSet& ps, const std::string& prefix, int input_dim, int hidden_dim,
              Rng& rng);

    struct State {
        Var h, c;
    };
    State forward(Tape& t, ParameterSet& ps, Var x, State prev) const;

    struct MatrixState {
        Matrix h, c;
    };
    MatrixState forward(const ParameterSet& ps, const Matrix& x,
                        const MatrixState& prev) const;
};

}  // namespace pimbrl::nn
