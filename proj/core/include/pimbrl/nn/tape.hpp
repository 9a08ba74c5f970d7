#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pimbrl/nn/parameters.hpp"
#include "pimbrl/numerics/stencils.hpp"

namespace pimbrl::nn {

enum class Activation { Linear, Tanh, Relu, Sigmoid };

/// Norm applied per batch column by the loss reductions: plain Euclidean for
/// low-dimensional ODE states, RMS over grid nodes (grid-resolution
/// independent discrete L2) for field states.
enum class NormKind { Euclidean, GridRms };

/// Handle to a tape node. Matrices are laid out feature-rows x batch-columns.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Records one forward pass at matrix-op granularity; replaying it backward
/// accumulates exact reverse-mode gradients into the grad buffers of every
/// ParameterSet touched by the graph. One tape per forward pass; not
/// reusable across passes.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // --- leaves ---
    Var input(Matrix value);                       // constant, no gradient
    Var param(ParameterSet& set, int entry_idx);   // trainable leaf

    const Matrix& value(Var v) const;

    // --- linear algebra ---
    Var matmul(Var a, Var b);
    Var add_col(Var x, Var bias);  // bias: (n x 1), broadcast over columns
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var hadamard(Var a, Var b);
    Var scale(Var x, double s);
    Var add_scalar(Var x, double s);

    // --- elementwise nonlinearities ---
    Var activation(Var x, Activation act);
    Var tanh(Var x) { return activation(x, Activation::Tanh); }
    Var sigmoid(Var x) { return activation(x, Activation::Sigmoid); }
    Var relu(Var x) { return activation(x, Activation::Relu); }
    Var sin(Var x);
    Var cos(Var x);
    Var square(Var x);
    Var reciprocal(Var x);
    /// Elementwise wrap into [-pi, pi); derivative 1 almost everywhere.
    Var wrap_angle(Var x);

    // --- shape ---
    Var concat_rows(std::span<const Var> parts);
    Var slice_rows(Var x, int start, int count);

    // --- grid operators (each column is a periodic field) ---
    Var stencil(Var x, numerics::StencilKind kind, double spacing);
    Var upwind_convection(Var x, double spacing);

    /// 1-D convolution with circular padding. Input rows are channel-major
    /// blocks (in_ch blocks of n nodes); output likewise with n/stride nodes.
    Var conv1d_circular(Var x, Var weights, Var bias, int in_channels, int out_channels,
                        int kernel_size, int stride, int n_nodes);

    // --- reductions to 1x1 scalars ---
    Var mean_all(Var x);
    Var sum_all(Var x);
    /// Batch mean of the per-column norm.
    Var column_norm_mean(Var x, NormKind kind);

    /// Reverse pass from a scalar output (seeds with `seed`), or from an
    /// explicit output gradient. Gradients accumulate into the grad buffers
    /// of the parameter sets registered via param(). Throws std::logic_error
    /// when no forward pass was recorded.
    void backward(Var output, double seed = 1.0);
    void backward(Var output, const Matrix& output_grad);

    int node_count() const { return static_cast<int>(nodes_.size()); }

private:
    struct Node {
        Matrix value;
        Matrix grad;  // allocated lazily during backward
        bool needs_grad = false;
        ParameterSet* param_set = nullptr;  // set for parameter leaves
        int param_idx = -1;
        std::function<void(Tape&, Node&)> pull;  // propagates grad to parents
    };

    Var push(Matrix value, bool needs_grad, std::function<void(Tape&, Node&)> pull);
    Node& node(Var v);
    const Node& node(Var v) const;
    Matrix& grad_buffer(int id);

    std::vector<Node> nodes_;
};

}  // namespace pimbrl::nn
