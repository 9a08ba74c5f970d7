#include "pimbrl/nn/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace pimbrl::nn {

namespace {

inline int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

Var Tape::push(Matrix value, bool needs_grad, std::function<void(Tape&, Node&)> pull) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.pull = std::move(pull);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
        throw std::logic_error("Tape: invalid Var handle");
    }
    return nodes_[static_cast<std::size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
        throw std::logic_error("Tape: invalid Var handle");
    }
    return nodes_[static_cast<std::size_t>(v.id)];
}

Matrix& Tape::grad_buffer(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

Var Tape::input(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::param(ParameterSet& set, int entry_idx) {
    Var v = push(set.entry(entry_idx).value, true, nullptr);
    Node& n = node(v);
    n.param_set = &set;
    n.param_idx = entry_idx;
    return v;
}

Var Tape::matmul(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.cols() != B.rows()) throw std::invalid_argument("Tape::matmul: shape mismatch");
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    const int ia = a.id, ib = b.id;
    return push(A * B, ng, [ia, ib](Tape& t, Node& self) {
        if (t.nodes_[ia].needs_grad) {
            t.grad_buffer(ia).noalias() += self.grad * t.nodes_[ib].value.transpose();
        }
        if (t.nodes_[ib].needs_grad) {
            t.grad_buffer(ib).noalias() += t.nodes_[ia].value.transpose() * self.grad;
        }
    });
}

Var Tape::add_col(Var x, Var bias) {
    const Matrix& X = value(x);
    const Matrix& B = value(bias);
    if (B.cols() != 1 || B.rows() != X.rows()) {
        throw std::invalid_argument("Tape::add_col: bias must be a matching column");
    }
    Matrix y = X.colwise() + B.col(0);
    const bool ng = node(x).needs_grad || node(bias).needs_grad;
    const int ix = x.id, ib = bias.id;
    return push(std::move(y), ng, [ix, ib](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) t.grad_buffer(ix) += self.grad;
        if (t.nodes_[ib].needs_grad) t.grad_buffer(ib) += self.grad.rowwise().sum();
    });
}

Var Tape::add(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw std::invalid_argument("Tape::add: shape mismatch");
    }
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    const int ia = a.id, ib = b.id;
    return push(A + B, ng, [ia, ib](Tape& t, Node& self) {
        if (t.nodes_[ia].needs_grad) t.grad_buffer(ia) += self.grad;
        if (t.nodes_[ib].needs_grad) t.grad_buffer(ib) += self.grad;
    });
}

Var Tape::sub(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw std::invalid_argument("Tape::sub: shape mismatch");
    }
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    const int ia = a.id, ib = b.id;
    return push(A - B, ng, [ia, ib](Tape& t, Node& self) {
        if (t.nodes_[ia].needs_grad) t.grad_buffer(ia) += self.grad;
        if (t.nodes_[ib].needs_grad) t.grad_buffer(ib) -= self.grad;
    });
}

Var Tape::hadamard(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw std::invalid_argument("Tape::hadamard: shape mismatch");
    }
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    const int ia = a.id, ib = b.id;
    return push(A.cwiseProduct(B), ng, [ia, ib](Tape& t, Node& self) {
        if (t.nodes_[ia].needs_grad) {
            t.grad_buffer(ia) += self.grad.cwiseProduct(t.nodes_[ib].value);
        }
        if (t.nodes_[ib].needs_grad) {
            t.grad_buffer(ib) += self.grad.cwiseProduct(t.nodes_[ia].value);
        }
    });
}

Var Tape::scale(Var x, double s) {
    const int ix = x.id;
    return push(value(x) * s, node(x).needs_grad, [ix, s](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) t.grad_buffer(ix) += s * self.grad;
    });
}

Var Tape::add_scalar(Var x, double s) {
    const int ix = x.id;
    return push(value(x).array() + s, node(x).needs_grad, [ix](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) t.grad_buffer(ix) += self.grad;
    });
}

Var Tape::activation(Var x, Activation act) {
    const Matrix& X = value(x);
    const int ix = x.id;
    const bool ng = node(x).needs_grad;
    switch (act) {
        case Activation::Linear:
            return push(X, ng, [ix](Tape& t, Node& self) {
                if (t.nodes_[ix].needs_grad) t.grad_buffer(ix) += self.grad;
            });
        case Activation::Tanh:
            return push(X.array().tanh(), ng, [ix](Tape& t, Node& self) {
                if (t.nodes_[ix].needs_grad) {
                    t.grad_buffer(ix).array() +=
                        self.grad.array() * (1.0 - self.value.array().square());
                }
            });
        case Activation::Sigmoid:
            return push((1.0 / (1.0 + (-X.array()).exp())).matrix(), ng,
                        [ix](Tape& t, Node& self) {
                            if (t.nodes_[ix].needs_grad) {
                                t.grad_buffer(ix).array() +=
                                    self.grad.array() * self.value.array() *
                                    (1.0 - self.value.array());
                            }
                        });
        case Activation::Relu:
            return push(X.cwiseMax(0.0), ng, [ix](Tape& t, Node& self) {
                if (t.nodes_[ix].needs_grad) {
                    t.grad_buffer(ix).array() +=
                        self.grad.array() *
                        (t.nodes_[ix].value.array() > 0.0).cast<double>();
                }
            });
    }
    throw std::invalid_argument("Tape::activation: unknown activation");
}

Var Tape::sin(Var x) {
    const int ix = x.id;
    return push(value(x).array().sin(), node(x).needs_grad, [ix](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) {
            t.grad_buffer(ix).array() +=
                self.grad.array() * t.nodes_[ix].value.array().cos();
        }
    });
}

Var Tape::cos(Var x) {
    const int ix = x.id;
    return push(value(x).array().cos(), node(x).needs_grad, [ix](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) {
            t.grad_buffer(ix).array() -=
                self.grad.array() * t.nodes_[ix].value.array().sin();
        }
    });
}

Var Tape::square(Var x) {
    const int ix = x.id;
    return push(value(x).array().square(), node(x).needs_grad, [ix](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) {
            t.grad_buffer(ix).array() +=
                2.0 * self.grad.array() * t.nodes_[ix].value.array();
        }
    });
}

Var Tape::reciprocal(Var x) {
    const int ix = x.id;
    return push(value(x).cwiseInverse(), node(x).needs_grad, [ix](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) {
            t.grad_buffer(ix).array() -=
                self.grad.array() * self.value.array().square();
        }
    });
}

Var Tape::wrap_angle(Var x) {
    Matrix y = value(x);
    for (int j = 0; j < y.cols(); ++j) {
        for (int i = 0; i < y.rows(); ++i) {
            double w = std::fmod(y(i, j) + kPi, 2.0 * kPi);
            if (w < 0.0) w += 2.0 * kPi;
            y(i, j) = w - kPi;
        }
    }
    const int ix = x.id;
    return push(std::move(y), node(x).needs_grad, [ix](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) t.grad_buffer(ix) += self.grad;
    });
}

Var Tape::concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw std::invalid_argument("Tape::concat_rows: empty");
    const int cols = static_cast<int>(value(parts[0]).cols());
    int rows = 0;
    bool ng = false;
    for (Var p : parts) {
        if (value(p).cols() != cols) {
            throw std::invalid_argument("Tape::concat_rows: column mismatch");
        }
        rows += static_cast<int>(value(p).rows());
        ng = ng || node(p).needs_grad;
    }
    Matrix y(rows, cols);
    int at = 0;
    std::vector<std::pair<int, int>> spans;  // (node id, row offset)
    for (Var p : parts) {
        const Matrix& v = value(p);
        y.middleRows(at, v.rows()) = v;
        spans.emplace_back(p.id, at);
        at += static_cast<int>(v.rows());
    }
    return push(std::move(y), ng, [spans](Tape& t, Node& self) {
        for (const auto& [id, offset] : spans) {
            if (!t.nodes_[id].needs_grad) continue;
            const int r = static_cast<int>(t.nodes_[id].value.rows());
            t.grad_buffer(id) += self.grad.middleRows(offset, r);
        }
    });
}

Var Tape::slice_rows(Var x, int start, int count) {
    const Matrix& X = value(x);
    if (start < 0 || count < 0 || start + count > X.rows()) {
        throw std::invalid_argument("Tape::slice_rows: out of range");
    }
    const int ix = x.id;
    return push(X.middleRows(start, count), node(x).needs_grad,
                [ix, start, count](Tape& t, Node& self) {
                    if (t.nodes_[ix].needs_grad) {
                        t.grad_buffer(ix).middleRows(start, count) += self.grad;
                    }
                });
}

Var Tape::stencil(Var x, numerics::StencilKind kind, double spacing) {
    if (kind == numerics::StencilKind::Upwind2Convection) {
        return upwind_convection(x, spacing);
    }
    const Matrix& X = value(x);
    const int n = static_cast<int>(X.rows());
    Matrix y(n, X.cols());
    for (int j = 0; j < X.cols(); ++j) {
        numerics::apply_stencil({X.col(j).data(), static_cast<std::size_t>(n)},
                                {y.col(j).data(), static_cast<std::size_t>(n)}, kind,
                                spacing);
    }
    const int ix = x.id;
    return push(std::move(y), node(x).needs_grad,
                [ix, kind, spacing](Tape& t, Node& self) {
                    if (!t.nodes_[ix].needs_grad) return;
                    // transpose of a periodic stencil: flipped offsets
                    const auto& table = numerics::stencil_table(kind);
                    const double s = 1.0 / std::pow(spacing, table.deriv_power);
                    const int r = table.radius;
                    Matrix& dst = t.grad_buffer(ix);
                    const Matrix& g = self.grad;
                    const int n = static_cast<int>(g.rows());
                    for (int j = 0; j < g.cols(); ++j) {
                        for (int i = 0; i < n; ++i) {
                            double acc = 0.0;
                            for (int o = -r; o <= r; ++o) {
                                acc += table.coeffs[o + r] * g(wrap(i - o, n), j);
                            }
                            dst(i, j) += acc * s;
                        }
                    }
                });
}

Var Tape::upwind_convection(Var x, double spacing) {
    const Matrix& X = value(x);
    const int n = static_cast<int>(X.rows());
    Matrix y(n, X.cols());
    for (int j = 0; j < X.cols(); ++j) {
        numerics::apply_stencil({X.col(j).data(), static_cast<std::size_t>(n)},
                                {y.col(j).data(), static_cast<std::size_t>(n)},
                                numerics::StencilKind::Upwind2Convection, spacing);
    }
    const int ix = x.id;
    return push(std::move(y), node(x).needs_grad, [ix, spacing](Tape& t, Node& self) {
        if (!t.nodes_[ix].needs_grad) return;
        // w = u .* (S(u) u) with the sign pattern of u frozen:
        // du += g .* (S u) + S^T (g .* u)
        const Matrix& U = t.nodes_[ix].value;
        const Matrix& G = self.grad;
        Matrix& dst = t.grad_buffer(ix);
        const int n = static_cast<int>(U.rows());
        const double inv2h = 1.0 / (2.0 * spacing);
        std::vector<double> deriv(static_cast<std::size_t>(n));
        for (int j = 0; j < U.cols(); ++j) {
            numerics::upwind_one_sided_derivative(
                {U.col(j).data(), static_cast<std::size_t>(n)}, deriv, spacing);
            for (int i = 0; i < n; ++i) {
                dst(i, j) += G(i, j) * deriv[static_cast<std::size_t>(i)];
                const double gu = G(i, j) * U(i, j);
                const double ui = U(i, j);
                // scatter the rows of S^T; ties use the centered average
                const double wb = ui > 0.0 ? 1.0 : (ui < 0.0 ? 0.0 : 0.5);
                const double wf = 1.0 - wb;
                if (wb != 0.0) {
                    dst(i, j) += wb * 3.0 * inv2h * gu;
                    dst(wrap(i - 1, n), j) += wb * -4.0 * inv2h * gu;
                    dst(wrap(i - 2, n), j) += wb * 1.0 * inv2h * gu;
                }
                if (wf != 0.0) {
                    dst(i, j) += wf * -3.0 * inv2h * gu;
                    dst(wrap(i + 1, n), j) += wf * 4.0 * inv2h * gu;
                    dst(wrap(i + 2, n), j) += wf * -1.0 * inv2h * gu;
                }
            }
        }
    });
}

Var Tape::conv1d_circular(Var x, Var weights, Var bias, int in_channels,
                          int out_channels, int kernel_size, int stride, int n_nodes) {
    const Matrix& X = value(x);
    const Matrix& W = value(weights);
    const Matrix& B = value(bias);
    if (X.rows() != in_channels * n_nodes) {
        throw std::invalid_argument("conv1d_circular: input rows mismatch");
    }
    if (W.rows() != out_channels || W.cols() != in_channels * kernel_size) {
        throw std::invalid_argument("conv1d_circular: weight shape mismatch");
    }
    if (B.rows() != out_channels || B.cols() != 1) {
        throw std::invalid_argument("conv1d_circular: bias shape mismatch");
    }
    if (stride <= 0 || n_nodes % stride != 0) {
        throw std::invalid_argument("conv1d_circular: stride must divide node count");
    }
    const int n_out = n_nodes / stride;
    const int half = kernel_size / 2;
    const int batch = static_cast<int>(X.cols());

    Matrix y(out_channels * n_out, batch);
    for (int b = 0; b < batch; ++b) {
        for (int oc = 0; oc < out_channels; ++oc) {
            for (int p = 0; p < n_out; ++p) {
                const int center = p * stride;
                double acc = B(oc, 0);
                for (int ic = 0; ic < in_channels; ++ic) {
                    for (int k = 0; k < kernel_size; ++k) {
                        const int pos = wrap(center + k - half, n_nodes);
                        acc += W(oc, ic * kernel_size + k) * X(ic * n_nodes + pos, b);
                    }
                }
                y(oc * n_out + p, b) = acc;
            }
        }
    }

    const bool ng = node(x).needs_grad || node(weights).needs_grad || node(bias).needs_grad;
    const int ix = x.id, iw = weights.id, ib = bias.id;
    return push(std::move(y), ng,
                [ix, iw, ib, in_channels, out_channels, kernel_size, stride, n_nodes,
                 n_out, half](Tape& t, Node& self) {
                    const Matrix& X = t.nodes_[ix].value;
                    const Matrix& W = t.nodes_[iw].value;
                    const Matrix& G = self.grad;
                    const int batch = static_cast<int>(X.cols());
                    const bool need_x = t.nodes_[ix].needs_grad;
                    const bool need_w = t.nodes_[iw].needs_grad;
                    const bool need_b = t.nodes_[ib].needs_grad;
                    Matrix* gx = need_x ? &t.grad_buffer(ix) : nullptr;
                    Matrix* gw = need_w ? &t.grad_buffer(iw) : nullptr;
                    Matrix* gb = need_b ? &t.grad_buffer(ib) : nullptr;
                    for (int b = 0; b < batch; ++b) {
                        for (int oc = 0; oc < out_channels; ++oc) {
                            for (int p = 0; p < n_out; ++p) {
                                const double g = G(oc * n_out + p, b);
                                if (g == 0.0) continue;
                                if (gb) (*gb)(oc, 0) += g;
                                const int center = p * stride;
                                for (int ic = 0; ic < in_channels; ++ic) {
                                    for (int k = 0; k < kernel_size; ++k) {
                                        const int pos = wrap(center + k - half, n_nodes);
                                        if (gw) {
                                            (*gw)(oc, ic * kernel_size + k) +=
                                                g * X(ic * n_nodes + pos, b);
                                        }
                                        if (gx) {
                                            (*gx)(ic * n_nodes + pos, b) +=
                                                g * W(oc, ic * kernel_size + k);
                                        }
                                    }
                                }
                            }
                        }
                    }
                });
}

Var Tape::mean_all(Var x) {
    const Matrix& X = value(x);
    Matrix y(1, 1);
    y(0, 0) = X.mean();
    const int ix = x.id;
    const double inv = 1.0 / static_cast<double>(X.size());
    return push(std::move(y), node(x).needs_grad, [ix, inv](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) {
            t.grad_buffer(ix).array() += self.grad(0, 0) * inv;
        }
    });
}

Var Tape::sum_all(Var x) {
    const Matrix& X = value(x);
    Matrix y(1, 1);
    y(0, 0) = X.sum();
    const int ix = x.id;
    return push(std::move(y), node(x).needs_grad, [ix](Tape& t, Node& self) {
        if (t.nodes_[ix].needs_grad) t.grad_buffer(ix).array() += self.grad(0, 0);
    });
}

Var Tape::column_norm_mean(Var x, NormKind kind) {
    const Matrix& X = value(x);
    const int batch = static_cast<int>(X.cols());
    const int rows = static_cast<int>(X.rows());
    if (batch == 0 || rows == 0) {
        throw std::invalid_argument("column_norm_mean: empty input");
    }
    const double row_scale = kind == NormKind::GridRms ? 1.0 / rows : 1.0;
    Eigen::VectorXd norms(batch);
    double acc = 0.0;
    for (int j = 0; j < batch; ++j) {
        norms[j] = std::sqrt(X.col(j).squaredNorm() * row_scale);
        acc += norms[j];
    }
    Matrix y(1, 1);
    y(0, 0) = acc / batch;
    const int ix = x.id;
    return push(std::move(y), node(x).needs_grad,
                [ix, norms, row_scale, batch](Tape& t, Node& self) {
                    if (!t.nodes_[ix].needs_grad) return;
                    const Matrix& X = t.nodes_[ix].value;
                    Matrix& dst = t.grad_buffer(ix);
                    const double g = self.grad(0, 0) / batch;
                    for (int j = 0; j < X.cols(); ++j) {
                        if (norms[j] <= 0.0) continue;  // subgradient 0 at the kink
                        dst.col(j) += (g * row_scale / norms[j]) * X.col(j);
                    }
                });
}

void Tape::backward(Var output, double seed) {
    Matrix g(1, 1);
    g(0, 0) = seed;
    backward(output, g);
}

void Tape::backward(Var output, const Matrix& output_grad) {
    if (nodes_.empty()) throw std::logic_error("Tape::backward: no forward pass recorded");
    Node& out = node(output);
    if (out.value.rows() != output_grad.rows() || out.value.cols() != output_grad.cols()) {
        throw std::invalid_argument("Tape::backward: output gradient shape mismatch");
    }
    grad_buffer(output.id) += output_grad;
    for (int id = output.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.needs_grad || n.grad.size() == 0) continue;
        if (n.param_set != nullptr) {
            n.param_set->entry(n.param_idx).grad += n.grad;
        } else if (n.pull) {
            n.pull(*this, n);
        }
    }
}

}  // namespace pimbrl::nn
