#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pimbrl/nn/tape.hpp"

namespace test_util {

/// Independent finite-difference oracle for reverse-mode gradients: rebuilds
/// the loss twice per parameter element with central perturbations and
/// compares against one taped backward pass. Returns the norm-relative error
/// ||g_ad - g_fd|| / max(||g_fd||, floor).
inline double gradient_check(
    pimbrl::nn::ParameterSet& ps,
    const std::function<pimbrl::nn::Var(pimbrl::nn::Tape&, pimbrl::nn::ParameterSet&)>& build_loss,
    double eps = 1e-5) {
    using pimbrl::nn::Matrix;
    using pimbrl::nn::Tape;
    using pimbrl::nn::Var;

    ps.zero_grad();
    {
        Tape tape;
        Var loss = build_loss(tape, ps);
        tape.backward(loss);
    }
    std::vector<Matrix> ad;
    ad.reserve(ps.size());
    for (int i = 0; i < ps.size(); ++i) ad.push_back(ps.entry(i).grad);

    auto eval = [&]() {
        Tape tape;
        Var loss = build_loss(tape, ps);
        return tape.value(loss)(0, 0);
    };

    double diff_sq = 0.0, fd_sq = 0.0;
    for (int i = 0; i < ps.size(); ++i) {
        Matrix& value = ps.entry(i).value;
        for (int c = 0; c < value.cols(); ++c) {
            for (int r = 0; r < value.rows(); ++r) {
                const double saved = value(r, c);
                value(r, c) = saved + eps;
                const double up = eval();
                value(r, c) = saved - eps;
                const double down = eval();
                value(r, c) = saved;
                const double fd = (up - down) / (2.0 * eps);
                const double d = ad[i](r, c) - fd;
                diff_sq += d * d;
                fd_sq += fd * fd;
            }
        }
    }
    return std::sqrt(diff_sq) / std::max(std::sqrt(fd_sq), 1e-10);
}

}  // namespace test_util
