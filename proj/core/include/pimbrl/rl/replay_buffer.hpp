#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "pimbrl/util/rng.hpp"

namespace pimbrl::rl {

/// One experience tuple. `real` records provenance: transitions observed in
/// the true environment versus model-generated ones. `aux` carries
/// environment-specific model inputs (the Burgers' reference phase); empty
/// elsewhere.
struct Transition {
    Eigen::VectorXd obs;
    Eigen::VectorXd action;  // executed action in environment units
    Eigen::VectorXd obs_next;
    double reward = 0.0;
    double done = 0.0;  // 1 only on genuine failure termination
    bool real = true;
    Eigen::VectorXd aux;
    Eigen::VectorXd aux_next;
};

/// Bounded FIFO store with uniform with-replacement sampling. One writer and
/// one sampler at a time; instances are independent.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    /// Appends a transition, evicting the oldest at capacity. Non-finite
    /// fields are rejected with std::invalid_argument.
    void push(Transition t);

    std::size_t size() const { return full_ ? capacity_ : head_; }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return size() == 0; }

    /// Logical indexing, 0 = oldest stored transition.
    const Transition& at(std::size_t i) const;

    const Transition& sample(Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    bool full_ = false;
    std::vector<Transition> data_;
};

/// Uniform with-replacement draws over the union of several buffers
/// ("augmented buffer" sampling). When `real_fraction` is in [0, 1], that
/// share of each batch is drawn from the first buffer instead (ablation
/// knob); the default -1 keeps the union uniform.
std::vector<const Transition*> sample_union(std::span<const ReplayBuffer* const> buffers,
                                            int count, Rng& rng,
                                            double real_fraction = -1.0);

}  // namespace pimbrl::rl
