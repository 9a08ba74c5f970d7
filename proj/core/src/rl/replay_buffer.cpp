#include "pimbrl/rl/replay_buffer.hpp"

#include <cmath>
#include <stdexcept>

namespace pimbrl::rl {

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (!finite(t.obs) || !finite(t.action) || !finite(t.obs_next) ||
        !std::isfinite(t.reward) || !std::isfinite(t.done) || !finite(t.aux) ||
        !finite(t.aux_next)) {
        throw std::invalid_argument("ReplayBuffer::push: non-finite transition rejected");
    }
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
        head_ = data_.size() % capacity_;
        full_ = data_.size() == capacity_;
        return;
    }
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= size()) throw std::out_of_range("ReplayBuffer::at: index out of range");
    if (!full_) return data_[i];
    return data_[(head_ + i) % capacity_];
}

const Transition& ReplayBuffer::sample(Rng& rng) const {
    if (empty()) throw std::logic_error("ReplayBuffer::sample: buffer empty");
    return at(rng.uniform_index(size()));
}

std::vector<const Transition*> sample_union(std::span<const ReplayBuffer* const> buffers,
                                            int count, Rng& rng, double real_fraction) {
    std::size_t total = 0;
    for (const ReplayBuffer* b : buffers) total += b->size();
    if (total == 0) throw std::logic_error("sample_union: all buffers empty");

    std::vector<const Transition*> batch;
    batch.reserve(static_cast<std::size_t>(count));

    auto draw_union = [&]() -> const Transition* {
        std::size_t idx = rng.uniform_index(total);
        for (const ReplayBuffer* b : buffers) {
            if (idx < b->size()) return &b->at(idx);
            idx -= b->size();
        }
        return nullptr;  // unreachable
    };

    if (real_fraction < 0.0 || buffers.size() < 2 || buffers[0]->empty()) {
        for (int i = 0; i < count; ++i) batch.push_back(draw_union());
        return batch;
    }

    const int n_real = static_cast<int>(std::lround(real_fraction * count));
    for (int i = 0; i < count; ++i) {
        if (i < n_real) {
            batch.push_back(&buffers[0]->sample(rng));
        } else {
            batch.push_back(draw_union());
        }
    }
    return batch;
}

}  // namespace pimbrl::rl
