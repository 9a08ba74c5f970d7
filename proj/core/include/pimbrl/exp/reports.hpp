#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "pimbrl/model/transition_model.hpp"
#include "pimbrl/rl/replay_buffer.hpp"

namespace pimbrl::exp {

/// Axis-aligned bounding box of observation vectors; the in-sample /
/// out-of-sample split of the model-error report classifies held-out states
/// by membership.
struct StateBounds {
    Eigen::VectorXd lo, hi;

    bool contains(const Eigen::VectorXd& v) const;
    static StateBounds from_buffer(const rl::ReplayBuffer& buffer);
};

struct ModelErrorReport {
    struct Bin {
        double left = 0.0, right = 0.0;
        long count = 0;
    };
    struct Table {
        std::vector<Bin> bins;
        long count = 0;
        double mean = 0.0, median = 0.0, p90 = 0.0, max = 0.0;
    };
    Table in_sample, out_of_sample;
    double overall_median = 0.0;
};

/// Per-transition prediction mean-squared errors, binned; separate tables
/// for states inside and outside the training-state bounding box. Writes
/// model_error_in_sample.csv, model_error_out_sample.csv and
/// model_error_summary.csv under `out_dir`.
ModelErrorReport emit_model_error_report(const model::TransitionModel& model,
                                         std::span<const rl::Transition* const> held_out,
                                         const StateBounds& train_bounds,
                                         const std::filesystem::path& out_dir,
                                         int n_bins = 30);

/// Cross-seed aggregation of run metrics into one plot-ready table
/// (curves.csv: algo,real_steps,mean,min,max,seeds). Runs must share the
/// environment id; rows align by real_steps within each algorithm.
void emit_curve_data(std::span<const std::filesystem::path> run_dirs,
                     const std::filesystem::path& out_dir);

/// Binary replay-buffer snapshot (used by the report harness to rebuild the
/// training-state bounds and held-out sets).
void save_buffer(const rl::ReplayBuffer& buffer, const std::filesystem::path& file);
rl::ReplayBuffer load_buffer(const std::filesystem::path& file, std::size_t capacity);

}  // namespace pimbrl::exp
