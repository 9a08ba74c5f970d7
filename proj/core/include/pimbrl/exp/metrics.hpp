#pragma once

#include <filesystem>
#include <fstream>
#include <vector>

namespace pimbrl::exp {

/// One evaluation-time metrics record. Loss fields may be NaN before the
/// corresponding training has produced a value; they serialize as empty
/// cells.
struct MetricsRow {
    long real_steps = 0;
    long episode = 0;
    double eval_mean = 0.0;
    double eval_min = 0.0;
    double eval_max = 0.0;
    double model_data_loss = std::numeric_limits<double>::quiet_NaN();
    double model_physics_loss = std::numeric_limits<double>::quiet_NaN();
    int gate_open = 0;
    int fine_tune = 0;
};

/// Comma-delimited metrics stream: header written once, one flushed line per
/// row, real_steps strictly increasing within a file. Deterministic
/// formatting so identical runs produce byte-identical files (wall-clock
/// timings go to the separate timing sidecar).
class MetricsWriter {
public:
    explicit MetricsWriter(const std::filesystem::path& file);

    void append(const MetricsRow& row);

private:
    std::ofstream os_;
    long last_steps_ = -1;
};

std::vector<MetricsRow> read_metrics(const std::filesystem::path& file);

/// Wall-clock sidecar, one (real_steps, wall_seconds) row per evaluation.
/// Kept out of metrics.csv because wall time is not reproducible.
class TimingWriter {
public:
    explicit TimingWriter(const std::filesystem::path& file);

    void append(long real_steps, double wall_seconds);

private:
    std::ofstream os_;
};

}  // namespace pimbrl::exp
