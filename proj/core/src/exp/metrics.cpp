#include "pimbrl/exp/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pimbrl::exp {

namespace {

constexpr const char* kHeader =
    "real_steps,episode,eval_mean,eval_min,eval_max,model_L_D,model_L_E,gate_open,fine_tune";

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_optional(double v) { return std::isnan(v) ? "" : format_double(v); }

}  // namespace

MetricsWriter::MetricsWriter(const std::filesystem::path& file) : os_(file) {
    if (!os_) throw std::runtime_error("MetricsWriter: cannot open " + file.string());
    os_ << kHeader << '\n';
    os_.flush();
}

void MetricsWriter::append(const MetricsRow& row) {
    if (row.real_steps <= last_steps_) {
        throw std::invalid_argument("MetricsWriter: real_steps must be strictly increasing");
    }
    if (!std::isfinite(row.eval_mean) || !std::isfinite(row.eval_min) ||
        !std::isfinite(row.eval_max)) {
        throw std::invalid_argument("MetricsWriter: non-finite evaluation statistics");
    }
    last_steps_ = row.real_steps;
    os_ << row.real_steps << ',' << row.episode << ',' << format_double(row.eval_mean)
        << ',' << format_double(row.eval_min) << ',' << format_double(row.eval_max) << ','
        << format_optional(row.model_data_loss) << ','
        << format_optional(row.model_physics_loss) << ',' << row.gate_open << ','
        << row.fine_tune << '\n';
    os_.flush();
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("read_metrics: cannot open " + file.string());
    std::string line;
    if (!std::getline(is, line)) return {};
    if (line != kHeader) throw std::runtime_error("read_metrics: unexpected header in " + file.string());

    std::vector<MetricsRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        while (cells.size() < 9) cells.emplace_back();  // trailing empties
        MetricsRow r;
        r.real_steps = std::stol(cells[0]);
        r.episode = std::stol(cells[1]);
        r.eval_mean = std::stod(cells[2]);
        r.eval_min = std::stod(cells[3]);
        r.eval_max = std::stod(cells[4]);
        r.model_data_loss =
            cells[5].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[5]);
        r.model_physics_loss =
            cells[6].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[6]);
        r.gate_open = std::stoi(cells[7]);
        r.fine_tune = std::stoi(cells[8]);
        rows.push_back(r);
    }
    return rows;
}

TimingWriter::TimingWriter(const std::filesystem::path& file) : os_(file) {
    if (!os_) throw std::runtime_error("TimingWriter: cannot open " + file.string());
    os_ << "real_steps,wall_seconds\n";
    os_.flush();
}

void TimingWriter::append(long real_steps, double wall_seconds) {
    os_ << real_steps << ',' << format_double(wall_seconds) << '\n';
    os_.flush();
}

}  // namespace pimbrl::exp
