#include "pimbrl/env/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pimbrl::env {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_trajectory(const std::filesystem::path& file,
                      const std::vector<TrajectoryRow>& rows) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("write_trajectory: cannot open " + file.string());
    if (rows.empty()) throw std::invalid_argument("write_trajectory: no rows");

    const int n = static_cast<int>(rows.front().state.size());
    const int m = static_cast<int>(rows.front().action.size());
    os << "t";
    for (int i = 0; i < n; ++i) os << ",u" << i;
    for (int i = 0; i < m; ++i) os << ",a" << i;
    os << ",r,d\n";
    for (const auto& row : rows) {
        os << format_double(row.t);
        for (int i = 0; i < n; ++i) os << ',' << format_double(row.state[i]);
        for (int i = 0; i < m; ++i) os << ',' << format_double(row.action[i]);
        os << ',' << format_double(row.reward) << ',' << format_double(row.done) << '\n';
    }
}

std::vector<TrajectoryRow> read_trajectory(const std::filesystem::path& file,
                                           int state_dim, int action_dim) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("read_trajectory: cannot open " + file.string());
    std::string line;
    std::getline(is, line);  // header
    std::vector<TrajectoryRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
        if (static_cast<int>(values.size()) != 1 + state_dim + action_dim + 2) {
            throw std::runtime_error("read_trajectory: bad row width in " + file.string());
        }
        TrajectoryRow row;
        row.t = values[0];
        row.state = Eigen::Map<const Eigen::VectorXd>(values.data() + 1, state_dim);
        row.action =
            Eigen::Map<const Eigen::VectorXd>(values.data() + 1 + state_dim, action_dim);
        row.reward = values[1 + state_dim + action_dim];
        row.done = values[2 + state_dim + action_dim];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace pimbrl::env
