#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

namespace pimbrl::env {

/// One control-step row of an episode trajectory dump.
struct TrajectoryRow {
    double t = 0.0;
    Eigen::VectorXd state;   // full physical state u on the grid (or ODE state)
    Eigen::VectorXd action;  // executed action
    double reward = 0.0;
    double done = 0.0;
};

/// Writes one episode as delimited text: header, then one row per control
/// step with columns [t, u..., a..., r, d].
void write_trajectory(const std::filesystem::path& file,
                      const std::vector<TrajectoryRow>& rows);

std::vector<TrajectoryRow> read_trajectory(const std::filesystem::path& file,
                                           int state_dim, int action_dim);

}  // namespace pimbrl::env
