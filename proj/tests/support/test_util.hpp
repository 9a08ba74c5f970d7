#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "pimbrl/util/rng.hpp"

namespace test_util {

inline std::vector<double> sinusoid(int n, double length, double k, double amplitude = 1.0) {
    std::vector<double> u(n);
    const double h = length / n;
    for (int i = 0; i < n; ++i) u[i] = amplitude * std::sin(k * i * h);
    return u;
}

inline std::vector<double> circshift(const std::vector<double>& u, int s) {
    const int n = static_cast<int>(u.size());
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        int j = (i - s) % n;
        if (j < 0) j += n;
        out[i] = u[j];
    }
    return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline Eigen::VectorXd random_vector(int n, pimbrl::Rng& rng, double lo = -1.0,
                                     double hi = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

/// Unique scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "pimbrl_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace test_util
