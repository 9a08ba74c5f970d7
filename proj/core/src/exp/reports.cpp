#include "pimbrl/exp/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>

#include "pimbrl/exp/metrics.hpp"

namespace pimbrl::exp {

bool StateBounds::contains(const Eigen::VectorXd& v) const {
    if (v.size() != lo.size()) return false;
    for (int i = 0; i < v.size(); ++i) {
        if (v[i] < lo[i] || v[i] > hi[i]) return false;
    }
    return true;
}

StateBounds StateBounds::from_buffer(const rl::ReplayBuffer& buffer) {
    if (buffer.empty()) throw std::invalid_argument("StateBounds: empty buffer");
    StateBounds b;
    b.lo = buffer.at(0).obs;
    b.hi = buffer.at(0).obs;
    for (std::size_t i = 1; i < buffer.size(); ++i) {
        b.lo = b.lo.cwiseMin(buffer.at(i).obs);
        b.hi = b.hi.cwiseMax(buffer.at(i).obs);
    }
    return b;
}

namespace {

double percentile(std::vector<double> sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double idx = p * (sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = idx - lo;
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

ModelErrorReport::Table make_table(std::vector<double> errors, double bin_max, int n_bins) {
    ModelErrorReport::Table t;
    t.count = static_cast<long>(errors.size());
    if (errors.empty()) return t;
    std::sort(errors.begin(), errors.end());
    t.mean = 0.0;
    for (double e : errors) t.mean += e;
    t.mean /= errors.size();
    t.median = percentile(errors, 0.5);
    t.p90 = percentile(errors, 0.9);
    t.max = errors.back();

    const double width = bin_max > 0.0 ? bin_max / n_bins : 1.0;
    t.bins.resize(n_bins);
    for (int b = 0; b < n_bins; ++b) {
        t.bins[b].left = b * width;
        t.bins[b].right = (b + 1) * width;
    }
    for (double e : errors) {
        int b = bin_max > 0.0 ? static_cast<int>(e / width) : 0;
        b = std::clamp(b, 0, n_bins - 1);
        t.bins[b].count += 1;
    }
    return t;
}

void write_table(const ModelErrorReport::Table& t, const std::filesystem::path& file,
                 const std::string& region) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os << "# region: " << region << "\n";
    os << "# split rule: in-sample = held-out state inside the axis-aligned bounding "
          "box of the training-buffer states\n";
    os << "bin_left,bin_right,count\n";
    char buf[64];
    for (const auto& b : t.bins) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%ld", b.left, b.right, b.count);
        os << buf << '\n';
    }
}

}  // namespace

ModelErrorReport emit_model_error_report(const model::TransitionModel& model,
                                         std::span<const rl::Transition* const> held_out,
                                         const StateBounds& train_bounds,
                                         const std::filesystem::path& out_dir, int n_bins) {
    if (held_out.empty()) {
        throw std::invalid_argument("emit_model_error_report: empty held-out set");
    }
    std::filesystem::create_directories(out_dir);

    std::vector<double> in_errors, out_errors, all_errors;
    for (const rl::Transition* tr : held_out) {
        const auto pred = model.predict(tr->obs, tr->action, tr->aux);
        const double mse =
            (pred.next_state() - tr->obs_next).squaredNorm() / tr->obs_next.size();
        all_errors.push_back(mse);
        (train_bounds.contains(tr->obs) ? in_errors : out_errors).push_back(mse);
    }
    const double bin_max = *std::max_element(all_errors.begin(), all_errors.end());

    ModelErrorReport report;
    report.in_sample = make_table(in_errors, bin_max, n_bins);
    report.out_of_sample = make_table(out_errors, bin_max, n_bins);
    std::sort(all_errors.begin(), all_errors.end());
    report.overall_median = percentile(all_errors, 0.5);

    write_table(report.in_sample, out_dir / "model_error_in_sample.csv", "in-sample");
    write_table(report.out_of_sample, out_dir / "model_error_out_sample.csv",
                "out-of-sample");

    std::ofstream os(out_dir / "model_error_summary.csv");
    os << "region,count,mean,median,p90,max\n";
    char buf[256];
    auto line = [&](const char* region, const ModelErrorReport::Table& t) {
        std::snprintf(buf, sizeof(buf), "%s,%ld,%.17g,%.17g,%.17g,%.17g", region, t.count,
                      t.mean, t.median, t.p90, t.max);
        os << buf << '\n';
    };
    line("in_sample", report.in_sample);
    line("out_of_sample", report.out_of_sample);
    return report;
}

void emit_curve_data(std::span<const std::filesystem::path> run_dirs,
                     const std::filesystem::path& out_dir) {
    if (run_dirs.empty()) throw std::invalid_argument("emit_curve_data: no runs");
    std::filesystem::create_directories(out_dir);

    std::string env_id;
    // algo -> real_steps -> per-seed eval stats
    std::map<std::string, std::map<long, std::vector<MetricsRow>>> grouped;
    for (const auto& dir : run_dirs) {
        std::ifstream cs(dir / "config.json");
        if (!cs) throw std::runtime_error("emit_curve_data: missing config echo in " + dir.string());
        nlohmann::json cfg = nlohmann::json::parse(cs);
        const std::string env = cfg["env"]["id"].get<std::string>();
        const std::string algo = cfg["loop"]["algo"].get<std::string>();
        if (env_id.empty()) env_id = env;
        if (env != env_id) {
            throw std::invalid_argument("emit_curve_data: mismatched env ids (" + env_id +
                                        " vs " + env + ")");
        }
        for (const auto& row : read_metrics(dir / "metrics.csv")) {
            grouped[algo][row.real_steps].push_back(row);
        }
    }

    std::ofstream os(out_dir / "curves.csv");
    if (!os) throw std::runtime_error("emit_curve_data: cannot write curves.csv");
    os << "algo,real_steps,mean,min,max,seeds\n";
    char buf[256];
    for (const auto& [algo, by_step] : grouped) {
        for (const auto& [steps, rows] : by_step) {
            double mean = 0.0;
            double mn = rows.front().eval_min, mx = rows.front().eval_max;
            for (const auto& r : rows) {
                mean += r.eval_mean;
                mn = std::min(mn, r.eval_min);
                mx = std::max(mx, r.eval_max);
            }
            mean /= rows.size();
            std::snprintf(buf, sizeof(buf), "%s,%ld,%.17g,%.17g,%.17g,%zu", algo.c_str(),
                          steps, mean, mn, mx, rows.size());
            os << buf << '\n';
        }
    }
}

namespace {

void write_vec(std::ofstream& os, const Eigen::VectorXd& v) {
    const std::uint32_t n = static_cast<std::uint32_t>(v.size());
    os.write(reinterpret_cast<const char*>(&n), sizeof(n));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(n * sizeof(double)));
}

Eigen::VectorXd read_vec(std::ifstream& is) {
    std::uint32_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof(n));
    Eigen::VectorXd v(n);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

}  // namespace

void save_buffer(const rl::ReplayBuffer& buffer, const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("save_buffer: cannot open " + file.string());
    const std::uint64_t n = buffer.size();
    os.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        const rl::Transition& t = buffer.at(i);
        write_vec(os, t.obs);
        write_vec(os, t.action);
        write_vec(os, t.obs_next);
        os.write(reinterpret_cast<const char*>(&t.reward), sizeof(double));
        os.write(reinterpret_cast<const char*>(&t.done), sizeof(double));
        const std::uint8_t real = t.real ? 1 : 0;
        os.write(reinterpret_cast<const char*>(&real), sizeof(real));
        write_vec(os, t.aux);
        write_vec(os, t.aux_next);
    }
}

rl::ReplayBuffer load_buffer(const std::filesystem::path& file, std::size_t capacity) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("load_buffer: cannot open " + file.string());
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof(n));
    rl::ReplayBuffer buffer(std::max<std::size_t>(capacity, n));
    for (std::uint64_t i = 0; i < n; ++i) {
        rl::Transition t;
        t.obs = read_vec(is);
        t.action = read_vec(is);
        t.obs_next = read_vec(is);
        is.read(reinterpret_cast<char*>(&t.reward), sizeof(double));
        is.read(reinterpret_cast<char*>(&t.done), sizeof(double));
        std::uint8_t real = 1;
        is.read(reinterpret_cast<char*>(&real), sizeof(real));
        t.real = real != 0;
        t.aux = read_vec(is);
        t.aux_next = read_vec(is);
        if (!is) throw std::runtime_error("load_buffer: truncated file " + file.string());
        buffer.push(std::move(t));
    }
    return buffer;
}

}  // namespace pimbrl::exp
