#include "pimbrl/nn/parameters.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pimbrl::nn {

int ParameterSet::add(const std::string& name, int rows, int cols) {
    if (find(name) >= 0) throw std::invalid_argument("ParameterSet: duplicate name " + name);
    ParamEntry e;
    e.name = name;
    e.value = Matrix::Zero(rows, cols);
    e.grad = Matrix::Zero(rows, cols);
    e.m = Matrix::Zero(rows, cols);
    e.v = Matrix::Zero(rows, cols);
    entries_.push_back(std::move(e));
    return static_cast<int>(entries_.size()) - 1;
}

int ParameterSet::find(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

void ParameterSet::zero_grad() {
    for (auto& e : entries_) e.grad.setZero();
}

void ParameterSet::assert_finite() const {
    for (const auto& e : entries_) {
        if (!e.value.allFinite()) {
            throw std::runtime_error("ParameterSet: non-finite values in " + e.name);
        }
    }
}

void ParameterSet::copy_values_from(const ParameterSet& src) {
    if (src.size() != size()) throw std::invalid_argument("copy_values_from: size mismatch");
    for (int i = 0; i < size(); ++i) {
        if (src.entries_[i].value.rows() != entries_[i].value.rows() ||
            src.entries_[i].value.cols() != entries_[i].value.cols()) {
            throw std::invalid_argument("copy_values_from: shape mismatch at " +
                                        entries_[i].name);
        }
        entries_[i].value = src.entries_[i].value;
    }
}

long ParameterSet::parameter_count() const {
    long n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
}

void adam_update(ParameterSet& params, double lr, double beta1, double beta2,
                 double eps) {
    params.step_count_ += 1;
    const double t = static_cast<double>(params.step_count_);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (auto& e : params.entries_) {
        if (e.grad.rows() != e.value.rows() || e.grad.cols() != e.value.cols()) {
            throw std::invalid_argument("adam_update: gradient shape mismatch at " + e.name);
        }
        e.m = beta1 * e.m + (1.0 - beta1) * e.grad;
        e.v = beta2 * e.v + (1.0 - beta2) * e.grad.cwiseProduct(e.grad);
        e.value.array() -=
            lr * (e.m.array() / bc1) / ((e.v.array() / bc2).sqrt() + eps);
    }
    params.assert_finite();
}

void polyak_update(ParameterSet& target, const ParameterSet& live, double rho) {
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("polyak_update: rho outside [0,1]");
    if (target.size() != live.size()) {
        throw std::invalid_argument("polyak_update: parameter-set size mismatch");
    }
    for (int i = 0; i < target.size(); ++i) {
        auto& t = target.entry(i);
        const auto& l = live.entry(i);
        if (t.value.rows() != l.value.rows() || t.value.cols() != l.value.cols()) {
            throw std::invalid_argument("polyak_update: shape mismatch at " + t.name);
        }
        t.value = rho * t.value + (1.0 - rho) * l.value;
    }
}

namespace {

constexpr std::uint32_t kMagic = 0x4b434250;  // "PBCK"
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_i64(std::ofstream& os, std::int64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_string(std::ofstream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_matrix(std::ofstream& os, const Matrix& m) {
    write_u32(os, static_cast<std::uint32_t>(m.rows()));
    write_u32(os, static_cast<std::uint32_t>(m.cols()));
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
}

std::uint32_t read_u32(std::ifstream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::int64_t read_i64(std::ifstream& is) {
    std::int64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::string read_string(std::ifstream& is) {
    std::string s(read_u32(is), '\0');
    is.read(s.data(), static_cast<std::streamsize>(s.size()));
    return s;
}
Matrix read_matrix(std::ifstream& is) {
    const std::uint32_t rows = read_u32(is);
    const std::uint32_t cols = read_u32(is);
    Matrix m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file,
                     const std::vector<std::pair<std::string, const ParameterSet*>>& sets) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + file.string());
    write_u32(os, kMagic);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(sets.size()));
    for (const auto& [name, ps] : sets) {
        write_string(os, name);
        write_i64(os, ps->step_count());
        write_u32(os, static_cast<std::uint32_t>(ps->size()));
        for (int i = 0; i < ps->size(); ++i) {
            const auto& e = ps->entry(i);
            write_string(os, e.name);
            write_matrix(os, e.value);
            write_matrix(os, e.m);
            write_matrix(os, e.v);
        }
    }
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + file.string());
}

void load_checkpoint(const std::filesystem::path& file,
                     const std::vector<std::pair<std::string, ParameterSet*>>& sets) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + file.string());
    if (read_u32(is) != kMagic) throw std::runtime_error("load_checkpoint: bad magic");
    if (read_u32(is) != kVersion) throw std::runtime_error("load_checkpoint: bad version");
    const std::uint32_t n_sets = read_u32(is);
    if (n_sets != sets.size()) throw std::runtime_error("load_checkpoint: set count mismatch");
    for (const auto& [expected_name, ps] : sets) {
        const std::string name = read_string(is);
        if (name != expected_name) {
            throw std::runtime_error("load_checkpoint: expected set " + expected_name +
                                     ", found " + name);
        }
        ps->set_step_count(read_i64(is));
        const std::uint32_t n_entries = read_u32(is);
        if (static_cast<int>(n_entries) != ps->size()) {
            throw std::runtime_error("load_checkpoint: entry count mismatch in " + name);
        }
        for (int i = 0; i < ps->size(); ++i) {
            auto& e = ps->entry(i);
            const std::string entry_name = read_string(is);
            if (entry_name != e.name) {
                throw std::runtime_error("load_checkpoint: expected entry " + e.name +
                                         ", found " + entry_name);
            }
            Matrix value = read_matrix(is);
            Matrix m = read_matrix(is);
            Matrix v = read_matrix(is);
            if (value.rows() != e.value.rows() || value.cols() != e.value.cols()) {
                throw std::runtime_error("load_checkpoint: shape mismatch at " + e.name);
            }
            e.value = std::move(value);
            e.m = std::move(m);
            e.v = std::move(v);
        }
        if (!is) throw std::runtime_error("load_checkpoint: truncated file " + file.string());
    }
}

}  // namespace pimbrl::nn
