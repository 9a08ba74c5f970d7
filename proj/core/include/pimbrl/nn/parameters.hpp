#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace pimbrl::nn {

using Matrix = Eigen::MatrixXd;

/// One named parameter array with its gradient accumulator and Adam moments.
struct ParamEntry {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix m;  // first moment
    Matrix v;  // second moment
};

/// Flat collection of named numeric arrays for one network, plus optimizer
/// state. Shapes are fixed after construction; training requires exclusive
/// access, evaluation over a const set is concurrency-safe.
class ParameterSet {
public:
    /// Adds a zero-initialized entry; returns its index. Names must be unique.
    int add(const std::string& name, int rows, int cols);

    int find(const std::string& name) const;  // -1 when missing
    int size() const { return static_cast<int>(entries_.size()); }

    ParamEntry& entry(int idx) { return entries_.at(idx); }
    const ParamEntry& entry(int idx) const { return entries_.at(idx); }
    Matrix& value(int idx) { return entries_.at(idx).value; }
    const Matrix& value(int idx) const { return entries_.at(idx).value; }

    long step_count() const { return step_count_; }
    void set_step_count(long n) { step_count_ = n; }

    void zero_grad();

    /// Throws std::runtime_error if any value is non-finite.
    void assert_finite() const;

    /// Copies values (not moments) from a shape-identical set.
    void copy_values_from(const ParameterSet& src);

    long parameter_count() const;

private:
    friend void adam_update(ParameterSet&, double, double, double, double);
    std::vector<ParamEntry> entries_;
    long step_count_ = 0;
};

/// Bias-corrected Adam step over the accumulated gradients; increments the
/// step counter and asserts every updated value is finite.
void adam_update(ParameterSet& params, double lr, double beta1 = 0.9,
                 double beta2 = 0.999, double eps = 1e-8);

/// target <- rho * target + (1 - rho) * live, elementwise over all entries.
void polyak_update(ParameterSet& target, const ParameterSet& live, double rho);

/// Versioned binary checkpoint: header + named-array table with raw
/// little-endian 64-bit floats. Values, Adam moments and step counters are
/// all stored; identical bytes imply identical behavior.
void save_checkpoint(const std::filesystem::path& file,
                     const std::vector<std::pair<std::string, const ParameterSet*>>& sets);

void load_checkpoint(const std::filesystem::path& file,
                     const std::vector<std::pair<std::string, ParameterSet*>>& sets);

}  // namespace pimbrl::nn
