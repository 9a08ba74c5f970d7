#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pimbrl {

/// Thrown when a numerical state or derivative evaluation produced
/// non-finite values; carries the time-step index where it happened.
class NumericBlowupError : public std::runtime_error {
public:
    NumericBlowupError(const std::string& what, long step_index)
        : std::runtime_error(what + " (step " + std::to_string(step_index) + ")"),
          step_index_(step_index) {}

    long step_index() const { return step_index_; }

private:
    long step_index_;
};

/// Configuration validation failure. Collects every violation so a bad
/// config file is reported in one pass.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& violations) {
        std::ostringstream os;
        os << "invalid configuration (" << violations.size() << " violation(s)):";
        for (const auto& v : violations) os << "\n  - " << v;
        return os.str();
    }

    std::vector<std::string> violations_;
};

}  // namespace pimbrl
