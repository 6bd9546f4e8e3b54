#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bivirus {

/// Input violates a mathematical precondition (negative entry, non-Metzler matrix,
/// state outside the admissible set, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative method ran out of budget. Carries the last iterate so callers can
/// inspect how far it got.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, Eigen::VectorXd last_iterate)
        : std::runtime_error(what), last_iterate_(std::move(last_iterate)) {}

    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }

private:
    Eigen::VectorXd last_iterate_;
};

/// A candidate system failed validation; `violations()` lists every problem found.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out += "; ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

}  // namespace bivirus
