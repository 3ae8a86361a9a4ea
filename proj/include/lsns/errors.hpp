#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lsns {

/// Invalid configuration or mismatched inputs (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke an operation's precondition in a way that is not a config problem.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Non-finite or runaway state during time integration.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(std::int64_t step, const std::string& what)
        : std::runtime_error("blow-up at step " + std::to_string(step) + ": " + what), step_(step) {}
    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t step_;
};

/// A numerical check that must hold unconditionally did not (carries a witness).
class VerificationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lsns
