#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lsns::oracle {

enum class SuiteLevel { fast, full };

struct OracleCheck {
    std::string module;
    std::string operation;
    std::uint64_t seed = 0;
    int modes = 0;
    double error = 0.0;  // relative unless noted by the operation
    double tolerance = 0.0;
    bool pass = false;
};

struct SuiteReport {
    std::vector<OracleCheck> checks;
    double seconds = 0.0;
    bool pass() const;
    /// One line per failed check: module, operation, grid and input seed.
    std::vector<std::string> failures() const;
};

/// Every fast-path operation against its brute-force oracle at M = 8 (fast) or M = 8 and 16 (full).
SuiteReport run_oracle_suite(SuiteLevel level);

}  // namespace lsns::oracle
