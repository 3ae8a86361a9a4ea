#pragma once

#include <span>
#include <string>
#include <vector>

namespace lsns {

struct SampleSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double stderr_mean = 0.0;
};

/// Mean and standard error of the mean (n - 1 denominator). Summation order is fixed,
/// so equal inputs give bit-identical results.
SampleSummary summarize(std::span<const double> values);

/// mean / stderr; 0 when both vanish, +-inf when only the stderr vanishes.
double standardized(const SampleSummary& s);

struct OneSidedStatistic {
    std::string label;
    SampleSummary summary;
    double statistic = 0.0;
};

}  // namespace lsns
