#include "lsns/statistics.hpp"

#include <cmath>
#include <limits>

namespace lsns {

SampleSummary summarize(std::span<const double> values) {
    SampleSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double n = static_cast<double>(values.size());
    s.stderr_mean = std::sqrt(ss / (n - 1.0) / n);
    return s;
}

double standardized(const SampleSummary& s) {
    if (s.stderr_mean > 0.0) return s.mean / s.stderr_mean;
    if (s.mean == 0.0) return 0.0;
    return s.mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

}  // namespace lsns
