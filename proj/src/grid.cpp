#include "lsns/grid.hpp"

#include "lsns/errors.hpp"

namespace lsns {

Grid::Grid(int modes_per_axis, int dealias_cutoff) : m_(modes_per_axis) {
    if (m_ <= 0 || m_ % 2 != 0) throw ConfigError("grid: modes_per_axis must be a positive even integer");
    cutoff_ = dealias_cutoff < 0 ? m_ / 3 : dealias_cutoff;
    if (cutoff_ > m_ / 2) throw ConfigError("grid: dealias_cutoff must not exceed M/2");
}

int fft_friendly_size(int lower) {
    for (int p = std::max(2, lower + (lower % 2));; p += 2) {
        int r = p;
        for (int f : {2, 3, 5})
            while (r % f == 0) r /= f;
        if (r == 1) return p;
    }
}

}  // namespace lsns
