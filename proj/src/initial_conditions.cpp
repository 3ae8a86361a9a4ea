#include "lsns/initial_conditions.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "lsns/spectral.hpp"

namespace lsns {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

template <int C>
ModalField<C> random_band_limited(const Grid& grid, std::uint64_t seed, double slope) {
    // Sample in physical space so conjugate symmetry is exact, then filter.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    GridSamples<C> samples(grid.modes_per_axis());
    for (auto& comp : samples.values)
        for (auto& v : comp) v = normal(rng);
    ModalField<C> f = truncate(forward_transform(samples, grid));
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto n = grid.mode(m);
        const double w = std::pow(1.0 + n[0] * n[0] + n[1] * n[1] + n[2] * n[2], -0.5 * slope);
        for (int c = 0; c < C; ++c) f.at(c, m) *= w;
    }
    return f;
}

}  // namespace

SpectralField taylor_green(const Grid& grid, double amplitude) {
    PhysicalVector s(grid.modes_per_axis());
    const int m = grid.modes_per_axis();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const double x = two_pi * i / m, y = two_pi * j / m, z = two_pi * k / m;
                const std::size_t f = s.flat(i, j, k);
                s.values[0][f] = amplitude * std::sin(x) * std::cos(y) * std::cos(z);
                s.values[1][f] = -amplitude * std::cos(x) * std::sin(y) * std::cos(z);
                s.values[2][f] = 0.0;
            }
    return truncate(forward_transform(s, grid));
}

SpectralField shear_mode(const Grid& grid, double amplitude, int wavenumber) {
    SpectralField u(grid);
    // sin(2 pi n x) = (e^{i.} - e^{-i.}) / 2i
    u.at(1, grid.flat_mode({wavenumber, 0, 0})) = cplx(0.0, -0.5 * amplitude);
    u.at(1, grid.flat_mode({-wavenumber, 0, 0})) = cplx(0.0, 0.5 * amplitude);
    return u;
}

SpectralField random_solenoidal(const Grid& grid, std::uint64_t seed, double energy, double slope) {
    SpectralField u = leray_project(random_band_limited<3>(grid, seed, slope));
    for (int c = 0; c < 3; ++c) u.at(c, 0) = 0.0;
    const double e = u.l2_norm_squared();
    if (e > 0.0) u *= std::sqrt(energy / e);
    return u;
}

ScalarField random_scalar(const Grid& grid, std::uint64_t seed, double l2_norm, double slope) {
    ScalarField s = random_band_limited<1>(grid, seed, slope);
    const double e = s.l2_norm_squared();
    if (e > 0.0) s *= l2_norm / std::sqrt(e);
    return s;
}

}  // namespace lsns
