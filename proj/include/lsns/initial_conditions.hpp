#pragma once

#include <cstdint>

#include "lsns/field.hpp"

namespace lsns {

/// u = A (sin 2pi x cos 2pi y cos 2pi z, -cos 2pi x sin 2pi y cos 2pi z, 0).
SpectralField taylor_green(const Grid& grid, double amplitude);

/// u = (0, A sin(2 pi n x_1), 0): divergence free, self-advection vanishes.
SpectralField shear_mode(const Grid& grid, double amplitude, int wavenumber = 1);

/// Random real divergence-free field on the retained modes with mean mode zero,
/// Gaussian coefficients weighted by (1 + |n|^2)^(-slope/2), rescaled so that
/// ||u||_{L^2}^2 = energy. Deterministic in seed.
SpectralField random_solenoidal(const Grid& grid, std::uint64_t seed, double energy, double slope = 2.0);

/// Random real scalar band-limited to the retained modes (mean included), same construction.
ScalarField random_scalar(const Grid& grid, std::uint64_t seed, double l2_norm, double slope = 2.0);

}  // namespace lsns
