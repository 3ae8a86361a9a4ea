#pragma once

// Brute-force reference computations. Nothing here calls the FFT path or the
// spectral operators it is used to check; fields are read only as coefficient
// arrays and evaluated by direct summation.

#include <array>
#include <functional>
#include <vector>

#include "lsns/field.hpp"

namespace lsns::oracle {

using Point = std::array<double, 3>;

/// Direct O(M^6) DFT of one real component, normalised like forward_transform.
std::vector<cplx> direct_dft(int m, const std::vector<double>& samples);

/// Applies I - n n^T / |n|^2 built explicitly as a 3x3 matrix per mode.
SpectralField projection_by_matrix(const SpectralField& v);

/// div(v (x) u) by direct convolution over all mode pairs, restricted to retained modes.
SpectralField nonlinear_by_convolution(const SpectralField& u, const SpectralField& v);

/// -(n (x) n):(v (x) u)_n / |n|^2 from a direct convolution, restricted to retained modes.
ScalarField pressure_by_mode_arithmetic(const SpectralField& advecting, const SpectralField& u);

/// Fourier multiplier of the eps-scaled compact bump at wavevector n, by nested
/// adaptive Simpson quadrature in cylindrical coordinates.
double bump_multiplier_by_quadrature(double epsilon, const std::array<int, 3>& n);

/// Point evaluation of a Fourier series by direct summation over all stored modes.
std::array<double, 3> evaluate(const SpectralField& u, const Point& x);
double evaluate(const ScalarField& s, const Point& x);

/// Midpoint-free Riemann sum of f over a uniform n^3 grid of the unit torus.
double riemann_sum(int points_per_axis, const std::function<double(const Point&)>& f);

/// D^l(u) at the M-grid points by direct quadrature over a q^3 displacement grid
/// covering [-l, l]^3: (1/4) sum_y grad(alpha_l)(y) . du |du|^2 h^3, du = u(x+y) - u(x).
std::vector<double> dr_by_displacement_quadrature(const SpectralField& u, double ell, int q);
/// Same integral on a q^3 grid in spherical coordinates over the ball |y| < l: Gauss-Legendre
/// in r and cos(theta), trapezoid in the azimuth.
std::vector<double> dr_by_spherical_quadrature(const SpectralField& u, double ell, int q);

/// Central finite difference of order 8 for f'(x) and f''(x).
double derivative_fd(const std::function<double(double)>& f, double x, double h);
double second_derivative_fd(const std::function<double(double)>& f, double x, double h);

}  // namespace lsns::oracle
