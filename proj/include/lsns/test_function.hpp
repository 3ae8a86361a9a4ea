#pragma once

#include <array>

#include "lsns/field.hpp"

namespace lsns {

/// Smooth step: 0 for r <= 0, 1 for r >= 1, f(r) / (f(r) + f(1 - r)) with f(r) = exp(-1/r) between.
double smooth_step(double r);
double smooth_step_derivative(double r);

/// chi((t - a)/ramp) chi((b - t)/ramp): support [a, b], equal to 1 on [a + ramp, b - ramp].
class TemporalCutoff {
public:
    /// The constant 1 (no temporal localisation).
    TemporalCutoff() = default;
    /// Throws ConfigError unless a < b and 0 < ramp <= (b - a)/2.
    TemporalCutoff(double a, double b, double ramp);

    bool constant() const noexcept { return constant_; }
    double start() const noexcept { return a_; }
    double end() const noexcept { return b_; }
    double ramp() const noexcept { return ramp_; }

    double value(double t) const;
    double derivative(double t) const;

    friend bool operator==(const TemporalCutoff&, const TemporalCutoff&) = default;

private:
    bool constant_ = true;
    double a_ = 0.0, b_ = 0.0, ramp_ = 0.0;
};

/// phi(t, x) = theta(t) S(x) with S a nonnegative trigonometric polynomial.
class TestFunction {
public:
    TestFunction() = default;
    /// Throws ConfigError if S is not real or is negative somewhere on a 4x refined grid.
    TestFunction(const ScalarField& spatial, const TemporalCutoff& temporal);

    /// prod_i ((1 + cos 2 pi (x_i - c_i)) / 2)^power; power 0 gives S = 1.
    static TestFunction raised_cosine(const Grid& grid, int power, const std::array<double, 3>& centre,
                                      const TemporalCutoff& temporal);
    /// Spatial part from samples on the grid; rejects data that is not a low-order polynomial.
    static TestFunction from_samples(const PhysicalScalar& samples, const Grid& grid, const TemporalCutoff& temporal);

    const ScalarField& spatial() const noexcept { return spatial_; }
    const SpectralField& spatial_gradient() const noexcept { return gradient_; }
    const ScalarField& spatial_laplacian() const noexcept { return laplacian_; }
    const TemporalCutoff& temporal() const noexcept { return temporal_; }
    /// Largest |n_i| carried by S.
    int degree() const noexcept { return degree_; }

    double value(double t, const std::array<double, 3>& x) const;
    double time_derivative(double t, const std::array<double, 3>& x) const;
    std::array<double, 3> gradient(double t, const std::array<double, 3>& x) const;
    double laplacian(double t, const std::array<double, 3>& x) const;

    /// phi1 + lambda (phi2 - phi1); both must share the temporal cut-off.
    static TestFunction interpolate(const TestFunction& phi1, const TestFunction& phi2, double lambda);

private:
    ScalarField spatial_;
    SpectralField gradient_;
    ScalarField laplacian_;
    TemporalCutoff temporal_;
    int degree_ = 0;
};

}  // namespace lsns
