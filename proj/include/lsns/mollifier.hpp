#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lsns/grid.hpp"

namespace lsns {

enum class MollifierKind {
    /// c * exp(-1 / (1 - |x|^2)) on the unit ball, unit mass, compact support.
    paper_bump,
    /// Gaussian with per-axis standard deviation epsilon / 3. Not compactly supported.
    gaussian,
};

MollifierKind parse_mollifier_kind(const std::string& name);
std::string to_string(MollifierKind kind);

/// Fourier multiplier of psi_eps = eps^-3 psi(./eps) sampled at every mode of a grid.
/// Multipliers are computed once per (eps, grid, kind) and shared.
class Mollifier {
public:
    /// epsilon == 0 gives the identity. Throws ConfigError for epsilon < 0.
    Mollifier(double epsilon, MollifierKind kind, const Grid& grid);

    double epsilon() const noexcept { return epsilon_; }
    MollifierKind kind() const noexcept { return kind_; }
    const Grid& grid() const noexcept { return grid_; }
    bool compact_support() const noexcept { return kind_ == MollifierKind::paper_bump; }

    double multiplier(std::size_t flat_mode) const noexcept { return (*multipliers_)[flat_mode]; }
    std::span<const double> multipliers() const noexcept { return *multipliers_; }

    /// Fourier transform of the unit-scale profile at frequency |xi| (cycles per unit length).
    static double profile_transform(MollifierKind kind, double xi);

private:
    double epsilon_;
    MollifierKind kind_;
    Grid grid_;
    std::shared_ptr<const std::vector<double>> multipliers_;
};

/// Normalising constant c of the unit bump, so that its integral over R^3 is 1.
double bump_normalisation();

/// Value and gradient of eps^-3 psi(y / eps) for the compact bump.
double bump_value(double epsilon, const std::array<double, 3>& y);
std::array<double, 3> bump_gradient(double epsilon, const std::array<double, 3>& y);

}  // namespace lsns
