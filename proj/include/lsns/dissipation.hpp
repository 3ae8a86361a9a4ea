#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lsns/energy_ledger.hpp"
#include "lsns/field.hpp"
#include "lsns/mollifier.hpp"
#include "lsns/test_function.hpp"

namespace lsns {

/// Scales for the structure-function dissipation D^l. Mollifier alpha_l of the given kind.
struct DRConfig {
    std::vector<double> ell_values;
    MollifierKind alpha_kind = MollifierKind::paper_bump;
    int quadrature = 24;  // displacement grid of the physical-space cross-check

    /// Throws ConfigError unless the scales are strictly decreasing, l <= 1/4 and l >= 2/M.
    void validate(const Grid& grid) const;
    /// The members of {1/4, 1/8, 1/16, 1/32} that are >= 2/M.
    static DRConfig default_for(const Grid& grid);
};

/// Pointwise pieces of D^l on the padded grid, each sampled at the P^3 points.
struct DRTerms {
    PhysicalScalar advect_energy;   // u^i d_i (|u|^2)_l
    PhysicalScalar div_cubic;       // d_i (u^i |u|^2)_l
    PhysicalScalar advect_stress;   // 2 u^j d_i (u^i u^j)_l
    PhysicalScalar stress_strain;   // 2 u^i u^j d_i u^j_l
    PhysicalScalar dissipation;     // D^l = (advect_energy - div_cubic + advect_stress - stress_strain) / 4
};

/// Evaluates D^l(u) spectrally. Every product is formed from exact samples on a P^3 grid with
/// P = fft_friendly_size(6K + 1), where the cubic terms are alias-free.
class DREvaluator {
public:
    /// Throws ConfigError unless 0 < l <= 1/4.
    DREvaluator(const Grid& grid, double ell, MollifierKind kind = MollifierKind::paper_bump,
                int min_points = 0);

    double ell() const noexcept { return ell_; }
    int padded_points() const noexcept { return p_; }
    const Grid& padded_grid() const noexcept { return padded_; }

    DRTerms terms(const SpectralField& u) const;
    /// D^l on the padded grid (its modes up to 3K are exact).
    ScalarField integrand(const SpectralField& u) const;
    /// max |4 D^l - div[u (|u|^2)_l - (u |u|^2)_l] - 2 E^l| over the padded grid, divided by the
    /// largest sup norm among the four terms of 4 D^l; 0 when u = 0.
    double identity_residual(const SpectralField& u) const;

private:
    Grid grid_;
    Grid padded_;
    double ell_;
    int p_;
    Mollifier alpha_;
    Mollifier alpha_padded_;
};

ScalarField dr_integrand(const SpectralField& u, double ell, MollifierKind kind = MollifierKind::paper_bump);
double commutator_identity_check(const SpectralField& u, double ell,
                                 MollifierKind kind = MollifierKind::paper_bump);

struct DRLedger {
    std::vector<double> ell_values;
    std::vector<double> times;
    /// series[i][j] = sum_{m < j} dt theta(t_{m+1}) int D^{l_i}(u_m) S, the time weighting of the energy ledger.
    std::vector<std::vector<double>> series;
    /// max_j |series[i][j] - series[i+1][j]| for consecutive scales.
    std::vector<double> cauchy_differences;
    /// E_j + 2 D_j^{l_min} - (initial + compensator + Ito sum) per time index, E_j the running energy.
    std::vector<double> closure;

    const std::vector<double>& finest() const { return series.back(); }
    double worst_closure() const;
};

/// Accumulates a DR ledger step by step, so an ensemble need not keep its trajectories.
class DRLedgerBuilder {
public:
    /// Throws ConfigError if the config is invalid for the grid.
    DRLedgerBuilder(const Grid& grid, double dt, const TestFunction& phi, const DRConfig& config);

    /// int D^{l_i}(u) S for every scale.
    std::vector<double> spatial_integrals(const SpectralField& u) const;
    void start(DRLedger& ledger, double t0) const;
    /// Appends time index j+1 from the state at j (time t) and the energy ledger row j+1.
    void step(DRLedger& ledger, const SpectralField& u, double t, const LedgerRow& energy_next) const;
    void finish(DRLedger& ledger) const;

private:
    double dt_;
    TestFunction phi_;
    std::vector<DREvaluator> evaluators_;
    std::vector<double> s_;
};

/// Needs a stride-1 trajectory and its energy ledger for the same phi.
DRLedger dr_ledger(const Trajectory& traj, const TestFunction& phi, const DRConfig& config,
                   const EnergyLedger& energy);
DRLedger dr_ledger(const Trajectory& traj, const TestFunction& phi, const DRConfig& config);

/// Statistic mean[(D_t - D_s) 1_A] / stderr on the finest scale; pass when all >= -3.
/// Events read the energy ledgers up to s. Same errors as supermartingale_test.
MartingaleTestReport dissipation_submartingale_test(std::span<const DRLedger> dr,
                                                    std::span<const EnergyLedger> energy, std::size_t s,
                                                    std::size_t t, const std::vector<PathEvent>& events);

}  // namespace lsns
