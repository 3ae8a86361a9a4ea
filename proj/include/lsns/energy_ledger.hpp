#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lsns/integrator.hpp"
#include "lsns/statistics.hpp"
#include "lsns/test_function.hpp"

namespace lsns {

/// One row per time index j. Accumulated columns hold left-endpoint sums over steps i < j.
struct LedgerRow {
    double t = 0.0;
    double initial_energy = 0.0;             // int |u_0|^2 phi_0
    double l2_energy = 0.0;                  // ||u_j||^2
    double local_energy = 0.0;               // int |u_j|^2 phi_j
    double enstrophy = 0.0;                  // 2 nu sum int |grad u|^2 phi dt
    double transport = 0.0;                  // sum int |u|^2 (d_t phi + nu Laplace phi) dt
    double flux = 0.0;                       // sum int (|u|^2 psi*u + 2 p u) . grad phi dt
    double truncation_flux = 0.0;            // sum of the energy moved across the Galerkin cutoff, see StepIntegrals
    double compensator = 0.0;                // sum_k sum int |g_k(u)|^2 phi dt, g_k the applied coefficient
    double compensator_unregularized = 0.0;  // same with sigma_k(u)
    double residual = 0.0;                   // discrete martingale N_j
    double ito_martingale = 0.0;             // 2 sum_k sum (int phi g_k . u) dB_k
    double qv_predicted = 0.0;               // 4 sum_k sum (int phi g_k . u)^2 dt
    double qv_realized = 0.0;                // sum (N_{i+1} - N_i)^2
    double qv_ito_realized = 0.0;            // same for the Ito sum

    /// E_t(u; phi) without the initial-energy term.
    double running_energy() const noexcept { return local_energy + enstrophy - transport - flux - truncation_flux; }
    double compensator_gap() const noexcept { return compensator_unregularized - compensator; }
};

struct EnergyLedger {
    std::vector<LedgerRow> rows;
};

/// Spatial integrals against S, the spatial factor of phi. For em_semi_implicit the viscous
/// terms use u_n sqrt((1 - exp(-2a_n)) / 2a_n), a_n = 4 pi^2 nu |n|^2 dt, and the noise terms use
/// E u and E g_k with E the step's heat factor, matching what the integrator applies.
struct SpatialIntegrals {
    double energy = 0.0;                     // int |u|^2 S
    double energy_laplacian = 0.0;           // int |u|^2 Laplace S
    double enstrophy = 0.0;                  // int |grad u|^2 S
    double flux = 0.0;                       // int (|u|^2 v + 2 p u) . grad S, v = psi*u
    double truncation_flux = 0.0;            // -2 int S u . T_K div(v (x) u) - int |u|^2 v . grad S
    double compensator = 0.0;                // sum_k int |g_k|^2 S
    double compensator_unregularized = 0.0;  // sum_k int |sigma_k(u)|^2 S
    std::vector<double> noise_pairings;      // int S g_k . u
};

/// The rates entering the step from t to t + dt. Fields are taken at t; the temporal cut-off
/// is taken at t + dt, with its exact increment over the step in the transport rate, so that
/// phi(t + dt) int |u(t + dt)|^2 S - phi(t) int |u(t)|^2 S splits without a cut-off error.
struct StepIntegrals {
    double local_energy = 0.0;
    double enstrophy_rate = 0.0;
    double transport_rate = 0.0;
    double flux_rate = 0.0;
    /// Energy transfer removed by truncating the advective product; 0 for spatially constant phi.
    double truncation_flux_rate = 0.0;
    double compensator_rate = 0.0;
    double compensator_unregularized_rate = 0.0;
    std::vector<double> noise_pairings;  // int phi g_k . u
};

/// Evaluates ledger integrals exactly on a padded quadrature grid: every integrand is a
/// trigonometric polynomial whose degree the grid resolves.
class EnergyLedgerBuilder {
public:
    EnergyLedgerBuilder(const Stepper& stepper, const TestFunction& phi);

    int quadrature_points() const noexcept { return q_; }
    const TestFunction& test_function() const noexcept { return phi_; }

    double local_energy(const SpectralField& u, double t) const;
    SpatialIntegrals spatial_integrals(const SpectralField& u, const ScalarField& p) const;
    StepIntegrals integrals(const SpectralField& u, const ScalarField& p, double t) const;

    LedgerRow initial_row(const SpectralField& u0) const;
    /// Row j+1 from row j, the state and pressure at j, and the state at j+1.
    LedgerRow next_row(const LedgerRow& prev, const SpectralField& u, const ScalarField& p,
                       const SpectralField& u_next, std::int64_t j, const BrownianIncrements& incs) const;

private:
    const Stepper* stepper_;
    TestFunction phi_;
    int q_ = 0;
    std::vector<double> s_, lap_s_;
    std::array<std::vector<double>, 3> grad_s_;
};

/// Appends row j+1 to `ledger` (which must hold rows 0..j). Needs a stride-1 trajectory.
void ledger_step(const Trajectory& traj, std::size_t j, const TestFunction& phi, EnergyLedger& ledger);
/// Full ledger of a stride-1 trajectory.
EnergyLedger energy_ledger(const Trajectory& traj, const TestFunction& phi);

/// N_j: [int |u_j|^2 phi_j + enstrophy] - [int |u_0|^2 phi_0 + transport + flux + truncation flux + compensator].
double ledger_residual(const EnergyLedger& ledger, std::size_t j);

struct QVSeries {
    std::vector<double> predicted;
    std::vector<double> realized;
};
QVSeries qv_estimate(const EnergyLedger& ledger);

/// Read access to a ledger up to time index `limit`; reading later rows is a contract violation.
class LedgerHistory {
public:
    LedgerHistory(const EnergyLedger& ledger, std::size_t limit) : ledger_(&ledger), limit_(limit) {}
    std::size_t limit() const noexcept { return limit_; }
    const LedgerRow& row(std::size_t j) const;

private:
    const EnergyLedger* ledger_;
    std::size_t limit_;
};

struct PathEvent {
    std::string name;
    std::function<bool(const LedgerHistory&)> indicator;
};

/// {whole space, ||u(s)||^2 <= median, ||u(s)||^2 > median} with the median over the ensemble.
std::vector<PathEvent> energy_split_events(std::span<const EnergyLedger> ensemble, std::size_t s);

struct MartingaleTestReport {
    std::size_t s = 0, t = 0;
    std::vector<OneSidedStatistic> statistics;
    bool pass = false;
};

/// Statistic mean[(X_t - X_s) 1_A] / stderr for X = E(u; phi) - compensator; pass when all <= +3.
/// Throws ConfigError for fewer than 100 paths or s > t.
MartingaleTestReport supermartingale_test(std::span<const EnergyLedger> ensemble, std::size_t s, std::size_t t,
                                          const std::vector<PathEvent>& events);

struct TwoSidedReport {
    SampleSummary summary;
    double statistic = 0.0;
    bool pass = false;  // |statistic| <= 4
};

/// Ensemble mean of N_T over stderr.
TwoSidedReport martingale_zero_mean(std::span<const EnergyLedger> ensemble);
/// Ensemble mean of (realized - predicted) quadratic variation at T over stderr.
TwoSidedReport qv_consistency(std::span<const EnergyLedger> ensemble);

struct LEIReport {
    std::string xi_name;
    double lhs = 0.0;
    double rhs = 0.0;
    SampleSummary difference;
    double statistic = 0.0;
    bool pass = false;
};

using PathFunctional = std::function<double(const EnergyLedger&)>;
PathFunctional xi_one();
/// 1 / (1 + max_j ||u_j||^2).
PathFunctional xi_inverse_energy();

/// E[xi E_T] <= E[xi (int |u_0|^2 phi_0 + compensator_T + N_T)] with N the Ito sum; pass when
/// the mean difference is <= 3 stderr. Throws ConfigError if xi < 0 on some path.
LEIReport lei_scalar_check(std::span<const EnergyLedger> ensemble, const PathFunctional& xi,
                           const std::string& xi_name);

struct ContinuityReport {
    double numerator = 0.0;    // E sup_t |N_t(phi1) - N_t(phi2)|^alpha
    double denominator = 0.0;  // ||phi1 - phi2||_{L^5}^alpha
    double ratio = 0.0;
};

/// Throws ConfigError unless 1 <= alpha < 4 and the test functions share a temporal cut-off.
ContinuityReport martingale_map_continuity(std::span<const Trajectory> ensemble, const TestFunction& phi1,
                                           const TestFunction& phi2, double alpha);

}  // namespace lsns
