#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lsns/energy_ledger.hpp"
#include "lsns/integrator.hpp"

namespace lsns {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// h(r) = r^(1/2) - r^((1-d)/2) / (2 (1-d)) for r >= 1, and q(y) = h(1 + |y|^2).
class HFunction {
public:
    /// Throws ConfigError unless 0 < delta <= 1/2.
    explicit HFunction(double delta = 0.5);
    double delta() const noexcept { return delta_; }
    /// 4 / (3 + delta), the gradient exponent of the vorticity bound.
    double gradient_exponent() const noexcept { return 4.0 / (3.0 + delta_); }

    struct Values {
        double h = 0.0, dh = 0.0, d2h = 0.0;
    };
    /// Throws ConfigError for r < 1.
    Values eval(double r) const;

    double q(const Vec3& y) const;
    /// eta^T Hess q(y) eta = 2 |eta|^2 h'(1+|y|^2) + 4 (eta.y)^2 h''(1+|y|^2).
    double quadratic_form(const Vec3& y, const Vec3& eta) const;

private:
    double delta_;
};

HFunction::Values h_eval(const HFunction& hf, double r);

struct QDerivatives {
    double q = 0.0;
    Vec3 gradient{};
    Mat3 hessian{};
};
/// Closed forms: grad q = 2 y h', Hess q = 2 h' I + 4 h'' y y^T at r = 1 + |y|^2.
QDerivatives q_gradient_hessian(const HFunction& hf, const Vec3& y);

struct HessianBoundsReport {
    double delta = 0.0;
    std::int64_t samples = 0;
    /// Smallest relative margins: form / lower - 1, 1 - |form| / upper, 1 - |grad q|,
    /// q / ((1-2d)/(2(1-d)) sqrt(1+|y|^2)) - 1 (or q itself when the constant is 0), 1 - q / sqrt(1+|y|^2).
    double lower_margin = 0.0;
    double upper_margin = 0.0;
    double gradient_margin = 0.0;
    double sandwich_lower_margin = 0.0;
    double sandwich_upper_margin = 0.0;
    bool pass = false;
};

/// Checks the two Hessian bounds (strictly), |grad q| <= 1 and the q sandwich on random (y, eta)
/// with log-uniform |y| in [1e-6, max_norm], eta parallel, orthogonal or random relative to y.
/// Throws ConfigError for samples < 1 and VerificationFailure naming (y, eta) on a violation.
HessianBoundsReport hessian_bounds_check(const HFunction& hf, std::int64_t samples, std::uint64_t seed = 0,
                                         double max_norm = 1e3);

/// Row j: pointwise integrals at the state u_j (grid means over the unit torus) and sums over steps i < j.
struct VorticityRow {
    double t = 0.0;
    double l1 = 0.0;                  // int |w|
    double sqrt_energy = 0.0;         // int (1 + |w|^2)^(1/2)
    double energy_weight = 0.0;       // int (1 + |w|^2)
    double w_integral = 0.0;          // int q(w)
    double hessian_enstrophy = 0.0;   // int d_l w_i d_l w_j Hess_ij q(w)
    double hessian_lower = 0.0;       // (d/2) int (1 + |w|^2)^(-(1+d)/2) |grad w|^2
    double weighted_enstrophy = 0.0;  // int (1 + |w|^2)^(-(1+d)/2) |grad w|^2
    double stretching = 0.0;          // int e_ijk (psi * d_j u_l)(d_l u_k) d_i q(w)
    double noise_compensator = 0.0;   // (1/2) sum_k int r_k^T Hess q(w) r_k, r_k = curl g_k
    double gradient_norm = 0.0;       // int |grad w|^(4/(3+d))
    /// int grad q(w) . curl(drift) + nu hessian_enstrophy + stretching: what grid quadrature of the
    /// scheme's own drift adds beyond the identity's terms (integration by parts and truncation
    /// hold only up to aliasing of q(w)); shrinks as the quadrature grid is refined.
    double quadrature_defect = 0.0;
    std::vector<double> noise_pairings;  // int r_k . grad q(w)

    double initial_w = 0.0;
    double viscous_sum = 0.0;      // nu sum hessian_enstrophy dt
    double stretching_sum = 0.0;   // sum stretching dt
    double compensator_sum = 0.0;  // sum noise_compensator dt
    double gradient_sum = 0.0;     // sum gradient_norm dt
    double defect_sum = 0.0;       // sum quadrature_defect dt
    /// int q(w_j) - int q(w_0) + viscous + stretching - defect - compensator: the martingale, closed as a residual.
    double residual = 0.0;
    double ito_martingale = 0.0;  // sum_k sum (int r_k . grad q) dB_k
    double qv_predicted = 0.0;    // sum_k sum (int r_k . grad q)^2 dt
    double qv_realized = 0.0;     // sum of squared residual increments

    /// [weighted_enstrophy]^(2/(3+d)) [energy_weight]^((1+d)/(3+d)) - gradient_norm.
    double holder_margin(double delta) const;
    /// l1 <= sqrt_energy <= 1 + l1.
    bool norm_chain_holds() const;
};

struct VorticityLedger {
    double delta = 0.5;
    double epsilon = 0.0;
    double dt = 0.0;
    std::vector<VorticityRow> rows;
};

/// Pointwise quantities of w = curl u evaluated on a P^3 physical grid (P = M by default).
class VorticityLedgerBuilder {
public:
    VorticityLedgerBuilder(const Stepper& stepper, const HFunction& hf, int points = 0);

    int points() const noexcept { return p_; }
    /// Row with the pointwise integrals at u filled in (sums left at zero).
    VorticityRow pointwise(const SpectralField& u, double t) const;
    VorticityRow initial_row(const SpectralField& u0) const;
    VorticityRow next_row(const VorticityRow& prev, const SpectralField& u_next, std::int64_t j,
                          const BrownianIncrements& incs) const;
    VorticityLedger start(const SpectralField& u0) const;

private:
    const Stepper* stepper_;
    HFunction hf_;
    int p_;
};

/// Appends row j+1 to `ledger` (which must hold rows 0..j). Needs a stride-1 trajectory.
void vorticity_ledger_step(const Trajectory& traj, std::size_t j, const HFunction& hf, VorticityLedger& ledger);
VorticityLedger vorticity_ledger(const Trajectory& traj, const HFunction& hf);

/// Ensemble mean of the final residual over its stderr; pass when |statistic| <= 4.
TwoSidedReport vorticity_residual_zero_mean(std::span<const VorticityLedger> ensemble);
/// Ensemble mean of (realized - predicted) quadratic variation at T over stderr.
TwoSidedReport vorticity_qv_consistency(std::span<const VorticityLedger> ensemble);

struct VorticityBoundsReport {
    double epsilon = 0.0;
    double delta = 0.0;
    SampleSummary sup_l1;         // sup_t ||w(t)||_{L^1}
    SampleSummary gradient_time;  // int_0^T int |grad w|^(4/(3+d))
    double min_holder_margin = 0.0;
    bool holder_pass = false;
    bool norm_chain_pass = false;
};

/// Throws ConfigError for an empty ensemble or mixed epsilon / delta.
VorticityBoundsReport vorticity_bounds_report(std::span<const VorticityLedger> ensemble);

struct LadderTrend {
    std::vector<double> epsilon;
    std::vector<double> sup_l1;
    std::vector<double> gradient_time;
    /// False when a quantity increases at every step down the ladder and ends above twice its first value.
    bool pass = false;
};

/// Reports ordered by decreasing epsilon. Throws ConfigError if they are not.
LadderTrend epsilon_ladder_trend(const std::vector<VorticityBoundsReport>& reports);

}  // namespace lsns
