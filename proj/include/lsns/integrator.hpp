#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsns/field.hpp"
#include "lsns/mollifier.hpp"
#include "lsns/noise.hpp"
#include "lsns/rng.hpp"

namespace lsns {

enum class Scheme { em_explicit, em_semi_implicit };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

struct RunParams {
    double nu = 0.01;
    double epsilon = 0.25;
    double dt = 1.0 / 64;
    double T = 0.5;
    Grid grid{16};
    std::uint64_t seed = 0;
    std::uint32_t path_id = 0;
    Scheme scheme = Scheme::em_semi_implicit;
    MollifierKind mollifier = MollifierKind::paper_bump;
    int stride = 1;

    /// Throws ConfigError on invalid values or when T is not a whole number of steps.
    void validate() const;
    std::int64_t steps() const;
    /// dt nu (2 pi K)^2 <= 2; only meaningful for em_explicit.
    bool stability_advisory() const;
};

/// Test-only switches. `disable_nonlinearity` drops the advection term;
/// `frozen_state` keeps u fixed while increments are still drawn.
struct StepHooks {
    bool disable_nonlinearity = false;
    bool frozen_state = false;
};

/// psi_eps * u0, truncated to the retained modes and projected.
SpectralField initial_condition(const SpectralField& u0, double epsilon,
                                MollifierKind kind = MollifierKind::paper_bump);

/// One Euler-Maruyama step of the regularised system. Holds the mollifier and the
/// per-model constants so that repeated steps do not rebuild them.
class Stepper {
public:
    Stepper(const RunParams& params, const NoiseModel& noise, StepHooks hooks = {});

    const RunParams& params() const noexcept { return params_; }
    const NoiseModel& noise() const noexcept { return noise_; }
    const Mollifier& mollifier() const noexcept { return psi_; }
    const StepHooks& hooks() const noexcept { return hooks_; }
    /// Number of noise terms actually used: min(N(eps), max_k), 0 if the noise is off.
    int noise_terms() const noexcept { return n_terms_; }

    /// P(-div((psi * u) (x) u)), plus nu Laplace u for em_explicit.
    SpectralField drift(const SpectralField& u) const;
    /// g_k = P T_K (psi * sigma_k(u)) for k = 1..noise_terms().
    std::vector<SpectralField> noise_coefficients(const SpectralField& u) const;
    /// Pressure of the mollified advection at state u.
    ScalarField pressure(const SpectralField& u) const;

    /// State after one step from u using increments at index `step`.
    /// Throws BlowUpError on a non-finite state or ||u|| > 1e12.
    SpectralField advance(const SpectralField& u, std::int64_t step, const BrownianIncrements& incs) const;
    /// The update with zero noise: E(u + dt F(u)) or u + dt F(u).
    SpectralField deterministic_update(const SpectralField& u) const;

private:
    RunParams params_;
    NoiseModel noise_;
    StepHooks hooks_;
    Mollifier psi_;
    int n_terms_ = 0;
    std::vector<SpectralField> additive_;  // cached g_k for additive noise
};

struct StepResult {
    SpectralField u;
    ScalarField p;
};

/// Advances u from time index `step` (t = step dt); the returned pressure is that of the input state.
StepResult step(const SpectralField& u, std::int64_t step, const RunParams& params, const NoiseModel& noise,
                const BrownianIncrements& incs);

struct Trajectory {
    RunParams params;
    NoiseModel noise;
    StepHooks hooks;
    BrownianIncrements increments;
    std::vector<double> times;
    std::vector<SpectralField> states;
    std::vector<ScalarField> pressures;
    std::optional<std::int64_t> blowup_step;
    std::string blowup_message;

    int stride() const noexcept { return params.stride; }
    bool blown_up() const noexcept { return blowup_step.has_value(); }
};

/// Integrates from initial_condition(u0) to T. A blow-up stops the path and is recorded
/// on the trajectory, which keeps the states computed so far.
Trajectory integrate(const RunParams& params, const SpectralField& u0, const NoiseModel& noise,
                     StepHooks hooks = {});

/// N(t_j) = u(t_j) - u(0) - sum_{i<j} dt * D(u_i) with D(u) = (deterministic_update(u) - u) / dt.
/// Throws ContractViolation for stride != 1.
std::vector<SpectralField> noise_term_path(const Trajectory& traj);

/// int_0^T ||u||^r dt + sum_{i != j} w_i w_j ||u_i - u_j||^r / |t_i - t_j|^(1 + alpha r),
/// trapezoid weights w_i on a uniform time grid of spacing dt.
/// Throws ConfigError unless 0 < alpha < 1/2, r >= 2 and there are at least two points.
double fractional_sobolev_norm(const std::vector<SpectralField>& series, double dt, double alpha, double r);

}  // namespace lsns
