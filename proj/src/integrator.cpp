#include "lsns/integrator.hpp"

#include <cmath>
#include <numbers>

#include "lsns/errors.hpp"
#include "lsns/spectral.hpp"

namespace lsns {
namespace {

constexpr double blowup_norm = 1e12;

void check_finite(const SpectralField& u, std::int64_t step) {
    double s = 0.0;
    for (const auto& v : u.raw()) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw BlowUpError(step, "non-finite coefficient");
        s += std::norm(v);
    }
    if (std::sqrt(s) > blowup_norm) throw BlowUpError(step, "L2 norm above 1e12");
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
    if (name == "em_explicit") return Scheme::em_explicit;
    if (name == "em_semi_implicit") return Scheme::em_semi_implicit;
    throw ConfigError("unknown scheme '" + name + "'");
}

std::string to_string(Scheme scheme) {
    return scheme == Scheme::em_explicit ? "em_explicit" : "em_semi_implicit";
}

void RunParams::validate() const {
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be >= 0");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
    if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("T must be >= 0");
    if (T > 0.0 && dt > T) throw ConfigError("dt must not exceed T");
    if (grid.modes_per_axis() <= 0) throw ConfigError("grid is not set");
    if (stride < 1) throw ConfigError("stride must be >= 1");
    const double n = T / dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) throw ConfigError("T must be a whole number of steps");
}

std::int64_t RunParams::steps() const { return static_cast<std::int64_t>(std::llround(T / dt)); }

bool RunParams::stability_advisory() const {
    const double k = 2.0 * std::numbers::pi * grid.dealias_cutoff();
    return dt * nu * k * k <= 2.0;
}

SpectralField initial_condition(const SpectralField& u0, double epsilon, MollifierKind kind) {
    const Mollifier psi(epsilon, kind, u0.grid());
    return leray_project(truncate(mollify(u0, psi)));
}

Stepper::Stepper(const RunParams& params, const NoiseModel& noise, StepHooks hooks)
    : params_(params), noise_(noise), hooks_(hooks), psi_(params.epsilon, params.mollifier, params.grid) {
    params_.validate();
    if (!(noise.grid() == params.grid)) throw ConfigError("noise model grid differs from run grid");
    if (noise.active()) n_terms_ = std::min(TruncationLevel::from_epsilon(params.epsilon).N, noise.max_k());
    if (noise.kind() == NoiseKind::additive && n_terms_ > 0) {
        for (const auto& f : noise_.eval_all(n_terms_, SpectralField(params.grid)))
            additive_.push_back(leray_project(truncate(mollify(f, psi_))));
    }
}

SpectralField Stepper::drift(const SpectralField& u) const {
    SpectralField f(u.grid());
    if (!hooks_.disable_nonlinearity) {
        f = nonlinear_term(u, mollify(u, psi_));
        f *= -1.0;
        f = leray_project(f);
    }
    if (params_.scheme == Scheme::em_explicit) f.add_scaled(laplacian(u), params_.nu);
    return f;
}

std::vector<SpectralField> Stepper::noise_coefficients(const SpectralField& u) const {
    if (n_terms_ == 0) return {};
    if (noise_.kind() == NoiseKind::additive) return additive_;
    std::vector<SpectralField> g = noise_.eval_all(n_terms_, u);
    for (auto& f : g) f = leray_project(truncate(mollify(f, psi_)));
    return g;
}

ScalarField Stepper::pressure(const SpectralField& u) const {
    if (hooks_.disable_nonlinearity) return ScalarField(u.grid());
    return solve_pressure(mollify(u, psi_), u);
}

SpectralField Stepper::deterministic_update(const SpectralField& u) const {
    SpectralField w = u;
    w.add_scaled(drift(u), params_.dt);
    if (params_.scheme == Scheme::em_semi_implicit) w = heat_factor(w, params_.nu, params_.dt);
    return w;
}

SpectralField Stepper::advance(const SpectralField& u, std::int64_t step, const BrownianIncrements& incs) const {
    if (hooks_.frozen_state) return u;
    SpectralField w = u;
    w.add_scaled(drift(u), params_.dt);
    const auto g = noise_coefficients(u);
    for (int k = 1; k <= static_cast<int>(g.size()); ++k) w.add_scaled(g[k - 1], incs(k, step));
    if (params_.scheme == Scheme::em_semi_implicit) w = heat_factor(w, params_.nu, params_.dt);
    check_finite(w, step + 1);
    return w;
}

StepResult step(const SpectralField& u, std::int64_t step, const RunParams& params, const NoiseModel& noise,
                const BrownianIncrements& incs) {
    const Stepper s(params, noise);
    return {s.advance(u, step, incs), s.pressure(u)};
}

Trajectory integrate(const RunParams& params, const SpectralField& u0, const NoiseModel& noise, StepHooks hooks) {
    const Stepper stepper(params, noise, hooks);
    if (!(u0.grid() == params.grid)) throw ConfigError("initial field grid differs from run grid");
    Trajectory tr{params, noise, hooks, BrownianIncrements(params.seed, params.path_id, params.dt), {}, {}, {}, {}, {}};
    SpectralField u = initial_condition(u0, params.epsilon, params.mollifier);
    const std::int64_t n = params.steps();
    auto record = [&](std::int64_t j) {
        tr.times.push_back(static_cast<double>(j) * params.dt);
        tr.states.push_back(u);
        tr.pressures.push_back(stepper.pressure(u));
    };
    record(0);
    for (std::int64_t j = 0; j < n; ++j) {
        try {
            u = stepper.advance(u, j, tr.increments);
        } catch (const BlowUpError& e) {
            tr.blowup_step = e.step();
            tr.blowup_message = e.what();
            break;
        }
        if ((j + 1) % params.stride == 0) record(j + 1);
    }
    return tr;
}

std::vector<SpectralField> noise_term_path(const Trajectory& traj) {
    if (traj.stride() != 1) throw ContractViolation("noise_term_path needs a stride-1 trajectory");
    const Stepper stepper(traj.params, traj.noise, traj.hooks);
    std::vector<SpectralField> out;
    SpectralField acc(traj.params.grid);  // sum of dt * D(u_i)
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        SpectralField n = traj.states[j] - traj.states[0];
        n -= acc;
        out.push_back(std::move(n));
        if (j + 1 < traj.states.size()) {
            acc += stepper.deterministic_update(traj.states[j]);
            acc -= traj.states[j];
        }
    }
    return out;
}

double fractional_sobolev_norm(const std::vector<SpectralField>& series, double dt, double alpha, double r) {
    if (series.size() < 2) throw ConfigError("fractional Sobolev norm needs at least two time points");
    if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 1/2)");
    if (!(r >= 2.0)) throw ConfigError("r must be >= 2");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    const std::size_t n = series.size();
    std::vector<double> w(n, dt);
    w.front() = w.back() = 0.5 * dt;
    double first = 0.0;
    for (std::size_t i = 0; i < n; ++i) first += w[i] * std::pow(std::sqrt(series[i].l2_norm_squared()), r);
    double second = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::sqrt((series[i] - series[j]).l2_norm_squared());
            const double gap = static_cast<double>(j - i) * dt;
            second += 2.0 * w[i] * w[j] * std::pow(d, r) / std::pow(gap, 1.0 + alpha * r);
        }
    return first + second;
}

}  // namespace lsns
