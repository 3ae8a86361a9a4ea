#include "lsns/dissipation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsns/errors.hpp"
#include "lsns/spectral.hpp"

namespace lsns {

namespace {

constexpr std::size_t min_paths = 100;

void check_ell(double ell) {
    if (!(ell > 0.0) || !(ell <= 0.25)) throw ConfigError("dissipation scale must satisfy 0 < l <= 1/4");
}

double sup_norm(const PhysicalScalar& s) {
    double m = 0.0;
    for (double v : s.values[0]) m = std::max(m, std::abs(v));
    return m;
}

// Products of u that do not depend on the scale, transformed on the padded grid.
struct Products {
    PhysicalVector u;
    ScalarField energy;                    // |u|^2
    SpectralField cubic;                   // u |u|^2
    std::array<SpectralField, 3> stress;   // column j: (u^i u^j)_i
};

Products products(const SpectralField& u, const Grid& padded) {
    const int p = padded.modes_per_axis();
    Products out;
    out.u = sample_on(u, p);
    PhysicalScalar e(p);
    PhysicalVector cubic(p);
    std::array<PhysicalVector, 3> stress{PhysicalVector(p), PhysicalVector(p), PhysicalVector(p)};
    for (std::size_t x = 0; x < e.size(); ++x) {
        const double a = out.u.values[0][x], b = out.u.values[1][x], c = out.u.values[2][x];
        const double uu[3] = {a, b, c};
        const double q = a * a + b * b + c * c;
        e.values[0][x] = q;
        for (int i = 0; i < 3; ++i) {
            cubic.values[i][x] = uu[i] * q;
            for (int j = 0; j < 3; ++j) stress[j].values[i][x] = uu[i] * uu[j];
        }
    }
    out.energy = transform_onto(e, padded);
    out.cubic = transform_onto(cubic, padded);
    for (int j = 0; j < 3; ++j) out.stress[j] = transform_onto(stress[j], padded);
    return out;
}

}  // namespace

void DRConfig::validate(const Grid& grid) const {
    if (ell_values.empty()) throw ConfigError("dissipation config needs at least one scale");
    if (quadrature < 2) throw ConfigError("dissipation quadrature must be >= 2");
    const double finest = 2.0 / grid.modes_per_axis();
    for (std::size_t i = 0; i < ell_values.size(); ++i) {
        check_ell(ell_values[i]);
        if (ell_values[i] < finest) throw ConfigError("dissipation scale below 2/M is under-resolved");
        if (i > 0 && !(ell_values[i] < ell_values[i - 1]))
            throw ConfigError("dissipation scales must be strictly decreasing");
    }
}

DRConfig DRConfig::default_for(const Grid& grid) {
    DRConfig c;
    for (double ell : {0.25, 0.125, 0.0625, 0.03125})
        if (ell >= 2.0 / grid.modes_per_axis()) c.ell_values.push_back(ell);
    return c;
}

DREvaluator::DREvaluator(const Grid& grid, double ell, MollifierKind kind, int min_points)
    : grid_(grid),
      ell_((check_ell(ell), ell)),
      p_(fft_friendly_size(std::max(6 * grid.dealias_cutoff() + 1, min_points))),
      alpha_(ell, kind, grid),
      alpha_padded_(ell, kind, Grid(p_, p_ / 2)) {
    padded_ = Grid(p_, p_ / 2);
}

DRTerms DREvaluator::terms(const SpectralField& u) const {
    if (!(u.grid() == grid_)) throw ConfigError("dissipation evaluator used on another grid");
    const Products pr = products(u, padded_);
    const auto& uv = pr.u.values;

    const PhysicalVector grad_e = inverse_transform(gradient(mollify(pr.energy, alpha_padded_)));
    const PhysicalScalar div_c = inverse_transform(divergence(mollify(pr.cubic, alpha_padded_)));
    std::array<PhysicalScalar, 3> div_s;
    for (int j = 0; j < 3; ++j) div_s[j] = inverse_transform(divergence(mollify(pr.stress[j], alpha_padded_)));
    // grad_u[i] holds d_i u_l, all components
    const SpectralField ul = mollify(u, alpha_);
    std::array<PhysicalVector, 3> grad_u;
    for (int i = 0; i < 3; ++i) grad_u[i] = sample_on(partial(ul, i), p_);

    DRTerms t;
    for (auto* s : {&t.advect_energy, &t.div_cubic, &t.advect_stress, &t.stress_strain, &t.dissipation})
        *s = PhysicalScalar(p_);
    for (std::size_t x = 0; x < t.dissipation.size(); ++x) {
        double a = 0.0, c = 0.0, d = 0.0;
        for (int i = 0; i < 3; ++i) {
            a += uv[i][x] * grad_e.values[i][x];
            c += uv[i][x] * div_s[i].values[0][x];
            for (int j = 0; j < 3; ++j) d += uv[i][x] * uv[j][x] * grad_u[i].values[j][x];
        }
        t.advect_energy.values[0][x] = a;
        t.div_cubic.values[0][x] = div_c.values[0][x];
        t.advect_stress.values[0][x] = 2.0 * c;
        t.stress_strain.values[0][x] = 2.0 * d;
        t.dissipation.values[0][x] = 0.25 * (a - div_c.values[0][x] + 2.0 * c - 2.0 * d);
    }
    return t;
}

ScalarField DREvaluator::integrand(const SpectralField& u) const {
    return transform_onto(terms(u).dissipation, padded_);
}

double DREvaluator::identity_residual(const SpectralField& u) const {
    const DRTerms t = terms(u);
    const Products pr = products(u, padded_);
    // div[u (|u|^2)_l], formed as a product first and differentiated spectrally
    const PhysicalScalar el = inverse_transform(mollify(pr.energy, alpha_padded_));
    PhysicalVector flux(p_);
    for (std::size_t x = 0; x < flux.size(); ++x)
        for (int i = 0; i < 3; ++i) flux.values[i][x] = pr.u.values[i][x] * el.values[0][x];
    const PhysicalScalar div_flux = inverse_transform(divergence(transform_onto(flux, padded_)));

    double scale = 0.0;
    for (const auto* s : {&t.advect_energy, &t.div_cubic, &t.advect_stress, &t.stress_strain})
        scale = std::max(scale, sup_norm(*s));
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t x = 0; x < flux.size(); ++x) {
        const double lhs = 4.0 * t.dissipation.values[0][x];
        const double rhs = div_flux.values[0][x] - t.div_cubic.values[0][x] + t.advect_stress.values[0][x] -
                           t.stress_strain.values[0][x];
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst / scale;
}

ScalarField dr_integrand(const SpectralField& u, double ell, MollifierKind kind) {
    return DREvaluator(u.grid(), ell, kind).integrand(u);
}

double commutator_identity_check(const SpectralField& u, double ell, MollifierKind kind) {
    return DREvaluator(u.grid(), ell, kind).identity_residual(u);
}

double DRLedger::worst_closure() const {
    double w = 0.0;
    for (double c : closure) w = std::max(w, std::abs(c));
    return w;
}

DRLedgerBuilder::DRLedgerBuilder(const Grid& grid, double dt, const TestFunction& phi, const DRConfig& config)
    : dt_(dt), phi_(phi) {
    config.validate(grid);
    // D^l has degree 3K and S degree d: their product integrates exactly on more than 3K + d points
    const int min_points = 3 * grid.dealias_cutoff() + phi.degree() + 1;
    for (double ell : config.ell_values) evaluators_.emplace_back(grid, ell, config.alpha_kind, min_points);
    s_ = sample_on(phi.spatial(), evaluators_.front().padded_points()).values[0];
}

std::vector<double> DRLedgerBuilder::spatial_integrals(const SpectralField& u) const {
    std::vector<double> out;
    for (const auto& ev : evaluators_) {
        const DRTerms t = ev.terms(u);
        const auto& d = t.dissipation.values[0];
        double s = 0.0;
        for (std::size_t x = 0; x < d.size(); ++x) s += d[x] * s_[x];
        out.push_back(s / static_cast<double>(d.size()));
    }
    return out;
}

void DRLedgerBuilder::start(DRLedger& ledger, double t0) const {
    ledger = DRLedger{};
    for (const auto& ev : evaluators_) ledger.ell_values.push_back(ev.ell());
    ledger.times.push_back(t0);
    ledger.series.assign(evaluators_.size(), std::vector<double>{0.0});
    ledger.closure.push_back(0.0);
}

void DRLedgerBuilder::step(DRLedger& ledger, const SpectralField& u, double t, const LedgerRow& energy_next) const {
    const double theta = phi_.temporal().value(t + dt_);
    const std::vector<double> rates =
        theta == 0.0 ? std::vector<double>(evaluators_.size(), 0.0) : spatial_integrals(u);
    for (std::size_t i = 0; i < rates.size(); ++i)
        ledger.series[i].push_back(ledger.series[i].back() + dt_ * theta * rates[i]);
    ledger.times.push_back(energy_next.t);
    const auto& r = energy_next;
    ledger.closure.push_back(r.running_energy() + 2.0 * ledger.series.back().back() -
                             (r.initial_energy + r.compensator + r.ito_martingale));
}

void DRLedgerBuilder::finish(DRLedger& ledger) const {
    ledger.cauchy_differences.clear();
    for (std::size_t i = 0; i + 1 < ledger.series.size(); ++i) {
        double w = 0.0;
        for (std::size_t j = 0; j < ledger.series[i].size(); ++j)
            w = std::max(w, std::abs(ledger.series[i][j] - ledger.series[i + 1][j]));
        ledger.cauchy_differences.push_back(w);
    }
}

DRLedger dr_ledger(const Trajectory& traj, const TestFunction& phi, const DRConfig& config,
                   const EnergyLedger& energy) {
    if (traj.stride() != 1) throw ContractViolation("dissipation ledger needs a stride-1 trajectory");
    if (energy.rows.size() != traj.states.size()) throw ContractViolation("energy ledger does not match trajectory");
    const DRLedgerBuilder b(traj.params.grid, traj.params.dt, phi, config);
    DRLedger l;
    b.start(l, traj.times.front());
    for (std::size_t j = 0; j + 1 < traj.states.size(); ++j) b.step(l, traj.states[j], traj.times[j], energy.rows[j + 1]);
    b.finish(l);
    return l;
}

DRLedger dr_ledger(const Trajectory& traj, const TestFunction& phi, const DRConfig& config) {
    return dr_ledger(traj, phi, config, energy_ledger(traj, phi));
}

MartingaleTestReport dissipation_submartingale_test(std::span<const DRLedger> dr,
                                                    std::span<const EnergyLedger> energy, std::size_t s,
                                                    std::size_t t, const std::vector<PathEvent>& events) {
    if (dr.size() < min_paths)
        throw ConfigError("dissipation submartingale test needs at least " + std::to_string(min_paths) + " paths");
    if (dr.size() != energy.size()) throw ConfigError("dissipation and energy ensembles differ in size");
    if (s > t) throw ConfigError("dissipation submartingale test needs s <= t");
    MartingaleTestReport rep;
    rep.s = s;
    rep.t = t;
    rep.pass = true;
    for (const auto& ev : events) {
        std::vector<double> inc;
        inc.reserve(dr.size());
        for (std::size_t p = 0; p < dr.size(); ++p) {
            if (dr[p].series.empty() || t >= dr[p].finest().size() || t >= energy[p].rows.size())
                throw ConfigError("test time beyond a ledger");
            const bool in = ev.indicator(LedgerHistory(energy[p], s));
            inc.push_back(in ? dr[p].finest()[t] - dr[p].finest()[s] : 0.0);
        }
        OneSidedStatistic st{ev.name, summarize(inc), 0.0};
        st.statistic = standardized(st.summary);
        rep.pass = rep.pass && st.statistic >= -3.0;
        rep.statistics.push_back(st);
    }
    return rep;
}

}  // namespace lsns
