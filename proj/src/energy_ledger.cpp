#include "lsns/energy_ledger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lsns/errors.hpp"
#include "lsns/spectral.hpp"

namespace lsns {
namespace {

constexpr std::size_t min_paths = 100;

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// mean over the grid of sum_c a_c b_c w
double weighted_dot(const PhysicalVector& a, const PhysicalVector& b, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x)
        s += (a.values[0][x] * b.values[0][x] + a.values[1][x] * b.values[1][x] + a.values[2][x] * b.values[2][x]) *
             w[x];
    return s / static_cast<double>(w.size());
}

std::vector<double> squared_norm(const PhysicalVector& a) {
    std::vector<double> out(a.size());
    for (std::size_t x = 0; x < out.size(); ++x)
        out[x] = a.values[0][x] * a.values[0][x] + a.values[1][x] * a.values[1][x] + a.values[2][x] * a.values[2][x];
    return out;
}

void require_ensemble(std::span<const EnergyLedger> ensemble, std::size_t minimum, const char* what) {
    if (ensemble.size() < minimum)
        throw ConfigError(std::string(what) + " needs at least " + std::to_string(minimum) + " paths");
    for (const auto& l : ensemble)
        if (l.rows.empty()) throw ConfigError(std::string(what) + ": empty ledger");
}

// u_n sqrt((1 - exp(-2a)) / 2a), a = 4 pi^2 nu |n|^2 dt: int_0^dt |grad exp(nu s Laplace) u|^2 ds
// = dt |grad of this|^2, mode by mode
SpectralField exponential_weight(const SpectralField& u, double nu, double dt) {
    const Grid& g = u.grid();
    SpectralField out(g);
    const double c = 4.0 * std::numbers::pi * std::numbers::pi * nu * dt;
    for (std::size_t fl = 0; fl < g.size(); ++fl) {
        const auto n = g.mode(fl);
        const double a = c * double(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        const double w = a > 0.0 ? std::sqrt(-std::expm1(-2.0 * a) / (2.0 * a)) : 1.0;
        for (int k = 0; k < 3; ++k) out.at(k, fl) = w * u.at(k, fl);
    }
    return out;
}

TwoSidedReport two_sided(const std::vector<double>& values) {
    TwoSidedReport r;
    r.summary = summarize(values);
    r.statistic = standardized(r.summary);
    r.pass = std::abs(r.statistic) <= 4.0;
    return r;
}

}  // namespace

EnergyLedgerBuilder::EnergyLedgerBuilder(const Stepper& stepper, const TestFunction& phi)
    : stepper_(&stepper), phi_(phi) {
    const Grid& g = stepper.params().grid;
    if (!(phi.spatial().grid() == g)) throw ConfigError("test function grid differs from run grid");
    const int k = g.dealias_cutoff();
    q_ = fft_friendly_size(std::max(3 * k, g.modes_per_axis() - 2) + phi.degree() + 1);
    s_ = sample_on(phi.spatial(), q_).values[0];
    lap_s_ = sample_on(phi.spatial_laplacian(), q_).values[0];
    const auto gs = sample_on(phi.spatial_gradient(), q_);
    for (int c = 0; c < 3; ++c) grad_s_[c] = gs.values[c];
}

double EnergyLedgerBuilder::local_energy(const SpectralField& u, double t) const {
    const double th = phi_.temporal().value(t);
    if (th == 0.0) return 0.0;
    const auto pu = sample_on(u, q_);
    const auto e = squared_norm(pu);
    double s = 0.0;
    for (std::size_t x = 0; x < e.size(); ++x) s += e[x] * s_[x];
    return th * s / static_cast<double>(e.size());
}

SpatialIntegrals EnergyLedgerBuilder::spatial_integrals(const SpectralField& u, const ScalarField& p) const {
    const Stepper& st = *stepper_;
    const bool semi = st.params().scheme == Scheme::em_semi_implicit;
    const double nu = st.params().nu, dt = st.params().dt;
    SpatialIntegrals out;
    out.noise_pairings.assign(st.noise_terms(), 0.0);
    const std::size_t npts = s_.size();
    const double inv = 1.0 / static_cast<double>(npts);
    const auto pu = sample_on(u, q_);
    const auto e = squared_norm(pu);

    double loc = 0.0;
    for (std::size_t x = 0; x < npts; ++x) loc += e[x] * s_[x];
    out.energy = loc * inv;

    const SpectralField uv = semi ? exponential_weight(u, nu, dt) : u;
    const auto ev = semi ? squared_norm(sample_on(uv, q_)) : e;
    double lap = 0.0;
    for (std::size_t x = 0; x < npts; ++x) lap += ev[x] * lap_s_[x];
    out.energy_laplacian = lap * inv;
    double ens = 0.0;
    for (int a = 0; a < 3; ++a) {
        const auto d2 = squared_norm(sample_on(partial(uv, a), q_));
        for (std::size_t x = 0; x < npts; ++x) ens += d2[x] * s_[x];
    }
    out.enstrophy = ens * inv;

    if (!st.hooks().disable_nonlinearity) {
        const auto v = mollify(u, st.mollifier());
        const auto pv = sample_on(v, q_);
        const auto pp = sample_on(p, q_).values[0];
        const auto nk = sample_on(nonlinear_term(u, v), q_);
        double fl = 0.0, adv = 0.0, cut = 0.0;
        for (std::size_t x = 0; x < npts; ++x) {
            double vg = 0.0, ug = 0.0, un = 0.0;
            for (int c = 0; c < 3; ++c) {
                vg += pv.values[c][x] * grad_s_[c][x];
                ug += pu.values[c][x] * grad_s_[c][x];
                un += pu.values[c][x] * nk.values[c][x];
            }
            adv += e[x] * vg;
            fl += e[x] * vg + 2.0 * pp[x] * ug;
            cut += un * s_[x];
        }
        out.flux = fl * inv;
        out.truncation_flux = (-2.0 * cut - adv) * inv;
    }

    const int n = st.noise_terms();
    if (n > 0) {
        const auto g = st.noise_coefficients(u);
        const auto pe = semi ? sample_on(heat_factor(u, nu, dt), q_) : pu;
        for (int k = 0; k < n; ++k) {
            const auto pg = sample_on(semi ? heat_factor(g[k], nu, dt) : g[k], q_);
            out.noise_pairings[k] = weighted_dot(pg, pe, s_);
            out.compensator += weighted_dot(pg, pg, s_);
        }
        const auto sig = st.noise().eval_all(n, u);
        for (int k = 0; k < n; ++k) {
            const auto ps = sample_on(sig[k], q_);
            out.compensator_unregularized += weighted_dot(ps, ps, s_);
        }
    }
    return out;
}

StepIntegrals EnergyLedgerBuilder::integrals(const SpectralField& u, const ScalarField& p, double t) const {
    const Stepper& st = *stepper_;
    StepIntegrals out;
    out.noise_pairings.assign(st.noise_terms(), 0.0);
    const double dt = st.params().dt;
    const double nu = st.params().nu;
    const double th0 = phi_.temporal().value(t);
    const double th = phi_.temporal().value(t + dt);
    if (th0 == 0.0 && th == 0.0) return out;

    const auto sp = spatial_integrals(u, p);
    out.local_energy = th0 * sp.energy;
    out.enstrophy_rate = 2.0 * nu * th * sp.enstrophy;
    out.transport_rate = (th - th0) / dt * sp.energy + nu * th * sp.energy_laplacian;
    out.flux_rate = th * sp.flux;
    out.truncation_flux_rate = th * sp.truncation_flux;
    out.compensator_rate = th * sp.compensator;
    out.compensator_unregularized_rate = th * sp.compensator_unregularized;
    for (std::size_t k = 0; k < sp.noise_pairings.size(); ++k) out.noise_pairings[k] = th * sp.noise_pairings[k];
    return out;
}

LedgerRow EnergyLedgerBuilder::initial_row(const SpectralField& u0) const {
    LedgerRow r;
    r.t = 0.0;
    r.l2_energy = u0.l2_norm_squared();
    r.local_energy = local_energy(u0, 0.0);
    r.initial_energy = r.local_energy;
    return r;
}

LedgerRow EnergyLedgerBuilder::next_row(const LedgerRow& prev, const SpectralField& u, const ScalarField& p,
                                        const SpectralField& u_next, std::int64_t j,
                                        const BrownianIncrements& incs) const {
    const double dt = stepper_->params().dt;
    const auto in = integrals(u, p, static_cast<double>(j) * dt);
    LedgerRow r = prev;
    r.t = static_cast<double>(j + 1) * dt;
    r.l2_energy = u_next.l2_norm_squared();
    r.local_energy = local_energy(u_next, r.t);
    r.enstrophy += in.enstrophy_rate * dt;
    r.transport += in.transport_rate * dt;
    r.flux += in.flux_rate * dt;
    r.truncation_flux += in.truncation_flux_rate * dt;
    r.compensator += in.compensator_rate * dt;
    r.compensator_unregularized += in.compensator_unregularized_rate * dt;
    double dm = 0.0, a2 = 0.0;
    for (std::size_t k = 0; k < in.noise_pairings.size(); ++k) {
        const double a = in.noise_pairings[k];
        if (a == 0.0) continue;
        dm += 2.0 * a * incs(static_cast<int>(k) + 1, j);
        a2 += a * a;
    }
    r.ito_martingale += dm;
    r.qv_ito_realized += dm * dm;
    r.qv_predicted += 4.0 * a2 * dt;
    r.residual = r.running_energy() - r.initial_energy - r.compensator;
    const double dn = r.residual - prev.residual;
    r.qv_realized += dn * dn;
    return r;
}

void ledger_step(const Trajectory& traj, std::size_t j, const TestFunction& phi, EnergyLedger& ledger) {
    if (traj.stride() != 1) throw ContractViolation("ledger needs a stride-1 trajectory");
    if (j + 1 >= traj.states.size()) throw ContractViolation("ledger step beyond the trajectory");
    const Stepper stepper(traj.params, traj.noise, traj.hooks);
    const EnergyLedgerBuilder b(stepper, phi);
    if (ledger.rows.empty() && j == 0) ledger.rows.push_back(b.initial_row(traj.states[0]));
    if (ledger.rows.size() != j + 1) throw ContractViolation("ledger must hold rows 0..j before step j");
    ledger.rows.push_back(b.next_row(ledger.rows.back(), traj.states[j], traj.pressures[j], traj.states[j + 1],
                                     static_cast<std::int64_t>(j), traj.increments));
}

EnergyLedger energy_ledger(const Trajectory& traj, const TestFunction& phi) {
    if (traj.stride() != 1) throw ContractViolation("ledger needs a stride-1 trajectory");
    EnergyLedger l;
    if (traj.states.empty()) return l;
    const Stepper stepper(traj.params, traj.noise, traj.hooks);
    const EnergyLedgerBuilder b(stepper, phi);
    l.rows.reserve(traj.states.size());
    l.rows.push_back(b.initial_row(traj.states[0]));
    for (std::size_t j = 0; j + 1 < traj.states.size(); ++j)
        l.rows.push_back(b.next_row(l.rows.back(), traj.states[j], traj.pressures[j], traj.states[j + 1],
                                    static_cast<std::int64_t>(j), traj.increments));
    return l;
}

double ledger_residual(const EnergyLedger& ledger, std::size_t j) {
    if (j >= ledger.rows.size()) throw ContractViolation("ledger not advanced to the requested step");
    return ledger.rows[j].residual;
}

QVSeries qv_estimate(const EnergyLedger& ledger) {
    QVSeries q;
    for (const auto& r : ledger.rows) {
        q.predicted.push_back(r.qv_predicted);
        q.realized.push_back(r.qv_realized);
    }
    return q;
}

const LedgerRow& LedgerHistory::row(std::size_t j) const {
    if (j > limit_) throw ContractViolation("event reads the path after its conditioning time");
    if (j >= ledger_->rows.size()) throw ContractViolation("ledger row out of range");
    return ledger_->rows[j];
}

std::vector<PathEvent> energy_split_events(std::span<const EnergyLedger> ensemble, std::size_t s) {
    std::vector<double> e;
    for (const auto& l : ensemble) {
        if (s >= l.rows.size()) throw ConfigError("conditioning time beyond a ledger");
        e.push_back(l.rows[s].l2_energy);
    }
    if (e.empty()) throw ConfigError("empty ensemble");
    std::sort(e.begin(), e.end());
    const std::size_t n = e.size();
    const double median = n % 2 ? e[n / 2] : 0.5 * (e[n / 2 - 1] + e[n / 2]);
    return {
        {"full", [](const LedgerHistory&) { return true; }},
        {"low_energy", [s, median](const LedgerHistory& h) { return h.row(s).l2_energy <= median; }},
        {"high_energy", [s, median](const LedgerHistory& h) { return h.row(s).l2_energy > median; }},
    };
}

MartingaleTestReport supermartingale_test(std::span<const EnergyLedger> ensemble, std::size_t s, std::size_t t,
                                          const std::vector<PathEvent>& events) {
    require_ensemble(ensemble, min_paths, "supermartingale test");
    if (s > t) throw ConfigError("supermartingale test needs s <= t");
    MartingaleTestReport rep;
    rep.s = s;
    rep.t = t;
    rep.pass = true;
    for (const auto& ev : events) {
        std::vector<double> inc;
        inc.reserve(ensemble.size());
        for (const auto& l : ensemble) {
            if (t >= l.rows.size()) throw ConfigError("test time beyond a ledger");
            const bool in = ev.indicator(LedgerHistory(l, s));
            const auto x = [&](std::size_t j) { return l.rows[j].running_energy() - l.rows[j].compensator; };
            inc.push_back(in ? x(t) - x(s) : 0.0);
        }
        OneSidedStatistic st{ev.name, summarize(inc), 0.0};
        st.statistic = standardized(st.summary);
        rep.pass = rep.pass && st.statistic <= 3.0;
        rep.statistics.push_back(st);
    }
    return rep;
}

TwoSidedReport martingale_zero_mean(std::span<const EnergyLedger> ensemble) {
    require_ensemble(ensemble, 2, "zero-mean check");
    std::vector<double> v;
    for (const auto& l : ensemble) v.push_back(l.rows.back().residual);
    return two_sided(v);
}

TwoSidedReport qv_consistency(std::span<const EnergyLedger> ensemble) {
    require_ensemble(ensemble, 2, "quadratic variation check");
    std::vector<double> v;
    for (const auto& l : ensemble) v.push_back(l.rows.back().qv_realized - l.rows.back().qv_predicted);
    return two_sided(v);
}

PathFunctional xi_one() {
    return [](const EnergyLedger&) { return 1.0; };
}

PathFunctional xi_inverse_energy() {
    return [](const EnergyLedger& l) {
        double m = 0.0;
        for (const auto& r : l.rows) m = std::max(m, r.l2_energy);
        return 1.0 / (1.0 + m);
    };
}

LEIReport lei_scalar_check(std::span<const EnergyLedger> ensemble, const PathFunctional& xi,
                           const std::string& xi_name) {
    require_ensemble(ensemble, 2, "local energy inequality check");
    LEIReport rep;
    rep.xi_name = xi_name;
    std::vector<double> lhs, rhs, diff;
    for (const auto& l : ensemble) {
        const double w = xi(l);
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("xi must be finite and nonnegative on every path");
        const auto& r = l.rows.back();
        lhs.push_back(w * r.running_energy());
        rhs.push_back(w * (r.initial_energy + r.compensator + r.ito_martingale));
        diff.push_back(lhs.back() - rhs.back());
    }
    rep.lhs = mean_of(lhs);
    rep.rhs = mean_of(rhs);
    rep.difference = summarize(diff);
    rep.statistic = standardized(rep.difference);
    rep.pass = rep.difference.mean <= 3.0 * rep.difference.stderr_mean;
    return rep;
}

ContinuityReport martingale_map_continuity(std::span<const Trajectory> ensemble, const TestFunction& phi1,
                                           const TestFunction& phi2, double alpha) {
    if (!(alpha >= 1.0 && alpha < 4.0)) throw ConfigError("alpha must lie in [1, 4)");
    if (!(phi1.temporal() == phi2.temporal())) throw ConfigError("test functions must share a temporal cut-off");
    if (ensemble.empty()) throw ConfigError("empty ensemble");
    ContinuityReport rep;
    double num = 0.0;
    for (const auto& tr : ensemble) {
        const auto l1 = energy_ledger(tr, phi1);
        const auto l2 = energy_ledger(tr, phi2);
        double sup = 0.0;
        for (std::size_t j = 0; j < l1.rows.size(); ++j)
            sup = std::max(sup, std::abs(l1.rows[j].residual - l2.rows[j].residual));
        num += std::pow(sup, alpha);
    }
    rep.numerator = num / static_cast<double>(ensemble.size());

    // ||theta (S1 - S2)||_5^5 = int theta^5 dt * int |S1 - S2|^5 dx
    const auto& tmp = phi1.temporal();
    const double T = ensemble.front().params.T;
    const int nt = 4096;
    double time_part = 0.0;
    for (int i = 0; i <= nt; ++i) {
        const double w = (i == 0 || i == nt) ? 0.5 : 1.0;
        time_part += w * std::pow(std::abs(tmp.value(T * i / nt)), 5.0);
    }
    time_part *= T / nt;
    const auto d = sample_on(phi1.spatial() - phi2.spatial(), 4 * phi1.spatial().grid().modes_per_axis());
    double space_part = 0.0;
    for (double v : d.values[0]) space_part += std::pow(std::abs(v), 5.0);
    space_part /= static_cast<double>(d.size());
    rep.denominator = std::pow(time_part * space_part, alpha / 5.0);
    if (rep.denominator > 0.0)
        rep.ratio = rep.numerator / rep.denominator;
    else
        rep.ratio = rep.numerator == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace lsns
