#include "lsns/vorticity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "lsns/errors.hpp"
#include "lsns/spectral.hpp"

namespace lsns {

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

std::string witness(const char* what, const Vec3& y, const Vec3& eta) {
    std::ostringstream os;
    os.precision(17);
    os << what << " violated at y = (" << y[0] << ", " << y[1] << ", " << y[2] << "), eta = (" << eta[0] << ", "
       << eta[1] << ", " << eta[2] << ")";
    return os.str();
}

TwoSidedReport two_sided(const std::vector<double>& values) {
    TwoSidedReport r;
    r.summary = summarize(values);
    r.statistic = standardized(r.summary);
    r.pass = std::abs(r.statistic) <= 4.0;
    return r;
}

void require_rows(std::span<const VorticityLedger> ensemble, std::size_t minimum, const char* what) {
    if (ensemble.size() < minimum)
        throw ConfigError(std::string(what) + " needs at least " + std::to_string(minimum) + " paths");
    for (const auto& l : ensemble)
        if (l.rows.empty()) throw ConfigError(std::string(what) + ": empty ledger");
}

}  // namespace

HFunction::HFunction(double delta) : delta_(delta) {
    if (!(delta > 0.0) || !(delta <= 0.5)) throw ConfigError("delta must satisfy 0 < delta <= 1/2");
}

HFunction::Values HFunction::eval(double r) const {
    if (!(r >= 1.0)) throw ConfigError("h is evaluated only at r >= 1");
    const double d = delta_;
    const double s = std::sqrt(r);
    const double a = std::pow(r, 0.5 * (1.0 - d));  // r^((1-d)/2)
    Values v;
    v.h = s - a / (2.0 * (1.0 - d));
    v.dh = 0.5 / s - 0.25 * a / r;                                 // 1/(2 r^(1/2)) - 1/(4 r^((1+d)/2))
    v.d2h = -0.25 / (s * r) + 0.125 * (1.0 + d) * a / (r * r);     // -r^(-3/2)/4 + (1+d) r^(-(3+d)/2)/8
    return v;
}

double HFunction::q(const Vec3& y) const { return eval(1.0 + dot(y, y)).h; }

double HFunction::quadratic_form(const Vec3& y, const Vec3& eta) const {
    const Values v = eval(1.0 + dot(y, y));
    const double ey = dot(eta, y);
    return 2.0 * dot(eta, eta) * v.dh + 4.0 * ey * ey * v.d2h;
}

HFunction::Values h_eval(const HFunction& hf, double r) { return hf.eval(r); }

QDerivatives q_gradient_hessian(const HFunction& hf, const Vec3& y) {
    const HFunction::Values v = hf.eval(1.0 + dot(y, y));
    QDerivatives out;
    out.q = v.h;
    for (int i = 0; i < 3; ++i) {
        out.gradient[i] = 2.0 * y[i] * v.dh;
        for (int j = 0; j < 3; ++j) out.hessian[i][j] = (i == j ? 2.0 * v.dh : 0.0) + 4.0 * v.d2h * y[i] * y[j];
    }
    return out;
}

HessianBoundsReport hessian_bounds_check(const HFunction& hf, std::int64_t samples, std::uint64_t seed,
                                         double max_norm) {
    if (samples < 1) throw ConfigError("hessian bounds check needs at least one sample");
    if (!(max_norm > 1e-6)) throw ConfigError("hessian bounds check needs max_norm > 1e-6");
    const double d = hf.delta();
    const double sandwich_c = (1.0 - 2.0 * d) / (2.0 * (1.0 - d));
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> log_norm(std::log(1e-6), std::log(max_norm));
    const auto direction = [&] {
        Vec3 v{normal(gen), normal(gen), normal(gen)};
        const double n = std::sqrt(dot(v, v));
        for (auto& c : v) c /= n;
        return v;
    };

    HessianBoundsReport rep;
    rep.delta = d;
    rep.samples = samples;
    const double inf = std::numeric_limits<double>::infinity();
    rep.lower_margin = rep.upper_margin = rep.gradient_margin = inf;
    rep.sandwich_lower_margin = rep.sandwich_upper_margin = inf;
    for (std::int64_t i = 0; i < samples; ++i) {
        Vec3 y = direction();
        const double norm = std::exp(log_norm(gen));
        for (auto& c : y) c *= norm;
        Vec3 eta = direction();
        if (i % 3 == 0) {
            eta = y;  // parallel
        } else if (i % 3 == 1) {
            const double proj = dot(eta, y) / dot(y, y);
            for (int c = 0; c < 3; ++c) eta[c] -= proj * y[c];  // orthogonal
        }
        const double eta2 = dot(eta, eta);
        if (eta2 == 0.0) continue;
        const double r = 1.0 + dot(y, y);
        const double form = hf.quadratic_form(y, eta);
        const double lower = 0.5 * d * std::pow(r, -0.5 * (1.0 + d)) * eta2;
        const double upper = 2.0 / std::sqrt(r) * eta2;
        const QDerivatives qd = q_gradient_hessian(hf, y);
        const double grad = std::sqrt(dot(qd.gradient, qd.gradient));
        const double root = std::sqrt(r);

        const double lm = form / lower - 1.0;
        const double um = 1.0 - std::abs(form) / upper;
        const double gm = 1.0 - grad;
        const double slm = sandwich_c > 0.0 ? qd.q / (sandwich_c * root) - 1.0 : qd.q;
        const double sum = 1.0 - qd.q / root;
        if (!(lm > 0.0)) throw VerificationFailure(witness("lower Hessian bound", y, eta));
        if (!(um > 0.0)) throw VerificationFailure(witness("upper Hessian bound", y, eta));
        if (!(gm >= 0.0)) throw VerificationFailure(witness("|grad q| <= 1", y, eta));
        if (!(slm >= 0.0)) throw VerificationFailure(witness("lower q sandwich", y, eta));
        if (!(sum >= 0.0)) throw VerificationFailure(witness("upper q sandwich", y, eta));
        rep.lower_margin = std::min(rep.lower_margin, lm);
        rep.upper_margin = std::min(rep.upper_margin, um);
        rep.gradient_margin = std::min(rep.gradient_margin, gm);
        rep.sandwich_lower_margin = std::min(rep.sandwich_lower_margin, slm);
        rep.sandwich_upper_margin = std::min(rep.sandwich_upper_margin, sum);
    }
    rep.pass = true;
    return rep;
}

double VorticityRow::holder_margin(double delta) const {
    const double rhs = std::pow(weighted_enstrophy, 2.0 / (3.0 + delta)) *
                       std::pow(energy_weight, (1.0 + delta) / (3.0 + delta));
    return rhs - gradient_norm;
}

bool VorticityRow::norm_chain_holds() const { return l1 <= sqrt_energy && sqrt_energy <= 1.0 + l1; }

VorticityLedgerBuilder::VorticityLedgerBuilder(const Stepper& stepper, const HFunction& hf, int points)
    : stepper_(&stepper), hf_(hf), p_(points > 0 ? points : stepper.params().grid.modes_per_axis()) {
    if (p_ % 2 != 0 || p_ < stepper.params().grid.modes_per_axis())
        throw ConfigError("vorticity quadrature grid must be even and at least M");
}

VorticityRow VorticityLedgerBuilder::pointwise(const SpectralField& u, double t) const {
    const SpectralField w = curl(u);
    const SpectralField v = mollify(u, stepper_->mollifier());
    const PhysicalVector ws = sample_on(w, p_);
    std::array<PhysicalVector, 3> gw, gv, gu;  // d_l w, d_l v, d_l u
    for (int l = 0; l < 3; ++l) {
        gw[l] = sample_on(partial(w, l), p_);
        gv[l] = sample_on(partial(v, l), p_);
        gu[l] = sample_on(partial(u, l), p_);
    }
    SpectralField drift = stepper_->drift(u);
    if (stepper_->params().scheme == Scheme::em_semi_implicit) drift.add_scaled(laplacian(u), stepper_->params().nu);
    const PhysicalVector dw = sample_on(curl(drift), p_);
    std::vector<PhysicalVector> rho;
    for (const auto& g : stepper_->noise_coefficients(u)) rho.push_back(sample_on(curl(g), p_));

    const double d = hf_.delta();
    const double expo = hf_.gradient_exponent();
    VorticityRow row;
    row.t = t;
    row.noise_pairings.assign(rho.size(), 0.0);
    const std::size_t n = ws.size();
    for (std::size_t x = 0; x < n; ++x) {
        const Vec3 y{ws.values[0][x], ws.values[1][x], ws.values[2][x]};
        const double y2 = dot(y, y);
        const double r = 1.0 + y2;
        const HFunction::Values h = hf_.eval(r);
        const Vec3 gq{2.0 * y[0] * h.dh, 2.0 * y[1] * h.dh, 2.0 * y[2] * h.dh};
        const auto form = [&](const Vec3& e) {
            const double ey = dot(e, y);
            return 2.0 * dot(e, e) * h.dh + 4.0 * ey * ey * h.d2h;
        };

        double grad2 = 0.0, hess = 0.0;
        for (int l = 0; l < 3; ++l) {
            const Vec3 e{gw[l].values[0][x], gw[l].values[1][x], gw[l].values[2][x]};
            grad2 += dot(e, e);
            hess += form(e);
        }
        // C_jk = sum_l (d_j v_l)(d_l u_k), stretching vector s_i = e_ijk C_jk
        Mat3 c{};
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) c[j][k] += gv[j].values[l][x] * gu[l].values[k][x];
        const Vec3 s{c[1][2] - c[2][1], c[2][0] - c[0][2], c[0][1] - c[1][0]};

        const double weight = std::pow(r, -0.5 * (1.0 + d));
        row.l1 += std::sqrt(y2);
        row.sqrt_energy += std::sqrt(r);
        row.energy_weight += r;
        row.w_integral += h.h;
        row.hessian_enstrophy += hess;
        row.weighted_enstrophy += weight * grad2;
        row.stretching += dot(s, gq);
        row.quadrature_defect += gq[0] * dw.values[0][x] + gq[1] * dw.values[1][x] + gq[2] * dw.values[2][x];
        row.gradient_norm += std::pow(grad2, 0.5 * expo);
        for (std::size_t k = 0; k < rho.size(); ++k) {
            const Vec3 e{rho[k].values[0][x], rho[k].values[1][x], rho[k].values[2][x]};
            row.noise_compensator += 0.5 * form(e);
            row.noise_pairings[k] += dot(e, gq);
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (double* f : {&row.l1, &row.sqrt_energy, &row.energy_weight, &row.w_integral, &row.hessian_enstrophy,
                      &row.weighted_enstrophy, &row.stretching, &row.gradient_norm, &row.noise_compensator,
                      &row.quadrature_defect})
        *f *= inv;
    row.quadrature_defect += stepper_->params().nu * row.hessian_enstrophy + row.stretching;
    for (auto& a : row.noise_pairings) a *= inv;
    row.hessian_lower = 0.5 * d * row.weighted_enstrophy;
    return row;
}

VorticityRow VorticityLedgerBuilder::initial_row(const SpectralField& u0) const {
    VorticityRow r = pointwise(u0, 0.0);
    r.initial_w = r.w_integral;
    return r;
}

VorticityRow VorticityLedgerBuilder::next_row(const VorticityRow& prev, const SpectralField& u_next, std::int64_t j,
                                              const BrownianIncrements& incs) const {
    const double dt = stepper_->params().dt;
    VorticityRow r = pointwise(u_next, static_cast<double>(j + 1) * dt);
    r.initial_w = prev.initial_w;
    r.viscous_sum = prev.viscous_sum + stepper_->params().nu * prev.hessian_enstrophy * dt;
    r.stretching_sum = prev.stretching_sum + prev.stretching * dt;
    r.compensator_sum = prev.compensator_sum + prev.noise_compensator * dt;
    r.gradient_sum = prev.gradient_sum + prev.gradient_norm * dt;
    r.defect_sum = prev.defect_sum + prev.quadrature_defect * dt;
    double dm = 0.0, a2 = 0.0;
    for (std::size_t k = 0; k < prev.noise_pairings.size(); ++k) {
        const double a = prev.noise_pairings[k];
        dm += a * incs(static_cast<int>(k) + 1, j);
        a2 += a * a;
    }
    r.ito_martingale = prev.ito_martingale + dm;
    r.qv_predicted = prev.qv_predicted + a2 * dt;
    r.residual = r.w_integral - r.initial_w + r.viscous_sum + r.stretching_sum - r.defect_sum - r.compensator_sum;
    const double dres = r.residual - prev.residual;
    r.qv_realized = prev.qv_realized + dres * dres;
    return r;
}

VorticityLedger VorticityLedgerBuilder::start(const SpectralField& u0) const {
    VorticityLedger l;
    l.delta = hf_.delta();
    l.epsilon = stepper_->params().epsilon;
    l.dt = stepper_->params().dt;
    l.rows.push_back(initial_row(u0));
    return l;
}

void vorticity_ledger_step(const Trajectory& traj, std::size_t j, const HFunction& hf, VorticityLedger& ledger) {
    if (traj.stride() != 1) throw ContractViolation("vorticity ledger needs a stride-1 trajectory");
    if (j + 1 >= traj.states.size()) throw ContractViolation("vorticity ledger step beyond the trajectory");
    if (ledger.rows.size() != j + 1) throw ContractViolation("vorticity ledger must hold rows 0..j");
    const Stepper stepper(traj.params, traj.noise, traj.hooks);
    const VorticityLedgerBuilder b(stepper, hf);
    ledger.rows.push_back(b.next_row(ledger.rows.back(), traj.states[j + 1], static_cast<std::int64_t>(j),
                                     traj.increments));
}

VorticityLedger vorticity_ledger(const Trajectory& traj, const HFunction& hf) {
    if (traj.stride() != 1) throw ContractViolation("vorticity ledger needs a stride-1 trajectory");
    const Stepper stepper(traj.params, traj.noise, traj.hooks);
    const VorticityLedgerBuilder b(stepper, hf);
    VorticityLedger l = b.start(traj.states.front());
    for (std::size_t j = 0; j + 1 < traj.states.size(); ++j)
        l.rows.push_back(b.next_row(l.rows.back(), traj.states[j + 1], static_cast<std::int64_t>(j), traj.increments));
    return l;
}

TwoSidedReport vorticity_residual_zero_mean(std::span<const VorticityLedger> ensemble) {
    require_rows(ensemble, 2, "vorticity zero-mean check");
    std::vector<double> v;
    for (const auto& l : ensemble) v.push_back(l.rows.back().residual);
    return two_sided(v);
}

TwoSidedReport vorticity_qv_consistency(std::span<const VorticityLedger> ensemble) {
    require_rows(ensemble, 2, "vorticity quadratic variation check");
    std::vector<double> v;
    for (const auto& l : ensemble) v.push_back(l.rows.back().qv_realized - l.rows.back().qv_predicted);
    return two_sided(v);
}

VorticityBoundsReport vorticity_bounds_report(std::span<const VorticityLedger> ensemble) {
    require_rows(ensemble, 1, "vorticity bounds report");
    VorticityBoundsReport rep;
    rep.epsilon = ensemble.front().epsilon;
    rep.delta = ensemble.front().delta;
    rep.min_holder_margin = std::numeric_limits<double>::infinity();
    rep.norm_chain_pass = true;
    std::vector<double> sup_l1, grad;
    for (const auto& l : ensemble) {
        if (l.epsilon != rep.epsilon || l.delta != rep.delta)
            throw ConfigError("vorticity bounds report needs one epsilon and one delta");
        double s = 0.0;
        for (const auto& r : l.rows) {
            s = std::max(s, r.l1);
            rep.min_holder_margin = std::min(rep.min_holder_margin, r.holder_margin(rep.delta));
            rep.norm_chain_pass = rep.norm_chain_pass && r.norm_chain_holds();
        }
        sup_l1.push_back(s);
        grad.push_back(l.rows.back().gradient_sum);
    }
    rep.sup_l1 = summarize(sup_l1);
    rep.gradient_time = summarize(grad);
    rep.holder_pass = rep.min_holder_margin >= 0.0;
    return rep;
}

LadderTrend epsilon_ladder_trend(const std::vector<VorticityBoundsReport>& reports) {
    if (reports.empty()) throw ConfigError("epsilon ladder needs at least one report");
    LadderTrend t;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (i > 0 && !(reports[i].epsilon < reports[i - 1].epsilon))
            throw ConfigError("epsilon ladder must be strictly decreasing");
        t.epsilon.push_back(reports[i].epsilon);
        t.sup_l1.push_back(reports[i].sup_l1.mean);
        t.gradient_time.push_back(reports[i].gradient_time.mean);
    }
    const auto blows_up = [](const std::vector<double>& v) {
        if (v.size() < 2) return false;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) return false;
        return v.back() > 2.0 * v.front();
    };
    t.pass = !blows_up(t.sup_l1) && !blows_up(t.gradient_time);
    return t;
}

}  // namespace lsns
