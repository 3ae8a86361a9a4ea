#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lsns/energy_ledger.hpp"
#include "lsns/errors.hpp"
#include "lsns/initial_conditions.hpp"
#include "lsns/oracles.hpp"
#include "lsns/spectral.hpp"

using namespace lsns;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

RunParams small_params(Scheme scheme = Scheme::em_semi_implicit) {
    RunParams p;
    p.grid = Grid(8);
    p.nu = 0.02;
    p.epsilon = 0.25;
    p.dt = 1.0 / 32;
    p.T = 0.25;
    p.seed = 5;
    p.scheme = scheme;
    return p;
}

NoiseModel noise_of(NoiseKind kind, double amplitude, const Grid& g, int terms = 0) {
    NoiseSpec s;
    s.kind = kind;
    s.amplitude = amplitude;
    s.terms = terms;
    return NoiseModel(s, g);
}

TestFunction bump(const Grid& g, int power, const TemporalCutoff& tc = {}) {
    return TestFunction::raised_cosine(g, power, {0.3, 0.6, 0.1}, tc);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

std::vector<EnergyLedger> ensemble(const RunParams& base, const NoiseModel& nm, const SpectralField& u0,
                                   const TestFunction& phi, int paths, StepHooks hooks = {}) {
    std::vector<EnergyLedger> out;
    for (int i = 0; i < paths; ++i) {
        RunParams p = base;
        p.path_id = static_cast<std::uint32_t>(i);
        out.push_back(energy_ledger(integrate(p, u0, nm, hooks), phi));
    }
    return out;
}

}  // namespace

TEST_CASE("smooth step and temporal cut-off derivatives agree with finite differences") {
    CHECK(smooth_step(-0.1) == 0.0);
    CHECK(smooth_step(0.0) == 0.0);
    CHECK(smooth_step(1.0) == 1.0);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    for (double r : {0.2, 0.35, 0.5, 0.7, 0.85})
        CHECK(std::abs(oracle::derivative_fd(smooth_step, r, 1e-3) - smooth_step_derivative(r)) < 1e-10);

    const TemporalCutoff tc(0.1, 0.9, 0.2);
    CHECK(tc.value(0.05) == 0.0);
    CHECK(tc.value(0.1) == 0.0);
    CHECK(tc.value(0.95) == 0.0);
    CHECK(tc.value(0.5) == 1.0);
    CHECK(tc.derivative(0.5) == 0.0);
    auto v = [&](double t) { return tc.value(t); };
    for (double t : {0.15, 0.2, 0.27, 0.75, 0.85})
        CHECK(std::abs(oracle::derivative_fd(v, t, 2e-4) - tc.derivative(t)) < 1e-10 * std::max(1.0, std::abs(tc.derivative(t))) * 10);

    const TemporalCutoff one;
    CHECK(one.constant());
    CHECK(one.value(123.0) == 1.0);
    CHECK(one.derivative(0.3) == 0.0);

    CHECK_THROWS_AS(TemporalCutoff(0.5, 0.5, 0.1), ConfigError);
    CHECK_THROWS_AS(TemporalCutoff(0.0, 1.0, 0.6), ConfigError);
    CHECK_THROWS_AS(TemporalCutoff(0.0, 1.0, 0.0), ConfigError);
}

TEST_CASE("raised-cosine test function: values and analytic derivatives") {
    const Grid g(16);
    const std::array<double, 3> c{0.3, 0.6, 0.1};
    const TemporalCutoff tc(0.0, 1.0, 0.25);
    for (int power : {0, 1, 2, 3}) {
        const auto phi = TestFunction::raised_cosine(g, power, c, tc);
        CHECK(phi.degree() == power);
        const double t = 0.2;
        for (const oracle::Point x : {oracle::Point{0.1, 0.2, 0.3}, oracle::Point{0.7, 0.05, 0.9},
                                      oracle::Point{0.3, 0.6, 0.1}}) {
            double expect = tc.value(t);
            for (int a = 0; a < 3; ++a) expect *= std::pow(0.5 * (1.0 + std::cos(two_pi * (x[a] - c[a]))), power);
            CHECK(std::abs(phi.value(t, x) - expect) < 1e-13);

            auto along = [&](int a) {
                return [&, a](double s) {
                    auto y = x;
                    y[a] = s;
                    return phi.value(t, y);
                };
            };
            const auto grad = phi.gradient(t, x);
            double lap_fd = 0.0;
            for (int a = 0; a < 3; ++a) {
                CHECK(std::abs(oracle::derivative_fd(along(a), x[a], 2e-3) - grad[a]) < 1e-10);
                lap_fd += oracle::second_derivative_fd(along(a), x[a], 5e-3);
            }
            CHECK(std::abs(lap_fd - phi.laplacian(t, x)) < 1e-9);
            auto in_time = [&](double s) { return phi.value(s, x); };
            CHECK(std::abs(oracle::derivative_fd(in_time, t, 1e-4) - phi.time_derivative(t, x)) < 1e-10);
        }
    }
}

TEST_CASE("test function construction rejects invalid data") {
    const Grid g(8);
    ScalarField neg(g);
    neg.at(0, g.flat_mode({1, 0, 0})) = 0.5;
    neg.at(0, g.flat_mode({-1, 0, 0})) = 0.5;
    CHECK_THROWS_AS(TestFunction(neg, {}), ConfigError);  // cos(2 pi x) < 0 somewhere

    ScalarField complex_valued(g);
    complex_valued.at(0, g.flat_mode({1, 0, 0})) = 0.1;
    complex_valued.at(0, 0) = 1.0;
    CHECK_THROWS_AS(TestFunction(complex_valued, {}), ConfigError);

    ScalarField nyq(g);
    nyq.at(0, 0) = 1.0;
    nyq.at(0, g.flat_mode({-4, 0, 0})) = 0.1;
    CHECK_THROWS_AS(TestFunction(nyq, {}), ConfigError);
    CHECK_THROWS_AS(TestFunction::raised_cosine(g, -1, {0, 0, 0}, {}), ConfigError);

    ScalarField zero(g);
    CHECK_NOTHROW(TestFunction(zero, {}));
}

TEST_CASE("test function from samples and interpolation") {
    const Grid g(8);
    const auto phi = bump(g, 1);
    const auto samples = inverse_transform(phi.spatial());
    const auto back = TestFunction::from_samples(samples, g, {});
    CHECK((back.spatial() - phi.spatial()).max_abs() < 1e-15);

    auto rough = samples;
    rough.values[0][3] += 0.5;  // introduces modes outside the retained band
    CHECK_THROWS_AS(TestFunction::from_samples(rough, g, {}), ConfigError);

    const auto phi2 = TestFunction::raised_cosine(g, 2, {0.3, 0.6, 0.1}, {});
    CHECK(TestFunction::interpolate(phi, phi2, 0.0).spatial() == phi.spatial());
    CHECK((TestFunction::interpolate(phi, phi2, 1.0).spatial() - phi2.spatial()).max_abs() < 1e-16);
    CHECK_THROWS_AS(TestFunction::interpolate(phi, bump(g, 1, TemporalCutoff(0.0, 1.0, 0.2)), 0.5), ConfigError);
}

TEST_CASE("spatial ledger integrals match a refined Riemann sum") {
    // Short random path at M = 8 with state-dependent noise; all integrands are evaluated
    // pointwise by direct series summation on a 24^3 grid.
    auto p = small_params(Scheme::em_explicit);
    p.T = 3 * p.dt;
    const auto nm = noise_of(NoiseKind::linear_multiplicative, 0.5, p.grid);
    const auto tr = integrate(p, random_solenoidal(p.grid, 17, 0.6), nm);
    const auto phi = bump(p.grid, 1);
    const Stepper st(p, nm);
    const EnergyLedgerBuilder b(st, phi);
    CHECK(b.quadrature_points() < 24);

    const auto& u = tr.states.back();
    const auto& pr = tr.pressures.back();
    const auto sp = b.spatial_integrals(u, pr);

    const auto v = mollify(u, st.mollifier());
    const auto nk = nonlinear_term(u, v);
    std::array<SpectralField, 3> du;
    for (int a = 0; a < 3; ++a) du[a] = partial(u, a);
    const auto g = st.noise_coefficients(u);
    const auto sig = nm.eval_all(st.noise_terms(), u);
    REQUIRE(st.noise_terms() == 5);

    auto dot = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    };
    double energy = 0, elap = 0, ens = 0, flux = 0, cut = 0, comp = 0, compu = 0;
    std::vector<double> pair(5, 0.0);
    const int q = 24;
    const double w = 1.0 / (double(q) * q * q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            for (int k = 0; k < q; ++k) {
                const oracle::Point x{double(i) / q, double(j) / q, double(k) / q};
                const double s = phi.value(0.0, x), ls = phi.laplacian(0.0, x);
                const auto gs = phi.gradient(0.0, x);
                const auto ux = oracle::evaluate(u, x), vx = oracle::evaluate(v, x), nx = oracle::evaluate(nk, x);
                const double px = oracle::evaluate(pr, x);
                const double e = dot(ux, ux);
                energy += e * s;
                elap += e * ls;
                for (int a = 0; a < 3; ++a) {
                    const auto d = oracle::evaluate(du[a], x);
                    ens += dot(d, d) * s;
                }
                flux += e * dot(vx, gs) + 2.0 * px * dot(ux, gs);
                cut += -2.0 * dot(ux, nx) * s - e * dot(vx, gs);
                for (int m = 0; m < 5; ++m) {
                    const auto gx = oracle::evaluate(g[m], x), sx = oracle::evaluate(sig[m], x);
                    pair[m] += dot(gx, ux) * s;
                    comp += dot(gx, gx) * s;
                    compu += dot(sx, sx) * s;
                }
            }
    CHECK(rel(sp.energy, energy * w) < 1e-6);
    CHECK(rel(sp.energy_laplacian, elap * w) < 1e-6);
    CHECK(rel(sp.enstrophy, ens * w) < 1e-6);
    CHECK(rel(sp.flux, flux * w) < 1e-6);
    CHECK(std::abs(sp.truncation_flux - cut * w) < 1e-6 * std::abs(flux * w));
    CHECK(rel(sp.compensator, comp * w) < 1e-6);
    CHECK(rel(sp.compensator_unregularized, compu * w) < 1e-6);
    for (int m = 0; m < 5; ++m) CHECK(std::abs(sp.noise_pairings[m] - pair[m] * w) < 1e-6 * std::abs(comp * w));
}

TEST_CASE("zero path gives an all-zero ledger") {
    const auto p = small_params();
    const auto nm = noise_of(NoiseKind::linear_multiplicative, 0.5, p.grid);
    const auto l = energy_ledger(integrate(p, SpectralField(p.grid), nm), bump(p.grid, 2));
    REQUIRE(l.rows.size() == 9);
    for (const auto& r : l.rows) {
        CHECK(r.local_energy == 0.0);
        CHECK(r.enstrophy == 0.0);
        CHECK(r.transport == 0.0);
        CHECK(r.flux == 0.0);
        CHECK(r.truncation_flux == 0.0);
        CHECK(r.compensator == 0.0);
        CHECK(r.residual == 0.0);
        CHECK(r.ito_martingale == 0.0);
        CHECK(r.qv_predicted == 0.0);
        CHECK(r.qv_realized == 0.0);
    }
}

TEST_CASE("constant test function reduces to the global energy balance") {
    auto p = small_params();
    const auto nm = noise_of(NoiseKind::additive, 0.0, p.grid);
    const auto tr = integrate(p, taylor_green(p.grid, 1.0), nm);
    const auto l = energy_ledger(tr, bump(p.grid, 0));
    for (std::size_t j = 0; j < l.rows.size(); ++j) {
        const auto& r = l.rows[j];
        CHECK(std::abs(r.flux) < 1e-15);
        CHECK(std::abs(r.transport) < 1e-15);
        CHECK(std::abs(r.truncation_flux) < 1e-15);
        CHECK(r.local_energy == doctest::Approx(r.l2_energy).epsilon(1e-13));
        CHECK(r.qv_predicted == 0.0);
    }
    // linear dynamics: the exponential quadrature makes the balance exact
    StepHooks h;
    h.disable_nonlinearity = true;
    const auto lin = energy_ledger(integrate(p, taylor_green(p.grid, 1.0), nm, h), bump(p.grid, 0));
    for (const auto& r : lin.rows) CHECK(std::abs(r.residual) < 1e-15);
    // em_explicit: energy lost over one step is 2 nu dt ||grad u||^2 - dt^2 ||nu Laplace u||^2
    const auto pe = small_params(Scheme::em_explicit);
    const auto tre = integrate(pe, taylor_green(pe.grid, 1.0), nm, h);
    const auto le = energy_ledger(tre, bump(pe.grid, 0));
    const double lap2 = laplacian(tre.states[0]).l2_norm_squared();
    CHECK(le.rows[1].residual == doctest::Approx(pe.dt * pe.dt * pe.nu * pe.nu * lap2).epsilon(1e-10));
}

TEST_CASE("ledger is zero before the temporal support and the compensator is monotone") {
    auto p = small_params();
    p.T = 0.5;
    const auto nm = noise_of(NoiseKind::cosine, 0.4, p.grid);
    const TemporalCutoff tc(0.125, 0.45, 0.1);
    const auto phi = bump(p.grid, 2, tc);
    const auto tr = integrate(p, random_solenoidal(p.grid, 3, 0.5), nm);
    const auto l = energy_ledger(tr, phi);
    const std::size_t a = 4;  // t_4 = 0.125
    for (std::size_t j = 0; j <= a; ++j) {
        const auto& r = l.rows[j];
        CHECK(r.local_energy == 0.0);
        CHECK(r.enstrophy == 0.0);
        CHECK(r.transport == 0.0);
        CHECK(r.compensator == 0.0);
        CHECK(ledger_residual(l, j) == 0.0);
    }
    CHECK(l.rows[a + 1].compensator > 0.0);
    for (std::size_t j = 1; j < l.rows.size(); ++j) {
        CHECK(l.rows[j].compensator >= l.rows[j - 1].compensator);
        CHECK(l.rows[j].qv_predicted >= l.rows[j - 1].qv_predicted);
        CHECK(l.rows[j].qv_realized >= l.rows[j - 1].qv_realized);
    }

    // locality: another path with a different seed gives the same zero rows up to a
    auto p2 = p;
    p2.seed = 99;
    const auto l2 = energy_ledger(integrate(p2, random_solenoidal(p.grid, 3, 0.5), nm), phi);
    for (std::size_t j = 0; j <= a; ++j) CHECK(l2.rows[j].residual == l.rows[j].residual);
    CHECK(l2.rows.back().residual != l.rows.back().residual);
}

TEST_CASE("incremental ledger steps agree with the full ledger") {
    const auto p = small_params();
    const auto nm = noise_of(NoiseKind::additive, 0.3, p.grid);
    const auto tr = integrate(p, taylor_green(p.grid, 0.8), nm);
    const auto phi = bump(p.grid, 1);
    const auto full = energy_ledger(tr, phi);
    EnergyLedger inc;
    for (std::size_t j = 0; j + 1 < tr.states.size(); ++j) ledger_step(tr, j, phi, inc);
    REQUIRE(inc.rows.size() == full.rows.size());
    for (std::size_t j = 0; j < inc.rows.size(); ++j) CHECK(inc.rows[j].residual == full.rows[j].residual);

    EnergyLedger short_ledger;
    CHECK_THROWS_AS(ledger_step(tr, 2, phi, short_ledger), ContractViolation);
    CHECK_THROWS_AS(ledger_step(tr, tr.states.size() - 1, phi, inc), ContractViolation);
    CHECK_THROWS_AS(ledger_residual(full, full.rows.size()), ContractViolation);
    auto p2 = p;
    p2.stride = 2;
    const auto strided = integrate(p2, taylor_green(p.grid, 0.8), nm);
    CHECK_THROWS_AS(energy_ledger(strided, phi), ContractViolation);
}

TEST_CASE("frozen state: Ito sum and predicted QV against direct increments") {
    auto p = small_params(Scheme::em_explicit);
    p.T = 0.5;
    const auto nm = noise_of(NoiseKind::additive, 0.7, p.grid, 1);
    StepHooks h;
    h.frozen_state = true;
    SpectralField u0 = NoiseModel::vector_basis(p.grid, 1);
    u0.add_scaled(random_solenoidal(p.grid, 8, 0.5), 0.3);
    const auto phi = bump(p.grid, 1);
    const Stepper st(p, nm, h);
    REQUIRE(st.noise_terms() >= 1);

    // a = int phi u . g_1 by a 24^3 Riemann sum; later coefficients vanish (terms = 1)
    const auto tr = integrate(p, u0, nm, h);
    const auto& u = tr.states[0];
    const auto g = st.noise_coefficients(u);
    const double a = oracle::riemann_sum(24, [&](const oracle::Point& x) {
        const auto ux = oracle::evaluate(u, x), gx = oracle::evaluate(g[0], x);
        return phi.value(0.0, x) * (ux[0] * gx[0] + ux[1] * gx[1] + ux[2] * gx[2]);
    });
    REQUIRE(std::abs(a) > 1e-3);

    const auto l = energy_ledger(tr, phi);
    double ito = 0.0;
    for (std::size_t j = 0; j + 1 < l.rows.size(); ++j) {
        ito += 2.0 * a * tr.increments(1, static_cast<std::int64_t>(j));
        CHECK(l.rows[j + 1].ito_martingale == doctest::Approx(ito).epsilon(1e-9));
        CHECK(l.rows[j + 1].qv_predicted == doctest::Approx(4.0 * a * a * l.rows[j + 1].t).epsilon(1e-9));
    }

    // realized QV of the Ito sum over 512 paths against the prediction
    std::vector<double> diff;
    for (std::uint32_t i = 0; i < 512; ++i) {
        auto pi = p;
        pi.path_id = i;
        const auto li = energy_ledger(integrate(pi, u0, nm, h), phi);
        diff.push_back(li.rows.back().qv_ito_realized - li.rows.back().qv_predicted);
    }
    const auto s = summarize(diff);
    CHECK(std::abs(standardized(s)) <= 4.0);
}

TEST_CASE("noise off: QV series vanish and the residual is first order in dt") {
    std::vector<double> res;
    const std::array<double, 3> dts{1.0 / 64, 1.0 / 128, 1.0 / 256};
    for (double dt : dts) {
        auto p = small_params();
        p.dt = dt;
        p.T = 0.5;
        const auto nm = noise_of(NoiseKind::additive, 0.0, p.grid);
        const auto l = energy_ledger(integrate(p, taylor_green(p.grid, 1.0), nm), bump(p.grid, 2));
        const auto qv = qv_estimate(l);
        for (std::size_t j = 0; j < l.rows.size(); ++j) {
            CHECK(qv.predicted[j] == 0.0);
            CHECK(l.rows[j].ito_martingale == 0.0);
        }
        res.push_back(std::abs(l.rows.back().residual));
        // the noise-off excess in the local energy inequality is a discretization term
        CHECK(res.back() <= 1e-3 * dt);
    }
    // |residual| = C dt with one constant C across the three step sizes
    const double c0 = res[0] / dts[0];
    for (int i = 1; i < 3; ++i) CHECK(std::abs(res[i] / dts[i] / c0 - 1.0) < 0.25);

    // phi = 0 gives identically zero QV
    const auto p = small_params();
    const auto nm = noise_of(NoiseKind::additive, 0.5, p.grid);
    const auto l0 = energy_ledger(integrate(p, taylor_green(p.grid, 1.0), nm), TestFunction(ScalarField(p.grid), {}));
    const auto q0 = qv_estimate(l0);
    for (std::size_t j = 0; j < l0.rows.size(); ++j) {
        CHECK(q0.predicted[j] == 0.0);
        CHECK(q0.realized[j] == 0.0);
    }
}

TEST_CASE("ensemble zero mean, QV consistency, supermartingale and LEI at M = 8") {
    auto p = small_params();
    p.T = 0.5;
    const auto nm = noise_of(NoiseKind::additive, 0.3, p.grid);
    const auto phi = bump(p.grid, 2, TemporalCutoff(0.05, 0.45, 0.1));
    const auto ens = ensemble(p, nm, taylor_green(p.grid, 1.0), phi, 128);

    const auto z = martingale_zero_mean(ens);
    CHECK(z.pass);
    const auto q = qv_consistency(ens);
    CHECK(q.pass);

    const std::size_t n = ens[0].rows.size() - 1;
    const auto events = energy_split_events(ens, n / 2);
    REQUIRE(events.size() == 3);
    const auto rep = supermartingale_test(ens, n / 2, n, events);
    CHECK(rep.pass);
    const auto same = supermartingale_test(ens, n / 2, n / 2, events);
    for (const auto& st : same.statistics) CHECK(st.statistic == 0.0);

    CHECK(lei_scalar_check(ens, xi_one(), "one").pass);
    CHECK(lei_scalar_check(ens, xi_inverse_energy(), "inverse energy").pass);
    const auto zero = lei_scalar_check(ens, [](const EnergyLedger&) { return 0.0; }, "zero");
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
    CHECK(zero.pass);
    CHECK_THROWS_AS(lei_scalar_check(ens, [](const EnergyLedger&) { return -1.0; }, "negative"), ConfigError);

    // events reading past s are contract violations
    const std::vector<PathEvent> peeking{{"future", [n](const LedgerHistory& h) { return h.row(n).l2_energy > 0; }}};
    CHECK_THROWS_AS(supermartingale_test(ens, n / 2, n, peeking), ContractViolation);
    const std::span<const EnergyLedger> few(ens.data(), 99);
    CHECK_THROWS_AS(supermartingale_test(few, n / 2, n, events), ConfigError);
    CHECK_THROWS_AS(supermartingale_test(ens, n, n / 2, events), ConfigError);
}

TEST_CASE("martingale map continuity") {
    auto p = small_params();
    const auto nm = noise_of(NoiseKind::additive, 0.3, p.grid);
    const TemporalCutoff tc(0.02, 0.23, 0.05);
    const auto phi1 = TestFunction::raised_cosine(p.grid, 2, {0.3, 0.6, 0.1}, tc);
    const auto phi2 = TestFunction::raised_cosine(p.grid, 1, {0.3, 0.6, 0.1}, tc);
    std::vector<Trajectory> trs;
    for (std::uint32_t i = 0; i < 16; ++i) {
        auto pi = p;
        pi.path_id = i;
        trs.push_back(integrate(pi, taylor_green(p.grid, 1.0), nm));
    }
    const auto same = martingale_map_continuity(trs, phi1, phi1, 2.0);
    CHECK(same.numerator == 0.0);
    CHECK(same.ratio == 0.0);

    const auto r = martingale_map_continuity(trs, phi1, phi2, 2.0);
    CHECK(r.numerator > 0.0);
    CHECK(r.denominator > 0.0);
    CHECK(std::isfinite(r.ratio));

    // linear dynamics without noise: the residual vanishes for every test function
    StepHooks h;
    h.disable_nonlinearity = true;
    const auto quiet = noise_of(NoiseKind::additive, 0.0, p.grid);
    const std::vector<Trajectory> det{integrate(p, taylor_green(p.grid, 1.0), quiet, h)};
    CHECK(martingale_map_continuity(det, phi1, phi2, 2.0).numerator < 1e-30);

    CHECK_THROWS_AS(martingale_map_continuity(trs, phi1, phi2, 4.0), ConfigError);
    CHECK_THROWS_AS(martingale_map_continuity(trs, phi1, phi2, 0.5), ConfigError);
    CHECK_THROWS_AS(martingale_map_continuity(trs, phi1, bump(p.grid, 1), 2.0), ConfigError);
}
