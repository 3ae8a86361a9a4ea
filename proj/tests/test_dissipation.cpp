#include "doctest.h"

#include <cmath>

#include "lsns/dissipation.hpp"
#include "lsns/errors.hpp"
#include "lsns/initial_conditions.hpp"
#include "lsns/oracles.hpp"
#include "lsns/spectral.hpp"

using namespace lsns;

namespace {

// D^l at the M-grid points by direct summation of its Fourier series.
std::vector<double> on_grid_points(const ScalarField& d, const Grid& g) {
    const int m = g.modes_per_axis();
    std::vector<double> out(g.size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                out[g.flat(i, j, k)] = oracle::evaluate(d, {double(i) / m, double(j) / m, double(k) / m});
    return out;
}

double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        err = std::max(err, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return err / scale;
}

RunParams params(const Grid& g, double dt, double T) {
    RunParams p;
    p.grid = g;
    p.nu = 0.01;
    p.dt = dt;
    p.T = T;
    p.seed = 11;
    return p;
}

NoiseModel noise(NoiseKind kind, double amplitude, const Grid& g) {
    NoiseSpec s;
    s.kind = kind;
    s.amplitude = amplitude;
    return NoiseModel(s, g);
}

}  // namespace

TEST_CASE("zero and constant fields have no structure-function dissipation") {
    const Grid g(8);
    SpectralField u(g);
    CHECK(dr_integrand(u, 0.25).max_abs() == 0.0);
    CHECK(commutator_identity_check(u, 0.25) == 0.0);
    u.at(0, 0) = 0.7;
    u.at(2, 0) = -1.3;
    CHECK(dr_integrand(u, 0.25).max_abs() < 1e-15);
    CHECK(dr_integrand(u, 0.125, MollifierKind::gaussian).max_abs() < 1e-15);
}

TEST_CASE("single shear mode: identity exact and D vanishes") {
    const Grid g(16);
    const SpectralField u = shear_mode(g, 1.5, 2);
    CHECK(commutator_identity_check(u, 0.125) <= 1e-12);
    const DREvaluator ev(g, 0.125);
    const DRTerms t = ev.terms(u);
    double d = 0.0, scale = 0.0;
    for (std::size_t x = 0; x < t.dissipation.size(); ++x) {
        d = std::max(d, std::abs(t.dissipation.values[0][x]));
        scale = std::max(scale, std::abs(t.stress_strain.values[0][x]));
    }
    CHECK(d <= 1e-12 * std::max(1.0, scale));
}

TEST_CASE("commutator identity on random fields for both mollifier kinds") {
    const Grid g(16);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const SpectralField u = random_solenoidal(g, seed, 1.0);
        for (double ell : {0.25, 0.125, 0.0625}) {
            CHECK(commutator_identity_check(u, ell) <= 1e-10);
            CHECK(commutator_identity_check(u, ell, MollifierKind::gaussian) <= 1e-10);
        }
    }
}

TEST_CASE("Fourier route matches the spherical displacement quadrature") {
    const Grid g(16);
    const SpectralField u = random_solenoidal(g, 21, 1.0);
    const auto fourier = on_grid_points(dr_integrand(u, 0.125), g);
    CHECK(relative_gap(fourier, oracle::dr_by_spherical_quadrature(u, 0.125, 24)) <= 1e-4);
}

TEST_CASE("displacement quadratures converge to the Fourier route") {
    const Grid g(8);
    const SpectralField u = random_solenoidal(g, 4, 1.0);
    const auto fourier = on_grid_points(dr_integrand(u, 0.125), g);
    const double s16 = relative_gap(fourier, oracle::dr_by_spherical_quadrature(u, 0.125, 16));
    const double s24 = relative_gap(fourier, oracle::dr_by_spherical_quadrature(u, 0.125, 24));
    const double s32 = relative_gap(fourier, oracle::dr_by_spherical_quadrature(u, 0.125, 32));
    CHECK(s24 < s16);
    CHECK(s32 < s24);
    CHECK(s32 <= 1e-5);
    CHECK(relative_gap(fourier, oracle::dr_by_displacement_quadrature(u, 0.125, 64)) <= 1e-4);
}

TEST_CASE("global D of smooth fields vanishes with l at order >= 1") {
    const Grid g(16);
    const SpectralField u = random_solenoidal(g, 3, 1.0, 4.0);
    std::vector<double> d;
    for (double ell : {0.25, 0.125, 0.0625, 0.03125}) d.push_back(std::abs(dr_integrand(u, ell).at(0, 0).real()));
    for (std::size_t i = 0; i + 1 < d.size(); ++i) CHECK(std::log2(d[i] / d[i + 1]) >= 1.0);
}

TEST_CASE("scale validation") {
    const Grid g(16);
    const SpectralField u = random_solenoidal(g, 1, 1.0);
    CHECK_THROWS_AS(dr_integrand(u, 0.0), ConfigError);
    CHECK_THROWS_AS(dr_integrand(u, 0.3), ConfigError);
    CHECK_THROWS_AS(commutator_identity_check(u, -0.1), ConfigError);

    const DRConfig d16 = DRConfig::default_for(g);
    CHECK(d16.ell_values == std::vector<double>{0.25, 0.125});
    CHECK(DRConfig::default_for(Grid(32)).ell_values == std::vector<double>{0.25, 0.125, 0.0625});
    CHECK_NOTHROW(d16.validate(g));
    DRConfig bad = d16;
    bad.ell_values = {0.125, 0.25};
    CHECK_THROWS_AS(bad.validate(g), ConfigError);
    bad.ell_values = {0.25, 0.0625};
    CHECK_THROWS_AS(bad.validate(g), ConfigError);
    bad.ell_values = {0.3};
    CHECK_THROWS_AS(bad.validate(g), ConfigError);
    bad.ell_values = {};
    CHECK_THROWS_AS(bad.validate(g), ConfigError);
}

TEST_CASE("ledger integrals match a direct Riemann sum") {
    const Grid g(8);
    const SpectralField u = random_solenoidal(g, 9, 1.0);
    const auto phi = TestFunction::raised_cosine(g, 1, {0.2, 0.7, 0.4}, {});
    const DRLedgerBuilder b(g, 0.01, phi, DRConfig::default_for(g));
    const double fast = b.spatial_integrals(u).front();
    const ScalarField d = dr_integrand(u, 0.25);
    const double direct = oracle::riemann_sum(24, [&](const oracle::Point& x) {
        return oracle::evaluate(d, x) * phi.value(0.0, x);
    });
    CHECK(std::abs(fast - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("frozen constant state gives a zero DR ledger") {
    const Grid g(8);
    SpectralField u0(g);
    u0.at(1, 0) = 0.4;
    StepHooks hooks;
    hooks.frozen_state = true;
    const Trajectory tr = integrate(params(g, 1.0 / 16, 0.25), u0, noise(NoiseKind::additive, 0.3, g), hooks);
    const auto phi = TestFunction::raised_cosine(g, 1, {0.5, 0.5, 0.5}, {});
    const DRLedger l = dr_ledger(tr, phi, DRConfig::default_for(g));
    REQUIRE(l.series.size() == 1);
    for (double v : l.finest()) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("closure equals the energy-balance defect plus 2 D") {
    const Grid g(8);
    const Trajectory tr = integrate(params(g, 1.0 / 32, 0.25), random_solenoidal(g, 2, 1.0),
                                    noise(NoiseKind::additive, 0.2, g));
    const auto phi = TestFunction::raised_cosine(g, 2, {0.3, 0.3, 0.6}, TemporalCutoff(0.02, 0.23, 0.05));
    const EnergyLedger e = energy_ledger(tr, phi);
    const DRLedger l = dr_ledger(tr, phi, DRConfig::default_for(g), e);
    REQUIRE(l.closure.size() == e.rows.size());
    for (std::size_t j = 0; j < e.rows.size(); ++j) {
        const double defect = e.rows[j].residual - e.rows[j].ito_martingale;
        CHECK(l.closure[j] == doctest::Approx(defect + 2.0 * l.finest()[j]).epsilon(1e-9));
    }
    CHECK_THROWS_AS(dr_ledger(tr, phi, DRConfig::default_for(g), EnergyLedger{}), ContractViolation);
}

TEST_CASE("noise-off smooth run: D shrinks with l and the Cauchy differences decrease") {
    const Grid g(32);
    const Trajectory tr = integrate(params(g, 1.0 / 64, 0.125), taylor_green(g, 1.0), noise(NoiseKind::additive, 0.0, g));
    const auto phi = TestFunction::raised_cosine(g, 2, {0.2, 0.3, 0.1}, {});
    const DRLedger l = dr_ledger(tr, phi, DRConfig::default_for(g));
    REQUIRE(l.cauchy_differences.size() == 2);
    CHECK(l.cauchy_differences[1] < l.cauchy_differences[0]);
    CHECK(std::abs(l.series[2].back()) < std::abs(l.series[0].back()));
}

TEST_CASE("dissipation submartingale test") {
    const Grid g(8);
    RunParams p = params(g, 1.0 / 16, 0.25);
    const NoiseModel nm = noise(NoiseKind::additive, 0.3, g);
    const auto phi = TestFunction::raised_cosine(g, 1, {0.5, 0.5, 0.5}, {});
    const SpectralField u0 = taylor_green(g, 1.0);
    std::vector<EnergyLedger> energy;
    std::vector<DRLedger> dr;
    for (std::uint32_t i = 0; i < 128; ++i) {
        p.path_id = i;
        const Trajectory tr = integrate(p, u0, nm);
        energy.push_back(energy_ledger(tr, phi));
        dr.push_back(dr_ledger(tr, phi, DRConfig::default_for(g), energy.back()));
    }
    const std::size_t s = 2, t = 4;
    const auto events = energy_split_events(energy, s);
    const auto rep = dissipation_submartingale_test(dr, energy, s, t, events);
    CHECK(rep.statistics.size() == 3);
    CHECK(rep.pass);
    const auto same = dissipation_submartingale_test(dr, energy, s, s, events);
    for (const auto& st : same.statistics) CHECK(st.statistic == 0.0);

    CHECK_THROWS_AS(dissipation_submartingale_test(dr, energy, t, s, events), ConfigError);
    const std::span<const DRLedger> few(dr.data(), 50);
    const std::span<const EnergyLedger> few_e(energy.data(), 50);
    CHECK_THROWS_AS(dissipation_submartingale_test(few, few_e, s, t, events), ConfigError);
    CHECK_THROWS_AS(dissipation_submartingale_test(dr, few_e, s, t, events), ConfigError);
}
