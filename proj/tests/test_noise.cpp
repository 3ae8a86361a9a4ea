#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lsns/errors.hpp"
#include "lsns/initial_conditions.hpp"
#include "lsns/noise.hpp"
#include "lsns/spectral.hpp"

using namespace lsns;

namespace {

std::vector<SpectralField> samples(const Grid& g, int count, double energy) {
    std::vector<SpectralField> out;
    for (int i = 0; i < count; ++i) out.push_back(random_solenoidal(g, 1000 + i, energy * (1 + i % 5)));
    return out;
}

NoiseSpec cosine_spec() {
    NoiseSpec s;
    s.kind = NoiseKind::cosine;
    s.amplitude = 0.5;
    s.decay = 0.5;
    return s;
}

}  // namespace

TEST_CASE("truncation level") {
    CHECK(TruncationLevel::from_epsilon(0.25).N == 5);
    CHECK(TruncationLevel::from_epsilon(0.3).N == 4);
    CHECK(TruncationLevel::from_epsilon(1.0 / 16).N == 17);
    CHECK_THROWS_AS(TruncationLevel::from_epsilon(0.0), ConfigError);
}

TEST_CASE("basis fields are real, divergence free and unit norm") {
    const Grid g(8);
    for (int k = 1; k <= 64; ++k) {
        const auto e = NoiseModel::vector_basis(g, k);
        CHECK(e.l2_norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(divergence_residual(e) < 1e-15);
        CHECK(e.conjugate_asymmetry() < 1e-15);
        const auto s = NoiseModel::scalar_basis(g, k);
        CHECK(s.l2_norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
    }
    for (int j = 1; j <= 8; ++j)
        for (int k = 1; k < j; ++k)
            CHECK(std::abs(l2_inner(NoiseModel::vector_basis(g, j), NoiseModel::vector_basis(g, k))) < 1e-15);
}

TEST_CASE("eval examples") {
    const Grid g(16);
    const auto u = random_solenoidal(g, 5, 2.0);
    SUBCASE("additive noise does not depend on u") {
        NoiseSpec s;
        s.amplitude = 0.7;
        const NoiseModel m(s, g);
        CHECK(m.eval(3, u) == m.eval(3, SpectralField(g)));
        CHECK(m.eval(3, u) == 0.7 * 0.25 * NoiseModel::vector_basis(g, 3));
        CHECK_THROWS_AS(m.eval(65, u), ConfigError);
        CHECK_THROWS_AS(m.eval(0, u), ConfigError);
    }
    SUBCASE("constant multiplier scales u") {
        NoiseSpec s;
        s.kind = NoiseKind::linear_multiplicative;
        s.amplitude = 1.3;
        s.terms = 1;
        const NoiseModel m(s, g);
        const auto r = m.eval(1, u) - 1.3 * u;
        CHECK(r.max_abs() < 1e-14);
        CHECK(m.eval(2, u).max_abs() == 0.0);
    }
    SUBCASE("cosine at rest is f_k cos k") {
        const NoiseModel m(cosine_spec(), g);
        for (int k : {1, 2, 7}) {
            const auto r = m.eval(k, SpectralField(g)) -
                           (std::cos(double(k)) * std::pow(0.5, k)) * NoiseModel::vector_basis(g, k);
            CHECK(r.max_abs() < 1e-15);
        }
    }
    SUBCASE("eval is deterministic and eval_all agrees with eval") {
        const NoiseModel m(cosine_spec(), g);
        const auto all = m.eval_all(4, u);
        for (int k = 1; k <= 4; ++k) CHECK(all[k - 1] == m.eval(k, u));
    }
}

TEST_CASE("mollified noise is an L2 contraction") {
    const Grid g(16);
    const Mollifier psi(0.25, MollifierKind::paper_bump, g);
    const auto u = random_solenoidal(g, 6, 1.0);
    NoiseSpec s = cosine_spec();
    for (auto kind : {NoiseKind::additive, NoiseKind::linear_multiplicative, NoiseKind::cosine}) {
        s.kind = kind;
        const NoiseModel m(s, g);
        for (const auto& f : m.eval_all(5, u)) CHECK(mollify(f, psi).l2_norm_squared() <= f.l2_norm_squared());
    }
}

TEST_CASE("linear growth validator") {
    const Grid g(16);
    SUBCASE("additive at u = 0 gives the coefficient sum") {
        NoiseSpec s;
        s.amplitude = 1.0;
        s.decay = 0.5;
        const NoiseModel m(s, g);
        const auto r = validate_linear_growth(m, {SpectralField(g)}, 3);
        CHECK(r.empirical == doctest::Approx(1.0 + 0.25 + 0.0625).epsilon(1e-13));
        CHECK(r.analytic == doctest::Approx(1.3125).epsilon(1e-14));
        CHECK(r.pass);
    }
    SUBCASE("single constant multiplier") {
        NoiseSpec s;
        s.kind = NoiseKind::linear_multiplicative;
        s.amplitude = 1.0;
        s.terms = 1;
        const NoiseModel m(s, g);
        const auto u = random_solenoidal(g, 9, 3.0);
        const auto r = validate_linear_growth(m, {u}, 5);
        CHECK(r.empirical == doctest::Approx(3.0 / 4.0).epsilon(1e-12));
        CHECK(r.empirical < 1.0);
    }
    SUBCASE("cosine family stays below the geometric sum") {
        const NoiseModel m(cosine_spec(), g);
        const auto r = validate_linear_growth(m, samples(g, 20, 0.5), 64);
        CHECK(r.analytic == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(r.empirical <= r.analytic * 1.05);
        CHECK(r.pass);
    }
    SUBCASE("validator contracts") {
        const NoiseModel m(cosine_spec(), g);
        CHECK_THROWS_AS(validate_linear_growth(m, {}, 3), ConfigError);
        auto bad = random_solenoidal(g, 3, 1.0);
        bad.at(0, g.flat_mode({1, 0, 0})) += 0.5;
        bad.at(0, g.flat_mode({-1, 0, 0})) += 0.5;
        CHECK_THROWS_AS(validate_linear_growth(m, {bad}, 3), ContractViolation);
    }
    SUBCASE("adding samples never lowers the supremum") {
        const NoiseModel m(cosine_spec(), g);
        auto set = samples(g, 5, 1.0);
        const double a = validate_linear_growth(m, set, 5).empirical;
        set.push_back(random_solenoidal(g, 77, 0.1));
        CHECK(validate_linear_growth(m, set, 5).empirical >= a);
    }
}

TEST_CASE("tail decay validator") {
    const Grid g(16);
    SUBCASE("empty tail beyond max_k") {
        NoiseSpec s;
        s.amplitude = 1.0;
        s.max_k = 8;
        s.terms = 8;
        const NoiseModel m(s, g);
        const auto t = validate_tail_decay(m, {SpectralField(g)}, {8, 10});
        CHECK(t.empirical[0] == 0.0);
        CHECK(t.analytic[0] == 0.0);
    }
    SUBCASE("cosine geometric tail") {
        const NoiseModel m(cosine_spec(), g);
        const std::vector<int> Ns = {1, 2, 3, 4, 6, 8};
        const auto t = validate_tail_decay(m, samples(g, 10, 0.5), Ns);
        CHECK(t.nonincreasing);
        CHECK(t.pass);
        for (std::size_t i = 0; i < Ns.size(); ++i)
            CHECK(t.analytic[i] == doctest::Approx(std::pow(4.0, -Ns[i]) / 3.0).epsilon(1e-12));
        CHECK(t.analytic[1] == doctest::Approx(1.0 / 48.0).epsilon(1e-12));
    }
    SUBCASE("N values must increase") {
        const NoiseModel m(cosine_spec(), g);
        CHECK_THROWS_AS(validate_tail_decay(m, {SpectralField(g)}, {3, 2}), ConfigError);
    }
}

TEST_CASE("vorticity control validator") {
    const Grid g(16);
    const auto set = samples(g, 20, 1.0);
    SUBCASE("additive") {
        NoiseSpec s;
        s.amplitude = 0.3;
        const NoiseModel m(s, g);
        const auto r = validate_vorticity_control(m, {SpectralField(g)}, 6);
        CHECK(r.empirical == doctest::Approx(r.analytic).epsilon(1e-12));
        CHECK(validate_vorticity_control(m, set, 6).pass);
    }
    SUBCASE("constant multipliers") {
        NoiseSpec s;
        s.kind = NoiseKind::linear_multiplicative;
        s.amplitude = 2.0;
        s.terms = 1;
        const NoiseModel m(s, g);
        const auto r = validate_vorticity_control(m, set, 4);
        CHECK(r.empirical <= 4.0);
        CHECK(r.pass);
    }
    SUBCASE("general multiplicative and cosine") {
        NoiseSpec s;
        s.kind = NoiseKind::linear_multiplicative;
        s.amplitude = 1.0;
        CHECK(validate_vorticity_control(NoiseModel(s, g), set, 6).pass);
        CHECK(validate_vorticity_control(NoiseModel(cosine_spec(), g), set, 6).pass);
    }
}

TEST_CASE("noise spec validation") {
    const Grid g(16);
    NoiseSpec s;
    s.amplitude = -1.0;
    CHECK_THROWS_AS(NoiseModel(s, g), ConfigError);
    s.amplitude = 1.0;
    s.decay = 1.0;
    CHECK_THROWS_AS(NoiseModel(s, g), ConfigError);
    s.terms = 4;
    CHECK_NOTHROW(NoiseModel(s, g));
    CHECK(parse_noise_kind("cosine") == NoiseKind::cosine);
    CHECK_THROWS_AS(parse_noise_kind("spiky"), ConfigError);
}
