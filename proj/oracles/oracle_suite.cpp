#include "lsns/oracle_suite.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "lsns/dissipation.hpp"
#include "lsns/energy_ledger.hpp"
#include "lsns/initial_conditions.hpp"
#include "lsns/integrator.hpp"
#include "lsns/mollifier.hpp"
#include "lsns/oracles.hpp"
#include "lsns/spectral.hpp"
#include "lsns/vorticity.hpp"

namespace lsns::oracle {

namespace {

PhysicalVector random_samples(int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    PhysicalVector s(m);
    for (auto& c : s.values)
        for (auto& v : c) v = dist(rng);
    return s;
}

template <int C>
double relative(const ModalField<C>& a, const ModalField<C>& b) {
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) {
        d = std::max(d, std::abs(a.raw()[i] - b.raw()[i]));
        s = std::max(s, std::abs(b.raw()[i]));
    }
    return s > 0.0 ? d / s : d;
}

double relative(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
    }
    return s > 0.0 ? d / s : d;
}

Point grid_point(const Grid& g, std::size_t flat) {
    const double m = g.modes_per_axis();
    const auto n = g.modes_per_axis();
    return {double(flat / (std::size_t(n) * n)) / m, double((flat / n) % n) / m, double(flat % n) / m};
}

class Suite {
public:
    explicit Suite(SuiteReport& r) : r_(r) {}

    void check(const std::string& module, const std::string& operation, std::uint64_t seed, int m, double tolerance,
               const std::function<double()>& error) {
        OracleCheck c{module, operation, seed, m, 0.0, tolerance, false};
        try {
            c.error = error();
            c.pass = c.error <= tolerance;
        } catch (const std::exception&) {
            c.error = INFINITY;
        }
        r_.checks.push_back(c);
    }

private:
    SuiteReport& r_;
};

void spectral_checks(Suite& s, int m, std::uint64_t seed) {
    const Grid g(m);
    s.check("spectral_core", "forward_transform", seed, m, 1e-12, [&] {
        const auto x = random_samples(m, seed);
        const auto f = forward_transform(x, g);
        double worst = 0.0;
        for (int c = 0; c < 3; ++c) {
            const auto ref = direct_dft(m, x.values[c]);
            double d = 0.0, sc = 0.0;
            for (std::size_t i = 0; i < ref.size(); ++i) {
                d = std::max(d, std::abs(ref[i] - f.at(c, i)));
                sc = std::max(sc, std::abs(ref[i]));
            }
            worst = std::max(worst, d / sc);
        }
        return worst;
    });
    s.check("spectral_core", "inverse_transform", seed, m, 1e-12, [&] {
        const auto u = random_solenoidal(g, seed, 1.0);
        const auto x = inverse_transform(u);
        std::vector<double> fast, direct;
        for (std::size_t i = 0; i < x.size(); i += 7) {
            const auto v = evaluate(u, grid_point(g, i));
            for (int c = 0; c < 3; ++c) {
                fast.push_back(x.values[c][i]);
                direct.push_back(v[c]);
            }
        }
        return relative(fast, direct);
    });
    s.check("spectral_core", "leray_project", seed, m, 1e-12, [&] {
        const auto v = forward_transform(random_samples(m, seed + 1), g);
        return relative(leray_project(v), projection_by_matrix(v));
    });
    s.check("spectral_core", "nonlinear_term", seed, m, 1e-12, [&] {
        const auto u = truncate(forward_transform(random_samples(m, seed + 2), g));
        const auto w = truncate(forward_transform(random_samples(m, seed + 3), g));
        return relative(nonlinear_term(u, w), nonlinear_by_convolution(u, w));
    });
    s.check("spectral_core", "solve_pressure", seed, m, 1e-12, [&] {
        const auto u = random_solenoidal(g, seed + 4, 1.0);
        const auto v = random_solenoidal(g, seed + 5, 1.0);
        return relative(solve_pressure(v, u), pressure_by_mode_arithmetic(v, u));
    });
    s.check("spectral_core", "mollifier_multiplier", seed, m, 1e-9, [&] {
        const Mollifier psi(0.25, MollifierKind::paper_bump, g);
        double worst = 0.0;
        for (const Wavevector n : {Wavevector{1, 0, 0}, Wavevector{1, 2, 2}, Wavevector{m / 3, 1, 0}})
            worst = std::max(worst, std::abs(psi.multiplier(g.flat_mode(n)) - bump_multiplier_by_quadrature(0.25, n)));
        return worst;  // absolute: multipliers are bounded by 1
    });
}

void noise_checks(Suite& s, int m, std::uint64_t seed) {
    const Grid g(m);
    s.check("noise_models", "cosine_eval", seed, m, 1e-12, [&] {
        NoiseSpec spec;
        spec.kind = NoiseKind::cosine;
        spec.amplitude = 0.5;
        const NoiseModel model(spec, g);
        const auto u = random_solenoidal(g, seed, 1.0);
        std::vector<double> fast, direct;
        for (int k : {1, 3}) {
            const auto sig = model.eval(k, u);
            const auto e = NoiseModel::vector_basis(g, k);
            for (std::size_t i = 0; i < g.size(); i += 11) {
                const Point x = grid_point(g, i);
                const auto ux = evaluate(u, x), ex = evaluate(e, x), sx = evaluate(sig, x);
                const double w = model.coefficient(k) * std::cos(k * std::sqrt(1.0 + ux[0] * ux[0] + ux[1] * ux[1] + ux[2] * ux[2]));
                for (int c = 0; c < 3; ++c) {
                    fast.push_back(sx[c]);
                    direct.push_back(w * ex[c]);
                }
            }
        }
        return relative(fast, direct);
    });
}

void integrator_checks(Suite& s, int m, std::uint64_t seed) {
    s.check("leray_integrator", "increment_summation", seed, m, 1e-9, [&] {
        RunParams p;
        p.grid = Grid(m);
        p.nu = 0.0;
        p.epsilon = 0.25;
        p.dt = 1.0 / 64;
        p.T = 0.25;
        p.seed = seed;
        NoiseSpec spec;
        spec.amplitude = 0.6;
        const NoiseModel noise(spec, p.grid);
        const auto tr = integrate(p, random_solenoidal(p.grid, seed, 0.5), noise, {.disable_nonlinearity = true});
        SpectralField expect = tr.states.front();
        const Stepper st(p, noise);
        for (int k = 1; k <= st.noise_terms(); ++k) {
            double b = 0.0;
            for (std::int64_t j = 0; j + 1 < std::int64_t(tr.states.size()); ++j) b += tr.increments(k, j);
            const auto e = NoiseModel::vector_basis(p.grid, k);
            Wavevector nk{};
            for (std::size_t f = 0; f < p.grid.size(); ++f)
                if (std::abs(e.at(0, f)) + std::abs(e.at(1, f)) + std::abs(e.at(2, f)) > 0.0) {
                    nk = p.grid.mode(f);
                    break;
                }
            expect.add_scaled(e, noise.coefficient(k) * bump_multiplier_by_quadrature(p.epsilon, nk) * b);
        }
        return relative(tr.states.back(), expect);
    });
}

void ledger_checks(Suite& s, int m, std::uint64_t seed, bool full) {
    const Grid g(m);
    s.check("energy_ledger", "local_energy", seed, m, 1e-12, [&] {
        RunParams p;
        p.grid = g;
        const NoiseModel noise(NoiseSpec{}, g);
        const Stepper st(p, noise);
        const auto phi = TestFunction::raised_cosine(g, 2, {0.2, 0.3, 0.1}, {});
        const EnergyLedgerBuilder b(st, phi);
        const auto u = random_solenoidal(g, seed, 1.0);
        const double fast = b.local_energy(u, 0.0);
        const double direct = riemann_sum(3 * m, [&](const Point& x) {
            const auto v = evaluate(u, x);
            return (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * phi.value(0.0, x);
        });
        return std::abs(fast - direct) / std::abs(direct);
    });
    s.check("dissipation_dr", "displacement_quadrature", seed, m, 1e-4, [&] {
        const auto u = random_solenoidal(g, seed, 1.0);
        const auto d = dr_integrand(u, 0.125);
        std::vector<double> fourier(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) fourier[i] = evaluate(d, grid_point(g, i));
        return relative(fourier, dr_by_spherical_quadrature(u, 0.125, 24));
    });
    if (full)
        s.check("dissipation_dr", "commutator_identity", seed, m, 1e-10,
                [&] { return commutator_identity_check(random_solenoidal(g, seed, 1.0), 0.125); });
    s.check("vorticity_transform", "h_derivatives", seed, m, 1e-7, [&] {
        const HFunction hf(0.25);
        double worst = 0.0;
        for (double r : {1.05, 2.0, 10.0, 300.0}) {
            const auto e = hf.eval(r);
            const double dh = derivative_fd([&](double x) { return hf.eval(x).h; }, r, 1e-3);
            const double d2h = derivative_fd([&](double x) { return hf.eval(x).dh; }, r, 1e-3);
            worst = std::max({worst, std::abs(dh - e.dh) / std::abs(e.dh), std::abs(d2h - e.d2h) / std::abs(e.d2h)});
        }
        return worst;
    });
}

}  // namespace

bool SuiteReport::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

std::vector<std::string> SuiteReport::failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (!c.pass) {
            char buf[96];
            std::snprintf(buf, sizeof buf, " (error %.3e > %.1e)", c.error, c.tolerance);
            out.push_back(c.module + "/" + c.operation + " M=" + std::to_string(c.modes) +
                          " seed=" + std::to_string(c.seed) + buf);
        }
    return out;
}

SuiteReport run_oracle_suite(SuiteLevel level) {
    const auto start = std::chrono::steady_clock::now();
    SuiteReport r;
    Suite s(r);
    const bool full = level == SuiteLevel::full;
    std::vector<int> grids{8};
    if (full) grids.push_back(16);
    for (int m : grids) {
        const std::uint64_t seed = 100 + static_cast<std::uint64_t>(m);
        spectral_checks(s, m, seed);
        noise_checks(s, m, seed);
        integrator_checks(s, m, seed);
        ledger_checks(s, m, seed, full);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace lsns::oracle
