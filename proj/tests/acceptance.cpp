// Acceptance run: one line per criterion, exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lsns/config.hpp"
#include "lsns/dissipation.hpp"
#include "lsns/energy_ledger.hpp"
#include "lsns/ensemble.hpp"
#include "lsns/errors.hpp"
#include "lsns/initial_conditions.hpp"
#include "lsns/integrator.hpp"
#include "lsns/oracle_suite.hpp"
#include "lsns/oracles.hpp"
#include "lsns/persistence.hpp"
#include "lsns/spectral.hpp"
#include "lsns/vorticity.hpp"

using namespace lsns;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

class Board {
public:
    explicit Board(std::vector<int> only) : only_(std::move(only)) {}

    bool selected(int id) const { return only_.empty() || std::find(only_.begin(), only_.end(), id) != only_.end(); }

    void run(int id, const std::string& name, double limit_seconds, const std::function<Verdict()>& check) {
        if (!selected(id)) return;
        ++ran_;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= limit_seconds;
        const bool pass = v.pass && in_time;
        std::printf("[%s] %2d %-34s %s (%.1f s, limit %.0f s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                    v.detail.c_str(), secs, limit_seconds);
        std::fflush(stdout);
        failures_ += pass ? 0 : 1;
    }
    int failures() const { return failures_; }
    int ran() const { return ran_; }

private:
    std::vector<int> only_;
    int failures_ = 0;
    int ran_ = 0;
};

const std::array<double, 3> bump_centre{0.2, 0.3, 0.1};

// time-independent, so the noise-off residual has no ramp terms
TestFunction bump(const Grid& g) { return TestFunctionSpec{"bump", 2, bump_centre, std::nullopt}.build(g); }

RunParams params(int m, double dt, double T, std::uint64_t seed = 0) {
    RunParams p;
    p.grid = Grid(m);
    p.nu = 0.01;
    p.epsilon = 0.25;
    p.dt = dt;
    p.T = T;
    p.seed = seed;
    return p;
}

NoiseModel noise(NoiseKind kind, double amplitude, const Grid& g) {
    NoiseSpec s;
    s.kind = kind;
    s.amplitude = amplitude;
    return NoiseModel(s, g);
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

// Ensemble shared by criteria 6, 7, 8 and 10.
ExperimentConfig ensemble_config() {
    ExperimentConfig c;
    c.run = params(16, 1.0 / 64, 0.5);
    c.noise.kind = NoiseKind::additive;
    c.noise.amplitude = 0.3;
    c.initial.kind = InitialKind::taylor_green;
    c.initial.amplitude = 1.0;
    c.diagnostics.energy = true;
    c.diagnostics.vorticity = true;
    c.diagnostics.dissipation = false;
    c.diagnostics.test_functions = {TestFunctionSpec{"bump", 2, bump_centre, std::array<double, 3>{0.05, 0.45, 0.1}}};
    c.ensemble.paths = 512;
    c.ensemble.seed = 2024;
    return c;
}

Verdict oracle_suite() {
    const auto r = oracle::run_oracle_suite(oracle::SuiteLevel::fast);
    double worst = 0.0;
    for (const auto& c : r.checks) worst = std::max(worst, c.error / c.tolerance);
    std::string detail = format("%zu checks at M=8, worst error/tolerance %.2e", r.checks.size(), worst);
    for (const auto& f : r.failures()) detail += "; " + f;
    return {r.pass(), detail};
}

Verdict divergence_free() {
    const RunParams p = params(16, 1.0 / 256, 1000.0 / 256, 3);
    const BrownianIncrements incs(p.seed, 0, p.dt);
    std::string detail;
    bool pass = true;
    for (auto [kind, amplitude] : {std::pair{NoiseKind::additive, 0.3}, std::pair{NoiseKind::linear_multiplicative, 0.3},
                                   std::pair{NoiseKind::cosine, 0.5}}) {
        const NoiseModel nm = noise(kind, amplitude, p.grid);
        const Stepper st(p, nm);
        SpectralField u = initial_condition(random_solenoidal(p.grid, 11, 0.5), p.epsilon);
        double worst = divergence_residual(u);
        for (std::int64_t j = 0; j < 1000; ++j) {
            u = st.advance(u, j, incs);
            worst = std::max(worst, divergence_residual(u));
        }
        pass = pass && worst <= 1e-12;
        detail += format("%s%s max %.1e", detail.empty() ? "" : ", ", to_string(kind).c_str(), worst);
    }
    return {pass, detail + " over 1000 steps, M=16 (bound 1e-12)"};
}

Verdict energy_noise_off() {
    std::vector<double> res;
    for (double dt : {1.0 / 64, 1.0 / 128, 1.0 / 256}) {
        const RunParams p = params(16, dt, 0.5);
        const auto tr = integrate(p, taylor_green(p.grid, 1.0), noise(NoiseKind::additive, 0.0, p.grid));
        res.push_back(std::abs(energy_ledger(tr, bump(p.grid)).rows.back().residual));
    }
    const double o1 = order(res[0], res[1]), o2 = order(res[1], res[2]);
    return {o1 >= 1.0 && o2 >= 1.0,
            format("|residual(T)| %.2e, %.2e, %.2e at dt=1/64,1/128,1/256; orders %.2f, %.2f (need >= 1)", res[0],
                   res[1], res[2], o1, o2)};
}

Verdict commutator_identity() {
    const Grid g(16);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto u = random_solenoidal(g, 500 + i, 1.0);
        for (double ell : {0.25, 0.125, 0.0625}) worst = std::max(worst, commutator_identity_check(u, ell));
    }
    return {worst <= 1e-10, format("worst relative residual %.2e over 20 fields x 3 scales (bound 1e-10)", worst)};
}

Verdict displacement_quadrature() {
    const Grid g(16);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 5; ++i) {
        const auto u = random_solenoidal(g, 600 + i, 1.0);
        const auto fourier = dr_integrand(u, 0.125);
        const auto quad = oracle::dr_by_spherical_quadrature(u, 0.125, 24);
        double d = 0.0, s = 0.0;
        for (std::size_t x = 0; x < quad.size(); ++x) {
            const oracle::Point p{double(x / 256) / 16, double((x / 16) % 16) / 16, double(x % 16) / 16};
            d = std::max(d, std::abs(oracle::evaluate(fourier, p) - quad[x]));
            s = std::max(s, std::abs(quad[x]));
        }
        worst = std::max(worst, d / s);
    }
    return {worst <= 1e-4, format("worst relative difference %.2e, 24^3 nodes, l=1/8, 5 fields (bound 1e-4)", worst)};
}

Verdict martingale_zero_mean_and_qv(std::span<const EnergyLedger> ens) {
    const auto zm = martingale_zero_mean(ens);
    const auto qv = qv_consistency(ens);
    return {zm.pass && qv.pass, format("%zu paths: N_T mean/stderr %+.2f, QV gap mean/stderr %+.2f (bound 4)",
                                       ens.size(), zm.statistic, qv.statistic)};
}

Verdict supermartingale(std::span<const EnergyLedger> ens, std::size_t s, std::size_t t) {
    const auto r = supermartingale_test(ens, s, t, energy_split_events(ens, s));
    std::string detail = format("%zu paths, s=T/2:", ens.size());
    for (const auto& st : r.statistics) detail += format(" %s %+.2f", st.label.c_str(), st.statistic);
    return {r.pass, detail + " (bound +3)"};
}

Verdict lei(std::span<const EnergyLedger> ens) {
    const auto a = lei_scalar_check(ens, xi_one(), "xi_one");
    const auto b = lei_scalar_check(ens, xi_inverse_energy(), "xi_inverse_energy");
    auto z = [](const LEIReport& r) { return r.difference.mean / r.difference.stderr_mean; };
    return {a.pass && b.pass, format("%zu paths: (lhs - rhs)/stderr %+.2f for xi=1, %+.2f for xi=1/(1+sup|u|^2) (bound 3)",
                                     ens.size(), z(a), z(b))};
}

Verdict hessian_bounds() {
    std::string detail;
    bool pass = true;
    for (double delta : {0.1, 0.25, 0.5}) {
        try {
            const auto r = hessian_bounds_check(HFunction(delta), 1000000, 900);
            pass = pass && r.pass;
            detail += format("%sdelta %.2f min margin %.1e", detail.empty() ? "" : ", ", delta,
                             std::min({r.lower_margin, r.upper_margin, r.gradient_margin, r.sandwich_lower_margin,
                                       r.sandwich_upper_margin}));
        } catch (const VerificationFailure& e) {
            pass = false;
            detail += std::string(" violation: ") + e.what();
        }
    }
    return {pass, detail + ", 1e6 samples each"};
}

Verdict vorticity_identity(std::span<const VorticityLedger> stochastic) {
    std::vector<double> res;
    double margin = INFINITY;
    for (double dt : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        const RunParams p = params(16, dt, 0.5);
        const auto tr = integrate(p, taylor_green(p.grid, 1.0), noise(NoiseKind::additive, 0.0, p.grid));
        const VorticityLedger l = vorticity_ledger(tr, HFunction(0.5));
        res.push_back(std::abs(l.rows.back().residual));
        margin = std::min(margin, vorticity_bounds_report(std::span(&l, 1)).min_holder_margin);
    }
    const double o1 = order(res[0], res[1]), o2 = order(res[1], res[2]);
    const auto zm = vorticity_residual_zero_mean(stochastic);
    const auto b = vorticity_bounds_report(stochastic);
    margin = std::min(margin, b.min_holder_margin);
    const bool pass = o1 >= 1.0 && o2 >= 1.0 && zm.pass && margin >= 0.0;
    return {pass, format("noise-off orders %.2f, %.2f; %zu-path residual mean/stderr %+.2f (bound 4); min Holder margin %.2e",
                         o1, o2, stochastic.size(), zm.statistic, margin)};
}

Verdict noise_validators() {
    ExperimentConfig c;
    c.run.grid = Grid(16);
    c.noise.kind = NoiseKind::cosine;
    c.noise.amplitude = 0.5;
    c.noise.decay = 0.5;
    const NoiseValidation v = validate_noise(c, 20);
    const bool growth = v.growth.empirical <= (1.0 / 3.0) * 1.05;
    bool analytic = true, bound = v.tail.nonincreasing, match = true;
    std::string curve;
    for (std::size_t i = 0; i < v.tail.N.size(); ++i) {
        const double geometric = std::pow(4.0, -v.tail.N[i]) / 3.0;
        const double ratio = v.tail.empirical[i] / geometric;
        analytic = analytic && std::abs(v.tail.analytic[i] - geometric) <= 1e-12 * geometric;
        bound = bound && ratio <= 1.05;
        match = match && std::abs(ratio - 1.0) <= 0.05;
        curve += format(" %.2f", ratio);
    }
    return {growth && analytic && match,
            format("growth ratio %.4f (bound %.4f); tail empirical/geometric for N=1..%zu:%s (match needs 0.95..1.05; "
                   "upper bound %s, analytic tail %s)",
                   v.growth.empirical, 1.05 / 3.0, v.tail.N.size(), curve.c_str(), bound ? "holds" : "violated",
                   analytic ? "exact" : "off")};
}

Verdict determinism() {
    const fs::path root = fs::temp_directory_path() / "lsns-acceptance-determinism";
    fs::remove_all(root);
    ExperimentConfig c = ensemble_config();
    c.ensemble.paths = 6;
    c.diagnostics.dissipation = true;
    c.output.directory = (root / "a").string();
    run_experiment(c, {1, false});
    c.output.directory = (root / "b").string();
    run_experiment(c, {2, false});
    const ReplayResult r = replay(root / "a" / "manifest.json", c.diagnostics);

    std::size_t files = 0;
    bool same = true;
    for (const auto& e : fs::recursive_directory_iterator(root / "a" / "paths")) {
        if (!e.is_regular_file()) continue;
        const fs::path rel = fs::relative(e.path(), root / "a");
        same = same && io::read_text(e.path()) == io::read_text(root / "b" / rel);
        if (e.path().extension() == ".csv") same = same && io::read_text(e.path()) == io::read_text(r.directory / rel);
        ++files;
    }
    auto summary = [](const fs::path& dir) {
        auto j = nlohmann::json::parse(io::read_text(dir / "summary.json"));
        j.erase("timing");
        return j;
    };
    same = same && summary(root / "a") == summary(root / "b");
    fs::remove_all(root);
    return {same && files > 0,
            format("%zu path files and summary identical across serial, OpenMP and replay runs", files)};
}

struct SharedEnsemble {
    std::vector<EnergyLedger> energy;
    std::vector<VorticityLedger> vorticity;
    double seconds = 0.0;
};

SharedEnsemble run_shared(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const auto paths = run_ensemble(config, resolve_workers(config));
    SharedEnsemble e;
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::size_t blown = 0;
    for (const auto& p : paths) {
        if (p.blown_up()) {
            ++blown;
            continue;
        }
        e.energy.push_back(p.energy[0]);
        e.vorticity.push_back(*p.vorticity);
    }
    std::printf("     ensemble: %zu paths, M=16, dt=1/64, T=0.5, %zu blown up, %.1f s\n", paths.size(), blown, e.seconds);
    return e;
}

}  // namespace

// Arguments: criterion numbers to run (default: all).
int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    Board board(only);
    board.run(1, "spectral oracle suite", 60, oracle_suite);
    board.run(2, "divergence-free preservation", 300, divergence_free);
    board.run(3, "noise-off local energy equality", 600, energy_noise_off);
    board.run(4, "commutator identity", 120, commutator_identity);
    board.run(5, "D^l displacement quadrature", 300, displacement_quadrature);

    const ExperimentConfig config = ensemble_config();
    SharedEnsemble ens;
    if (board.selected(6) || board.selected(7) || board.selected(8) || board.selected(10)) ens = run_shared(config);
    const std::size_t half = std::min<std::size_t>(256, ens.energy.size());
    const std::span<const EnergyLedger> first(ens.energy.data(), half);
    const std::size_t t = static_cast<std::size_t>(config.run.steps());

    board.run(6, "martingale zero mean and QV", 1800 - ens.seconds, [&] { return martingale_zero_mean_and_qv(ens.energy); });
    board.run(7, "supermartingale", 1200, [&] { return supermartingale(first, t / 2, t); });
    board.run(8, "local energy inequality", 1200, [&] { return lei(first); });
    board.run(9, "vorticity transform bounds", 60, hessian_bounds);
    board.run(10, "vorticity ledger identity", 1800,
              [&] { return vorticity_identity(std::span<const VorticityLedger>(ens.vorticity.data(), half)); });
    board.run(11, "noise validators", 60, noise_validators);
    board.run(12, "end-to-end determinism", 600, determinism);

    std::printf("%d of %d criteria failed\n", board.failures(), board.ran());
    return board.failures() == 0 ? 0 : 1;
}
