#include "lsns/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lsns/errors.hpp"
#include "lsns/spectral.hpp"

namespace lsns {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Wavevectors with positive first nonzero component, ordered by |n|^2 then lexicographically.
const std::vector<Wavevector>& half_space_modes() {
    static const std::vector<Wavevector> modes = [] {
        std::vector<Wavevector> out;
        for (int a = -3; a <= 3; ++a)
            for (int b = -3; b <= 3; ++b)
                for (int c = -3; c <= 3; ++c) {
                    const bool positive = a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0)));
                    if (positive) out.push_back({a, b, c});
                }
        auto norm2 = [](const Wavevector& n) { return n[0] * n[0] + n[1] * n[1] + n[2] * n[2]; };
        std::stable_sort(out.begin(), out.end(), [&](const Wavevector& x, const Wavevector& y) {
            return norm2(x) != norm2(y) ? norm2(x) < norm2(y) : x < y;
        });
        return out;
    }();
    return modes;
}

double norm(const Wavevector& n) { return std::sqrt(double(n[0] * n[0] + n[1] * n[1] + n[2] * n[2])); }

std::array<double, 3> polarisation(const Wavevector& n, int which) {
    const std::array<double, 3> nh = {n[0] / norm(n), n[1] / norm(n), n[2] / norm(n)};
    int axis = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(nh[i]) < std::abs(nh[axis])) axis = i;
    std::array<double, 3> e{};
    e[axis] = 1.0;
    auto cross = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
        return std::array<double, 3>{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    };
    auto p = cross(nh, e);
    const double len = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    for (auto& v : p) v /= len;
    return which == 0 ? p : cross(nh, p);
}

Wavevector vector_mode(int k) { return half_space_modes()[(k - 1) / 4]; }
Wavevector scalar_mode(int k) { return half_space_modes()[(k - 2) / 2]; }

void check_samples(const std::vector<SpectralField>& samples) {
    if (samples.empty()) throw ConfigError("noise validator needs at least one sample");
    for (const auto& s : samples)
        if (divergence_residual(s) > 1e-12) throw ContractViolation("noise validator samples must be divergence free");
}

}  // namespace

NoiseKind parse_noise_kind(const std::string& name) {
    if (name == "additive") return NoiseKind::additive;
    if (name == "linear_multiplicative") return NoiseKind::linear_multiplicative;
    if (name == "cosine") return NoiseKind::cosine;
    throw ConfigError("unknown noise kind '" + name + "'");
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::additive: return "additive";
    case NoiseKind::linear_multiplicative: return "linear_multiplicative";
    case NoiseKind::cosine: return "cosine";
    }
    return "?";
}

TruncationLevel TruncationLevel::from_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("truncation level needs epsilon > 0");
    return {epsilon, static_cast<int>(std::floor(1.0 / epsilon)) + 1};
}

SpectralField NoiseModel::vector_basis(const Grid& grid, int k) {
    if (k < 1 || k > 64) throw ConfigError("vector basis index out of range");
    const Wavevector n = vector_mode(k);
    const Wavevector mn = {-n[0], -n[1], -n[2]};
    if (!grid.retained(n)) throw ConfigError("grid too coarse for noise basis field " + std::to_string(k));
    const auto p = polarisation(n, ((k - 1) / 2) % 2);
    const bool sine = (k - 1) % 2 == 1;
    // sqrt(2) p cos(2 pi n.x) and sqrt(2) p sin(2 pi n.x)
    const cplx a = sine ? cplx(0.0, -std::numbers::sqrt2 / 2.0) : cplx(std::numbers::sqrt2 / 2.0, 0.0);
    SpectralField f(grid);
    for (int c = 0; c < 3; ++c) {
        f.at(c, grid.flat_mode(n)) = a * p[c];
        f.at(c, grid.flat_mode(mn)) = std::conj(a) * p[c];
    }
    return f;
}

ScalarField NoiseModel::scalar_basis(const Grid& grid, int k) {
    if (k < 1 || k > 64) throw ConfigError("scalar basis index out of range");
    ScalarField f(grid);
    if (k == 1) {
        f.at(0, 0) = 1.0;
        return f;
    }
    const Wavevector n = scalar_mode(k);
    const Wavevector mn = {-n[0], -n[1], -n[2]};
    if (!grid.retained(n)) throw ConfigError("grid too coarse for noise basis field " + std::to_string(k));
    const bool sine = k % 2 == 1;
    const cplx a = sine ? cplx(0.0, -std::numbers::sqrt2 / 2.0) : cplx(std::numbers::sqrt2 / 2.0, 0.0);
    f.at(0, grid.flat_mode(n)) = a;
    f.at(0, grid.flat_mode(mn)) = std::conj(a);
    return f;
}

NoiseModel::NoiseModel(const NoiseSpec& spec, const Grid& grid) : spec_(spec), grid_(grid) {
    if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude)) throw ConfigError("noise amplitude must be >= 0");
    if (!(spec.decay > 0.0 && spec.decay <= 1.0)) throw ConfigError("noise decay must lie in (0, 1]");
    if (spec.max_k < 1 || spec.max_k > 64) throw ConfigError("noise max_k must lie in [1, 64]");
    if (spec.terms < 0) throw ConfigError("noise terms must be >= 0");
    if (spec.terms == 0 && spec.decay == 1.0 && spec.amplitude > 0.0)
        throw ConfigError("an unbounded noise sequence needs decay < 1");
    // fail early if the grid cannot hold the basis
    if (spec.kind == NoiseKind::linear_multiplicative)
        scalar_basis(grid, spec.max_k);
    else
        vector_basis(grid, 4 * ((spec.max_k - 1) / 4) + 1);
}

double NoiseModel::coefficient(int k) const {
    if (spec_.terms > 0 && k > spec_.terms) return 0.0;
    return spec_.amplitude * std::pow(spec_.decay, k - 1);
}

SpectralField NoiseModel::eval(int k, const SpectralField& u) const {
    if (k < 1 || k > spec_.max_k) throw ConfigError("noise index " + std::to_string(k) + " out of range");
    if (!(u.grid() == grid_)) throw ConfigError("noise model and field live on different grids");
    if (spec_.kind == NoiseKind::additive) return coefficient(k) * vector_basis(grid_, k);
    return eval_all(k, u).back();
}

std::vector<SpectralField> NoiseModel::eval_all(int n, const SpectralField& u) const {
    if (n < 0 || n > spec_.max_k) throw ConfigError("noise index " + std::to_string(n) + " out of range");
    if (!(u.grid() == grid_)) throw ConfigError("noise model and field live on different grids");
    std::vector<SpectralField> out;
    out.reserve(n);
    if (spec_.kind == NoiseKind::additive) {
        for (int k = 1; k <= n; ++k) out.push_back(coefficient(k) * vector_basis(grid_, k));
        return out;
    }
    const int m = grid_.modes_per_axis();
    const auto up = inverse_transform(u);
    PhysicalVector work(m);
    if (spec_.kind == NoiseKind::linear_multiplicative) {
        for (int k = 1; k <= n; ++k) {
            if (coefficient(k) == 0.0) {
                out.emplace_back(grid_);
                continue;
            }
            const auto s = inverse_transform(coefficient(k) * scalar_basis(grid_, k));
            for (int c = 0; c < 3; ++c)
                for (std::size_t i = 0; i < up.size(); ++i) work.values[c][i] = s.values[0][i] * up.values[c][i];
            out.push_back(forward_transform(work, grid_));
        }
        return out;
    }
    std::vector<double> g(up.size());
    for (std::size_t i = 0; i < up.size(); ++i)
        g[i] = std::sqrt(1.0 + up.values[0][i] * up.values[0][i] + up.values[1][i] * up.values[1][i] +
                         up.values[2][i] * up.values[2][i]);
    for (int k = 1; k <= n; ++k) {
        if (coefficient(k) == 0.0) {
            out.emplace_back(grid_);
            continue;
        }
        const auto f = inverse_transform(coefficient(k) * vector_basis(grid_, k));
        for (std::size_t i = 0; i < up.size(); ++i) {
            const double w = std::cos(k * g[i]);
            for (int c = 0; c < 3; ++c) work.values[c][i] = f.values[c][i] * w;
        }
        out.push_back(forward_transform(work, grid_));
    }
    return out;
}

double NoiseModel::growth_weight(int k) const {
    const double c2 = coefficient(k) * coefficient(k);
    if (spec_.kind == NoiseKind::linear_multiplicative && k > 1) return 2.0 * c2;  // ||s_k||_C0^2 = 2
    return c2;
}

double NoiseModel::vorticity_weight(int k) const {
    const double c2 = coefficient(k) * coefficient(k);
    switch (spec_.kind) {
    case NoiseKind::additive: {
        const double kn = two_pi * norm(vector_mode(k));
        return c2 * kn * kn;
    }
    case NoiseKind::linear_multiplicative: {
        // (||s||_C0 + ||grad s||_C0 / (2 pi))^2, Poincare for mean-free u
        if (k == 1) return c2;
        const double a = std::numbers::sqrt2 * (1.0 + norm(scalar_mode(k)));
        return c2 * a * a;
    }
    case NoiseKind::cosine: {
        // curl(f cos(k g)) = cos(k g) curl f - k sin(k g) grad g x f with |grad g| <= |grad u|
        const double kn = two_pi * norm(vector_mode(k));
        return 2.0 * c2 * (kn * kn + 2.0 * k * k);
    }
    }
    return 0.0;
}

double NoiseModel::growth_bound(int n) const {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += growth_weight(k);
    return s;
}

double NoiseModel::growth_tail(int n) const {
    const double a2 = spec_.amplitude * spec_.amplitude;
    const double r2 = spec_.decay * spec_.decay;
    const double factor = spec_.kind == NoiseKind::linear_multiplicative ? 2.0 : 1.0;
    if (n < 1) return growth_weight(1) + growth_tail(1);
    if (spec_.terms > 0) {
        if (n >= spec_.terms) return 0.0;
        if (r2 == 1.0) return factor * a2 * (spec_.terms - n);
        return factor * a2 * (std::pow(r2, n) - std::pow(r2, spec_.terms)) / (1.0 - r2);
    }
    return factor * a2 * std::pow(r2, n) / (1.0 - r2);
}

double NoiseModel::vorticity_bound(int n) const {
    if (n > spec_.max_k) throw ConfigError("vorticity bound needs N <= max_k");
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += vorticity_weight(k);
    return s;
}

RatioReport validate_linear_growth(const NoiseModel& model, const std::vector<SpectralField>& samples, int N) {
    check_samples(samples);
    const int n = std::min(N, model.max_k());
    RatioReport r;
    for (const auto& u : samples) {
        double s = 0.0;
        for (const auto& f : model.eval_all(n, u)) s += f.l2_norm_squared();
        r.empirical = std::max(r.empirical, s / (1.0 + u.l2_norm_squared()));
    }
    r.analytic = model.growth_bound(n);
    r.pass = r.empirical <= 1.05 * r.analytic;
    r.note = "supremum estimated over divergence-free samples only";
    return r;
}

TailCurve validate_tail_decay(const NoiseModel& model, const std::vector<SpectralField>& samples,
                              const std::vector<int>& N_values) {
    check_samples(samples);
    if (!std::is_sorted(N_values.begin(), N_values.end()) ||
        std::adjacent_find(N_values.begin(), N_values.end()) != N_values.end())
        throw ConfigError("tail decay N values must be strictly increasing");
    TailCurve t;
    t.N = N_values;
    t.empirical.assign(N_values.size(), 0.0);
    for (const auto& u : samples) {
        const auto all = model.eval_all(model.max_k(), u);
        std::vector<double> norms(all.size());
        for (std::size_t k = 0; k < all.size(); ++k) norms[k] = all[k].l2_norm_squared();
        const double denom = 1.0 + u.l2_norm_squared();
        for (std::size_t i = 0; i < N_values.size(); ++i) {
            double s = 0.0;
            // sum from the top so that larger N accumulate a subset of the same terms
            for (int k = model.max_k(); k > std::max(N_values[i], 0); --k) s += norms[k - 1];
            t.empirical[i] = std::max(t.empirical[i], s / denom);
        }
    }
    t.nonincreasing = true;
    t.pass = true;
    for (std::size_t i = 0; i < N_values.size(); ++i) {
        t.analytic.push_back(model.growth_tail(N_values[i]));
        if (i > 0 && t.empirical[i] > t.empirical[i - 1]) t.nonincreasing = false;
        if (t.empirical[i] > 1.05 * t.analytic.back()) t.pass = false;
    }
    t.pass = t.pass && t.nonincreasing;
    t.note = "empirical tail truncated at max_k; analytic tail covers the whole sequence";
    return t;
}

RatioReport validate_vorticity_control(const NoiseModel& model, const std::vector<SpectralField>& samples, int N) {
    check_samples(samples);
    const int n = std::min(N, model.max_k());
    RatioReport r;
    for (const auto& u : samples) {
        double s = 0.0;
        for (const auto& f : model.eval_all(n, u)) s += curl(f).l2_norm_squared();
        r.empirical = std::max(r.empirical, s / (1.0 + h1_seminorm_squared(u)));
    }
    r.analytic = model.vorticity_bound(n);
    r.pass = r.empirical <= 1.05 * r.analytic;
    r.note = model.kind() == NoiseKind::linear_multiplicative
                 ? "bound uses the Poincare inequality and assumes mean-free samples"
                 : "supremum estimated over divergence-free samples only";
    return r;
}

}  // namespace lsns
