#include "lsns/spectral.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "lsns/errors.hpp"
#include "lsns/fft.hpp"

namespace lsns {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::atomic<bool> skip_truncation_hook{false};

bool carried(int n, int source, int target) {
    // A wavenumber survives resampling if both grids represent it unambiguously.
    if (source == target) return true;
    const int lim = std::min(source, target) / 2;
    return std::abs(n) < lim;
}

// Copy the modes of one grid into a zero spectrum of another size.
void resample_modes(std::span<const cplx> in, int source, std::span<cplx> out, int target) {
    std::fill(out.begin(), out.end(), cplx{});
    const Grid gs(source, 0);
    const Grid gt(target, 0);
    for (int i = 0; i < source; ++i) {
        const int ni = gs.wavenumber(i);
        if (!carried(ni, source, target)) continue;
        for (int j = 0; j < source; ++j) {
            const int nj = gs.wavenumber(j);
            if (!carried(nj, source, target)) continue;
            for (int k = 0; k < source; ++k) {
                const int nk = gs.wavenumber(k);
                if (!carried(nk, source, target)) continue;
                out[gt.flat(gt.index_of(ni), gt.index_of(nj), gt.index_of(nk))] = in[gs.flat(i, j, k)];
            }
        }
    }
}

template <int C>
void require_same_grid(const ModalField<C>& a, const ModalField<C>& b, const char* what) {
    if (!(a.grid() == b.grid())) throw ConfigError(std::string(what) + ": grid mismatch");
}

}  // namespace

namespace testing_hooks {
void set_skip_product_truncation(bool enabled) { skip_truncation_hook = enabled; }
bool skip_product_truncation() { return skip_truncation_hook; }
}  // namespace testing_hooks

// --- transforms ------------------------------------------------------------

template <int C>
static ModalField<C> forward_impl(const GridSamples<C>& samples, const Grid& grid) {
    if (samples.n != grid.modes_per_axis()) throw ConfigError("forward_transform: sample array does not match grid");
    for (const auto& v : samples.values)
        if (v.size() != grid.size()) throw ConfigError("forward_transform: sample array has wrong length");
    ModalField<C> f(grid);
    for (int c = 0; c < C; ++c) fft::forward(samples.n, samples.values[c], f.component(c));
    return f;
}

SpectralField forward_transform(const PhysicalVector& s, const Grid& g) { return forward_impl(s, g); }
ScalarField forward_transform(const PhysicalScalar& s, const Grid& g) { return forward_impl(s, g); }

template <int C>
static GridSamples<C> inverse_impl(const ModalField<C>& f) {
    GridSamples<C> out(f.grid().modes_per_axis());
    for (int c = 0; c < C; ++c) fft::inverse(out.n, f.component(c), out.values[c]);
    return out;
}

PhysicalVector inverse_transform(const SpectralField& f) { return inverse_impl(f); }
PhysicalScalar inverse_transform(const ScalarField& f) { return inverse_impl(f); }

template <int C>
static GridSamples<C> sample_impl(const ModalField<C>& f, int p) {
    const int m = f.grid().modes_per_axis();
    if (p == m) return inverse_impl(f);
    GridSamples<C> out(p);
    std::vector<cplx> buffer(out.size());
    for (int c = 0; c < C; ++c) {
        resample_modes(f.component(c), m, buffer, p);
        fft::inverse(p, buffer, out.values[c]);
    }
    return out;
}

PhysicalVector sample_on(const SpectralField& f, int p) { return sample_impl(f, p); }
PhysicalScalar sample_on(const ScalarField& f, int p) { return sample_impl(f, p); }

template <int C>
static ModalField<C> onto_impl(const GridSamples<C>& s, const Grid& target) {
    if (s.n == target.modes_per_axis()) return forward_impl(s, target);
    ModalField<C> out(target);
    std::vector<cplx> buffer(s.size());
    for (int c = 0; c < C; ++c) {
        fft::forward(s.n, s.values[c], buffer);
        resample_modes(buffer, s.n, out.component(c), target.modes_per_axis());
    }
    return out;
}

ScalarField transform_onto(const PhysicalScalar& s, const Grid& t) { return onto_impl(s, t); }
SpectralField transform_onto(const PhysicalVector& s, const Grid& t) { return onto_impl(s, t); }

template <int C>
ModalField<C> regrid(const ModalField<C>& f, const Grid& target) {
    ModalField<C> out(target);
    for (int c = 0; c < C; ++c)
        resample_modes(f.component(c), f.grid().modes_per_axis(), out.component(c), target.modes_per_axis());
    return out;
}
template ModalField<1> regrid(const ModalField<1>&, const Grid&);
template ModalField<3> regrid(const ModalField<3>&, const Grid&);

// --- differential operators --------------------------------------------------

template <int C>
ModalField<C> partial(const ModalField<C>& f, int axis) {
    const Grid& g = f.grid();
    const int m = g.modes_per_axis();
    ModalField<C> out(g);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const int idx[3] = {i, j, k};
                const double kn = two_pi * g.derivative_wavenumber(idx[axis]);
                const std::size_t fl = g.flat(i, j, k);
                for (int c = 0; c < C; ++c) out.at(c, fl) = cplx(0.0, kn) * f.at(c, fl);
            }
    return out;
}
template ModalField<1> partial(const ModalField<1>&, int);
template ModalField<3> partial(const ModalField<3>&, int);

ScalarField divergence(const SpectralField& u) {
    const Grid& g = u.grid();
    ScalarField out(g);
    const int m = g.modes_per_axis();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const std::size_t fl = g.flat(i, j, k);
                const double n0 = g.derivative_wavenumber(i), n1 = g.derivative_wavenumber(j),
                             n2 = g.derivative_wavenumber(k);
                out.at(0, fl) = cplx(0.0, two_pi) * (n0 * u.at(0, fl) + n1 * u.at(1, fl) + n2 * u.at(2, fl));
            }
    return out;
}

SpectralField gradient(const ScalarField& s) {
    const Grid& g = s.grid();
    SpectralField out(g);
    const int m = g.modes_per_axis();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const std::size_t fl = g.flat(i, j, k);
                const cplx v = cplx(0.0, two_pi) * s.at(0, fl);
                out.at(0, fl) = double(g.derivative_wavenumber(i)) * v;
                out.at(1, fl) = double(g.derivative_wavenumber(j)) * v;
                out.at(2, fl) = double(g.derivative_wavenumber(k)) * v;
            }
    return out;
}

SpectralField curl(const SpectralField& u) {
    const Grid& g = u.grid();
    SpectralField out(g);
    const int m = g.modes_per_axis();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const std::size_t fl = g.flat(i, j, k);
                const double n0 = g.derivative_wavenumber(i), n1 = g.derivative_wavenumber(j),
                             n2 = g.derivative_wavenumber(k);
                const cplx a = u.at(0, fl), b = u.at(1, fl), c = u.at(2, fl);
                const cplx f(0.0, two_pi);
                out.at(0, fl) = f * (n1 * c - n2 * b);
                out.at(1, fl) = f * (n2 * a - n0 * c);
                out.at(2, fl) = f * (n0 * b - n1 * a);
            }
    return out;
}

template <int C>
ModalField<C> laplacian(const ModalField<C>& f) {
    const Grid& g = f.grid();
    ModalField<C> out(g);
    for (std::size_t fl = 0; fl < g.size(); ++fl) {
        const auto n = g.mode(fl);
        const double k2 = two_pi * two_pi * double(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        for (int c = 0; c < C; ++c) out.at(c, fl) = -k2 * f.at(c, fl);
    }
    return out;
}
template ModalField<1> laplacian(const ModalField<1>&);
template ModalField<3> laplacian(const ModalField<3>&);

template <int C>
double h1_seminorm_squared(const ModalField<C>& f) {
    const Grid& g = f.grid();
    const int m = g.modes_per_axis();
    double s = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const double n0 = g.derivative_wavenumber(i), n1 = g.derivative_wavenumber(j),
                             n2 = g.derivative_wavenumber(k);
                const double k2 = two_pi * two_pi * (n0 * n0 + n1 * n1 + n2 * n2);
                const std::size_t fl = g.flat(i, j, k);
                for (int c = 0; c < C; ++c) s += k2 * std::norm(f.at(c, fl));
            }
    return s;
}
template double h1_seminorm_squared(const ModalField<1>&);
template double h1_seminorm_squared(const ModalField<3>&);

SpectralField leray_project(const SpectralField& v) {
    const Grid& g = v.grid();
    SpectralField out = v;
    const int m = g.modes_per_axis();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const double n[3] = {double(g.derivative_wavenumber(i)), double(g.derivative_wavenumber(j)),
                                     double(g.derivative_wavenumber(k))};
                const double n2 = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
                if (n2 == 0.0) continue;
                const std::size_t fl = g.flat(i, j, k);
                const cplx dot = n[0] * v.at(0, fl) + n[1] * v.at(1, fl) + n[2] * v.at(2, fl);
                for (int c = 0; c < 3; ++c) out.at(c, fl) -= n[c] * dot / n2;
            }
    return out;
}

double divergence_residual(const SpectralField& u) {
    const double scale = u.max_abs();
    if (scale == 0.0) return 0.0;
    const Grid& g = u.grid();
    const int m = g.modes_per_axis();
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const std::size_t fl = g.flat(i, j, k);
                const cplx dot = double(g.derivative_wavenumber(i)) * u.at(0, fl) +
                                 double(g.derivative_wavenumber(j)) * u.at(1, fl) +
                                 double(g.derivative_wavenumber(k)) * u.at(2, fl);
                worst = std::max(worst, std::abs(dot));
            }
    return worst / scale;
}

SpectralField heat_factor(const SpectralField& u, double nu, double dt) {
    const Grid& g = u.grid();
    SpectralField out(g);
    for (std::size_t fl = 0; fl < g.size(); ++fl) {
        const auto n = g.mode(fl);
        const double f = std::exp(-two_pi * two_pi * nu * double(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) * dt);
        for (int c = 0; c < 3; ++c) out.at(c, fl) = f * u.at(c, fl);
    }
    return out;
}

template <int C>
ModalField<C> mollify(const ModalField<C>& f, const Mollifier& m) {
    if (!(f.grid() == m.grid())) throw ConfigError("mollify: grid mismatch");
    ModalField<C> out(f.grid());
    const auto mult = m.multipliers();
    for (int c = 0; c < C; ++c) {
        auto src = f.component(c);
        auto dst = out.component(c);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = mult[i] * src[i];
    }
    return out;
}
template ModalField<1> mollify(const ModalField<1>&, const Mollifier&);
template ModalField<3> mollify(const ModalField<3>&, const Mollifier&);

// --- products ------------------------------------------------------------------

namespace {

template <int C>
ModalField<C> finish_product(ModalField<C> f) {
    return testing_hooks::skip_product_truncation() ? f : truncate(std::move(f));
}

}  // namespace

ScalarField dealiased_product(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "dealiased_product");
    const Grid& g = a.grid();
    auto pa = inverse_transform(truncate(a));
    auto pb = inverse_transform(truncate(b));
    for (std::size_t i = 0; i < pa.size(); ++i) pa.values[0][i] *= pb.values[0][i];
    return finish_product(forward_transform(pa, g));
}

namespace {

// Physical-space tensor v_j u_i on the M grid, transformed back; index [j][i].
std::array<std::array<ScalarField, 3>, 3> product_tensor(const SpectralField& u, const SpectralField& v) {
    const Grid& g = u.grid();
    const auto pu = inverse_transform(truncate(u));
    const auto pv = inverse_transform(truncate(v));
    std::array<std::array<ScalarField, 3>, 3> out;
    PhysicalScalar prod(g.modes_per_axis());
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            for (std::size_t x = 0; x < prod.size(); ++x) prod.values[0][x] = pv.values[j][x] * pu.values[i][x];
            out[j][i] = finish_product(forward_transform(prod, g));
        }
    return out;
}

}  // namespace

SpectralField nonlinear_term(const SpectralField& u, const SpectralField& v) {
    require_same_grid(u, v, "nonlinear_term");
    const Grid& g = u.grid();
    const auto t = product_tensor(u, v);
    SpectralField out(g);
    const int m = g.modes_per_axis();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const std::size_t fl = g.flat(i, j, k);
                const double n[3] = {double(g.derivative_wavenumber(i)), double(g.derivative_wavenumber(j)),
                                     double(g.derivative_wavenumber(k))};
                for (int c = 0; c < 3; ++c) {
                    cplx s = 0.0;
                    for (int d = 0; d < 3; ++d) s += n[d] * t[d][c].at(0, fl);
                    out.at(c, fl) = cplx(0.0, two_pi) * s;
                }
            }
    return out;
}

ScalarField solve_pressure(const SpectralField& advecting, const SpectralField& u) {
    require_same_grid(advecting, u, "solve_pressure");
    const Grid& g = u.grid();
    const auto t = product_tensor(u, advecting);
    ScalarField p(g);
    const int m = g.modes_per_axis();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const double n[3] = {double(g.derivative_wavenumber(i)), double(g.derivative_wavenumber(j)),
                                     double(g.derivative_wavenumber(k))};
                const double n2 = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
                if (n2 == 0.0) continue;
                const std::size_t fl = g.flat(i, j, k);
                cplx s = 0.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) s += n[a] * n[b] * t[a][b].at(0, fl);
                p.at(0, fl) = -s / n2;
            }
    return p;
}

ScalarField solve_pressure(const SpectralField& u) { return solve_pressure(u, u); }

}  // namespace lsns
