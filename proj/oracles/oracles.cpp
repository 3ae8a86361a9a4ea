#include "lsns/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>

#include "lsns/mollifier.hpp"

namespace lsns::oracle {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(tol, 1e-15 * std::abs(left + right))) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return adaptive_simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 30);
}

// Retained-mode list of a field's grid (wavevector, flat index).
struct ModeList {
    std::vector<std::array<int, 3>> n;
    std::vector<std::size_t> flat;
};

ModeList retained_modes(const Grid& g) {
    ModeList out;
    const int k = g.dealias_cutoff();
    for (int a = -k; a <= k; ++a)
        for (int b = -k; b <= k; ++b)
            for (int c = -k; c <= k; ++c) {
                out.n.push_back({a, b, c});
                out.flat.push_back(g.flat_mode({a, b, c}));
            }
    return out;
}

// (v_j u_i)_n for retained n by direct convolution: index [j][i][retained slot].
std::vector<std::array<std::array<cplx, 3>, 3>> convolve_tensor(const SpectralField& u, const SpectralField& v,
                                                                 const ModeList& modes) {
    const Grid& g = u.grid();
    const int k = g.dealias_cutoff();
    std::vector<std::array<std::array<cplx, 3>, 3>> out(modes.n.size());
    for (std::size_t s = 0; s < modes.n.size(); ++s) {
        const auto& n = modes.n[s];
        std::array<std::array<cplx, 3>, 3> acc{};
        for (std::size_t p = 0; p < modes.n.size(); ++p) {
            const auto& np = modes.n[p];
            const std::array<int, 3> q = {n[0] - np[0], n[1] - np[1], n[2] - np[2]};
            if (std::abs(q[0]) > k || std::abs(q[1]) > k || std::abs(q[2]) > k) continue;
            const std::size_t fq = g.flat_mode(q);
            for (int j = 0; j < 3; ++j)
                for (int i = 0; i < 3; ++i) acc[j][i] += v.at(j, modes.flat[p]) * u.at(i, fq);
        }
        out[s] = acc;
    }
    return out;
}

}  // namespace

std::vector<cplx> direct_dft(int m, const std::vector<double>& samples) {
    std::vector<cplx> out(static_cast<std::size_t>(m) * m * m);
    const Grid g(m, 0);
    const double scale = 1.0 / (double(m) * m * m);
    for (std::size_t f = 0; f < out.size(); ++f) {
        const auto n = g.mode(f);
        cplx s = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) {
                    const double phase = -two_pi * (double(n[0] * i) + double(n[1] * j) + double(n[2] * k)) / m;
                    s += samples[g.flat(i, j, k)] * cplx(std::cos(phase), std::sin(phase));
                }
        out[f] = s * scale;
    }
    return out;
}

SpectralField projection_by_matrix(const SpectralField& v) {
    const Grid& g = v.grid();
    SpectralField out(g);
    const int half = g.modes_per_axis() / 2;
    for (std::size_t f = 0; f < g.size(); ++f) {
        auto n = g.mode(f);
        for (auto& c : n)
            if (c == -half) c = 0;
        const double n2 = double(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        double p[3][3];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) p[a][b] = (a == b ? 1.0 : 0.0) - (n2 > 0 ? n[a] * n[b] / n2 : 0.0);
        for (int a = 0; a < 3; ++a) {
            cplx s = 0.0;
            for (int b = 0; b < 3; ++b) s += p[a][b] * v.at(b, f);
            out.at(a, f) = s;
        }
    }
    return out;
}

SpectralField nonlinear_by_convolution(const SpectralField& u, const SpectralField& v) {
    const Grid& g = u.grid();
    const auto modes = retained_modes(g);
    const auto t = convolve_tensor(u, v, modes);
    SpectralField out(g);
    for (std::size_t s = 0; s < modes.n.size(); ++s) {
        const auto& n = modes.n[s];
        for (int i = 0; i < 3; ++i) {
            cplx acc = 0.0;
            for (int j = 0; j < 3; ++j) acc += cplx(0.0, two_pi * n[j]) * t[s][j][i];
            out.at(i, modes.flat[s]) = acc;
        }
    }
    return out;
}

ScalarField pressure_by_mode_arithmetic(const SpectralField& advecting, const SpectralField& u) {
    const Grid& g = u.grid();
    const auto modes = retained_modes(g);
    const auto t = convolve_tensor(u, advecting, modes);
    ScalarField out(g);
    for (std::size_t s = 0; s < modes.n.size(); ++s) {
        const auto& n = modes.n[s];
        const double n2 = double(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        if (n2 == 0.0) continue;
        // div div(T) for T_ij = v_i u_j gives (2 pi i)^2 n_i n_j T_ij; (-Lap)^{-1} divides by 4 pi^2 |n|^2.
        cplx acc = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) acc += double(n[a] * n[b]) * t[s][a][b];
        out.at(0, modes.flat[s]) = -acc / n2;
    }
    return out;
}

double bump_multiplier_by_quadrature(double epsilon, const std::array<int, 3>& n) {
    const double nn = std::sqrt(double(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]));
    // Rotate n onto the z axis; the bump is radial so only |n| matters.
    auto integral = [&](double freq) {
        auto outer = [&](double z) {
            const double rmax2 = 1.0 - z * z;
            if (rmax2 <= 0.0) return 0.0;
            auto inner = [&](double rho) {
                const double r2 = z * z + rho * rho;
                if (r2 >= 1.0) return 0.0;
                return two_pi * rho * std::exp(-1.0 / (1.0 - r2));
            };
            return simpson(inner, 0.0, std::sqrt(rmax2), 1e-15) * std::cos(two_pi * freq * z);
        };
        return simpson(outer, -1.0, 1.0, 1e-14);
    };
    return integral(epsilon * nn) / integral(0.0);
}

std::array<double, 3> evaluate(const SpectralField& u, const Point& x) {
    const Grid& g = u.grid();
    std::array<double, 3> out{};
    for (std::size_t f = 0; f < g.size(); ++f) {
        const auto n = g.mode(f);
        const double phase = two_pi * (n[0] * x[0] + n[1] * x[1] + n[2] * x[2]);
        const cplx e(std::cos(phase), std::sin(phase));
        for (int c = 0; c < 3; ++c) out[c] += (u.at(c, f) * e).real();
    }
    return out;
}

double evaluate(const ScalarField& s, const Point& x) {
    const Grid& g = s.grid();
    double out = 0.0;
    for (std::size_t f = 0; f < g.size(); ++f) {
        const auto n = g.mode(f);
        const double phase = two_pi * (n[0] * x[0] + n[1] * x[1] + n[2] * x[2]);
        out += (s.at(0, f) * cplx(std::cos(phase), std::sin(phase))).real();
    }
    return out;
}

double riemann_sum(int q, const std::function<double(const Point&)>& f) {
    double s = 0.0;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            for (int k = 0; k < q; ++k) s += f({double(i) / q, double(j) / q, double(k) / q});
    return s / (double(q) * q * q);
}

namespace {

struct Displacement {
    Point y;
    std::array<double, 3> weighted_gradient;  // quadrature weight times grad(alpha_l)(y)
};

// (1/4) sum over nodes of w grad(alpha)(y) . du |du|^2 at the M-grid points.
std::vector<double> dr_from_nodes(const SpectralField& u, const std::vector<Displacement>& nodes) {
    const Grid& g = u.grid();
    const int m = g.modes_per_axis();
    const int kc = g.dealias_cutoff();
    const int w = 2 * kc + 1;
    const std::size_t npts = g.size();

    // Retained coefficients packed as [c][a][b][d] with a, b, d in [-kc, kc].
    std::vector<cplx> coeff(3 * w * w * w);
    for (int c = 0; c < 3; ++c)
        for (int a = -kc; a <= kc; ++a)
            for (int b = -kc; b <= kc; ++b)
                for (int d = -kc; d <= kc; ++d)
                    coeff[((c * w + a + kc) * w + b + kc) * w + d + kc] = u.at(c, g.flat_mode({a, b, d}));

    // e^{2 pi i n x_j} for grid coordinates x_j = j / m.
    std::vector<cplx> ex(w * m);
    for (int a = -kc; a <= kc; ++a)
        for (int j = 0; j < m; ++j) ex[(a + kc) * m + j] = std::polar(1.0, two_pi * a * j / double(m));

    // Separable synthesis of a retained-mode field on the m^3 grid.
    auto synthesise = [&](const std::vector<cplx>& cf, int c, std::vector<double>& out) {
        std::vector<cplx> s1(w * w * m), s2(w * m * m);
        for (int a = 0; a < w; ++a)
            for (int b = 0; b < w; ++b)
                for (int z = 0; z < m; ++z) {
                    cplx acc = 0.0;
                    for (int d = 0; d < w; ++d) acc += cf[((c * w + a) * w + b) * w + d] * ex[d * m + z];
                    s1[(a * w + b) * m + z] = acc;
                }
        for (int a = 0; a < w; ++a)
            for (int y = 0; y < m; ++y)
                for (int z = 0; z < m; ++z) {
                    cplx acc = 0.0;
                    for (int b = 0; b < w; ++b) acc += s1[(a * w + b) * m + z] * ex[b * m + y];
                    s2[(a * m + y) * m + z] = acc;
                }
        for (int x = 0; x < m; ++x)
            for (int y = 0; y < m; ++y)
                for (int z = 0; z < m; ++z) {
                    cplx acc = 0.0;
                    for (int a = 0; a < w; ++a) acc += s2[(a * m + y) * m + z] * ex[a * m + x];
                    out[(static_cast<std::size_t>(x) * m + y) * m + z] = acc.real();
                }
    };

    std::array<std::vector<double>, 3> base;
    for (int c = 0; c < 3; ++c) {
        base[c].resize(npts);
        synthesise(coeff, c, base[c]);
    }

    std::vector<double> result(npts, 0.0);
    std::vector<cplx> shifted(coeff.size());
    std::array<std::vector<double>, 3> moved;
    for (auto& v : moved) v.resize(npts);
    for (const auto& node : nodes) {
        const Point& y = node.y;
        const auto& grad = node.weighted_gradient;
        for (int c = 0; c < 3; ++c)
            for (int a = -kc; a <= kc; ++a)
                for (int b = -kc; b <= kc; ++b)
                    for (int d = -kc; d <= kc; ++d) {
                        const std::size_t idx = ((c * w + a + kc) * w + b + kc) * w + d + kc;
                        shifted[idx] = coeff[idx] * std::polar(1.0, two_pi * (a * y[0] + b * y[1] + d * y[2]));
                    }
        for (int c = 0; c < 3; ++c) synthesise(shifted, c, moved[c]);
        for (std::size_t p = 0; p < npts; ++p) {
            const double d0 = moved[0][p] - base[0][p];
            const double d1 = moved[1][p] - base[1][p];
            const double d2 = moved[2][p] - base[2][p];
            const double mag2 = d0 * d0 + d1 * d1 + d2 * d2;
            result[p] += 0.25 * (grad[0] * d0 + grad[1] * d1 + grad[2] * d2) * mag2;
        }
    }
    return result;
}

}  // namespace

std::vector<double> dr_by_displacement_quadrature(const SpectralField& u, double ell, int q) {
    std::vector<Displacement> nodes;
    const double h = 2.0 * ell / q;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            for (int k = 0; k < q; ++k) {
                const Point y = {-ell + i * h, -ell + j * h, -ell + k * h};
                auto grad = bump_gradient(ell, y);
                if (grad[0] == 0.0 && grad[1] == 0.0 && grad[2] == 0.0) continue;
                for (auto& g : grad) g *= h * h * h;
                nodes.push_back({y, grad});
            }
    return dr_from_nodes(u, nodes);
}

std::vector<double> dr_by_spherical_quadrature(const SpectralField& u, double ell, int q) {
    // Gauss-Legendre in r on [0, l] and in cos(theta), trapezoid in the azimuth
    const auto zeros = boost::math::legendre_p_zeros<double>(q);
    std::vector<double> x, w;
    for (double z : zeros)
        for (double s : {-1.0, 1.0}) {
            if (z == 0.0 && s > 0.0) continue;
            const double d = boost::math::legendre_p_prime(q, z);
            x.push_back(s * z);
            w.push_back(2.0 / ((1.0 - z * z) * d * d));
        }
    std::vector<Displacement> nodes;
    for (std::size_t a = 0; a < x.size(); ++a) {
        const double r = 0.5 * ell * (x[a] + 1.0);
        const double wr = 0.5 * ell * w[a] * r * r;
        for (std::size_t b = 0; b < x.size(); ++b) {
            const double ct = x[b], st = std::sqrt(1.0 - ct * ct);
            for (int c = 0; c < q; ++c) {
                const double az = two_pi * c / q;
                const Point y = {r * st * std::cos(az), r * st * std::sin(az), r * ct};
                auto grad = bump_gradient(ell, y);
                for (auto& g : grad) g *= wr * w[b] * two_pi / q;
                nodes.push_back({y, grad});
            }
        }
    }
    return dr_from_nodes(u, nodes);
}

double derivative_fd(const std::function<double(double)>& f, double x, double h) {
    static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += c[i] * (f(x + (i + 1) * h) - f(x - (i + 1) * h));
    return s / h;
}

double second_derivative_fd(const std::function<double(double)>& f, double x, double h) {
    static constexpr double c[4] = {8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
    double s = -205.0 / 72.0 * f(x);
    for (int i = 0; i < 4; ++i) s += c[i] * (f(x + (i + 1) * h) + f(x - (i + 1) * h));
    return s / (h * h);
}

}  // namespace lsns::oracle
