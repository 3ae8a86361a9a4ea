#include "lsns/mollifier.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "lsns/errors.hpp"

namespace lsns {
namespace {

using boost::math::quadrature::gauss_kronrod;

double bump_profile(double r) {
    if (r >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r * r));
}

double radial_integral(double xi) {
    // 4 pi int_0^1 psi(r) r^2 sin(2 pi xi r) / (2 pi xi r) dr
    const double k = 2.0 * std::numbers::pi * xi;
    auto integrand = [k](double r) {
        const double kr = k * r;
        const double sinc = std::abs(kr) < 1e-8 ? 1.0 - kr * kr / 6.0 : std::sin(kr) / kr;
        return bump_profile(r) * r * r * sinc;
    };
    double error = 0.0;
    const double v = gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-13, &error);
    return 4.0 * std::numbers::pi * v;
}

std::shared_ptr<const std::vector<double>> build_multipliers(double eps, MollifierKind kind, const Grid& grid) {
    auto out = std::make_shared<std::vector<double>>(grid.size(), 1.0);
    if (eps == 0.0) return out;
    std::map<int, double> by_norm2;
    for (std::size_t f = 0; f < grid.size(); ++f) {
        const auto n = grid.mode(f);
        const int n2 = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
        auto it = by_norm2.find(n2);
        if (it == by_norm2.end())
            it = by_norm2.emplace(n2, Mollifier::profile_transform(kind, eps * std::sqrt(double(n2)))).first;
        (*out)[f] = it->second;
    }
    return out;
}

}  // namespace

MollifierKind parse_mollifier_kind(const std::string& name) {
    if (name == "paper_bump") return MollifierKind::paper_bump;
    if (name == "gaussian") return MollifierKind::gaussian;
    throw ConfigError("unknown mollifier kind '" + name + "'");
}

std::string to_string(MollifierKind kind) {
    return kind == MollifierKind::paper_bump ? "paper_bump" : "gaussian";
}

double bump_normalisation() {
    static const double c = 1.0 / radial_integral(0.0);
    return c;
}

double Mollifier::profile_transform(MollifierKind kind, double xi) {
    if (kind == MollifierKind::gaussian) {
        const double sigma = 1.0 / 3.0;
        return std::exp(-2.0 * std::numbers::pi * std::numbers::pi * sigma * sigma * xi * xi);
    }
    if (xi == 0.0) return 1.0;
    return radial_integral(xi) * bump_normalisation();
}

Mollifier::Mollifier(double epsilon, MollifierKind kind, const Grid& grid)
    : epsilon_(epsilon), kind_(kind), grid_(grid) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("mollifier epsilon must be >= 0");
    static std::mutex mutex;
    static std::map<std::tuple<double, int, int, int>, std::shared_ptr<const std::vector<double>>> cache;
    const auto key = std::make_tuple(epsilon, grid.modes_per_axis(), grid.dealias_cutoff(), static_cast<int>(kind));
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_multipliers(epsilon, kind, grid)).first;
    multipliers_ = it->second;
}

double bump_value(double epsilon, const std::array<double, 3>& y) {
    const double r2 = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (epsilon * epsilon);
    if (r2 >= 1.0) return 0.0;
    return bump_normalisation() * std::exp(-1.0 / (1.0 - r2)) / (epsilon * epsilon * epsilon);
}

std::array<double, 3> bump_gradient(double epsilon, const std::array<double, 3>& y) {
    const double r2 = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (epsilon * epsilon);
    if (r2 >= 1.0) return {0.0, 0.0, 0.0};
    const double one_minus = 1.0 - r2;
    // d/dy exp(-1/(1-r^2)) = exp(...) * (-2 y / eps^2) / (1-r^2)^2
    const double f = bump_value(epsilon, y) * (-2.0 / (epsilon * epsilon)) / (one_minus * one_minus);
    return {f * y[0], f * y[1], f * y[2]};
}

}  // namespace lsns
