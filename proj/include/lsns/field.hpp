#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "lsns/grid.hpp"

namespace lsns {

using cplx = std::complex<double>;

/// Fourier coefficients of a real C-component field on the unit torus,
/// u(x) = sum_n u_n exp(2 pi i n.x). Storage is component-major, each component
/// a full M^3 array in FFT mode order.
template <int C>
class ModalField {
public:
    static constexpr int components = C;

    ModalField() = default;
    explicit ModalField(const Grid& grid) : grid_(grid), data_(C * grid.size()) {}

    const Grid& grid() const noexcept { return grid_; }

    std::span<cplx> component(int c) noexcept { return {data_.data() + c * grid_.size(), grid_.size()}; }
    std::span<const cplx> component(int c) const noexcept {
        return {data_.data() + c * grid_.size(), grid_.size()};
    }
    cplx& at(int c, std::size_t flat) noexcept { return data_[c * grid_.size() + flat]; }
    const cplx& at(int c, std::size_t flat) const noexcept { return data_[c * grid_.size() + flat]; }

    std::vector<cplx>& raw() noexcept { return data_; }
    const std::vector<cplx>& raw() const noexcept { return data_; }

    ModalField& operator+=(const ModalField& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    ModalField& operator-=(const ModalField& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    ModalField& operator*=(double s) {
        for (auto& v : data_) v *= s;
        return *this;
    }
    /// this += s * o
    ModalField& add_scaled(const ModalField& o, double s) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
        return *this;
    }

    friend ModalField operator+(ModalField a, const ModalField& b) { return a += b; }
    friend ModalField operator-(ModalField a, const ModalField& b) { return a -= b; }
    friend ModalField operator*(double s, ModalField a) { return a *= s; }

    /// Mean of |u|^2 over the torus (Parseval).
    double l2_norm_squared() const noexcept {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return s;
    }
    double max_abs() const noexcept {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    /// max_n |u_{-n} - conj(u_n)| / max_n |u_n|; 0 for a real field.
    double conjugate_asymmetry() const noexcept {
        const double scale = max_abs();
        if (scale == 0.0) return 0.0;
        const int m = grid_.modes_per_axis();
        double worst = 0.0;
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int k = 0; k < m; ++k) {
                        const auto a = at(c, grid_.flat(i, j, k));
                        const auto b = at(c, grid_.flat((m - i) % m, (m - j) % m, (m - k) % m));
                        worst = std::max(worst, std::abs(b - std::conj(a)));
                    }
        return worst / scale;
    }

    friend bool operator==(const ModalField& a, const ModalField& b) {
        return a.grid_ == b.grid_ && a.data_ == b.data_;
    }

private:
    Grid grid_;
    std::vector<cplx> data_;
};

using SpectralField = ModalField<3>;
using ScalarField = ModalField<1>;

/// Real samples on an n^3 physical grid, x_ijk = (i, j, k) / n, component-major.
template <int C>
struct GridSamples {
    int n = 0;
    std::array<std::vector<double>, C> values;

    GridSamples() = default;
    explicit GridSamples(int points_per_axis) : n(points_per_axis) {
        for (auto& v : values) v.assign(static_cast<std::size_t>(n) * n * n, 0.0);
    }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n) * n * n; }
    std::size_t flat(int i, int j, int k) const noexcept { return (static_cast<std::size_t>(i) * n + j) * n + k; }
};

using PhysicalVector = GridSamples<3>;
using PhysicalScalar = GridSamples<1>;

}  // namespace lsns
