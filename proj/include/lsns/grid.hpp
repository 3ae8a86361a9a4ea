#pragma once

#include <array>
#include <cstddef>
#include <cstdlib>

namespace lsns {

using Wavevector = std::array<int, 3>;

/// Uniform M^3 sampling of the unit torus together with the retained-mode cutoff.
///
/// Modes are stored in FFT order along each axis: index i maps to wavenumber
/// i for i < M/2 and i - M otherwise, so wavenumbers lie in [-M/2, M/2).
class Grid {
public:
    Grid() = default;

    /// Throws ConfigError unless M is a positive even integer and 0 <= cutoff <= M/2.
    /// A negative cutoff selects the 2/3 rule floor(M/3).
    explicit Grid(int modes_per_axis, int dealias_cutoff = -1);

    int modes_per_axis() const noexcept { return m_; }
    int dealias_cutoff() const noexcept { return cutoff_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(m_) * m_ * m_; }

    int wavenumber(int index) const noexcept { return index < m_ / 2 ? index : index - m_; }
    int index_of(int wavenumber) const noexcept { return wavenumber >= 0 ? wavenumber : wavenumber + m_; }

    std::size_t flat(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(i) * m_ + j) * m_ + k;
    }
    std::size_t flat_mode(const Wavevector& n) const noexcept {
        return flat(index_of(n[0]), index_of(n[1]), index_of(n[2]));
    }
    Wavevector mode(std::size_t flat_index) const noexcept {
        const int k = static_cast<int>(flat_index % m_);
        const int j = static_cast<int>((flat_index / m_) % m_);
        const int i = static_cast<int>(flat_index / (static_cast<std::size_t>(m_) * m_));
        return {wavenumber(i), wavenumber(j), wavenumber(k)};
    }

    /// Wavenumber used by spectral derivatives: the Nyquist component maps to 0
    /// so that derivatives of real fields stay real.
    int derivative_wavenumber(int index) const noexcept {
        const int n = wavenumber(index);
        return n == -m_ / 2 ? 0 : n;
    }

    bool retained(const Wavevector& n) const noexcept {
        return std::abs(n[0]) <= cutoff_ && std::abs(n[1]) <= cutoff_ && std::abs(n[2]) <= cutoff_;
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.m_ == b.m_ && a.cutoff_ == b.cutoff_;
    }

private:
    int m_ = 0;
    int cutoff_ = 0;
};

/// Smallest even size P >= lower whose only prime factors are 2, 3 and 5.
int fft_friendly_size(int lower);

}  // namespace lsns
