#pragma once

#include <array>
#include <cstdint>

namespace lsns {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011). Stateless: the
/// output is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Standard normal draw keyed on (seed, stream, k, step) via Box-Muller on one Philox block.
double counter_normal(std::uint64_t seed, std::uint32_t stream, std::uint32_t k, std::uint64_t step);

/// Brownian increments dB_k^j ~ N(0, dt) for one sample path. Regenerating with the
/// same key gives identical draws; no state is carried between calls.
class BrownianIncrements {
public:
    BrownianIncrements() = default;
    BrownianIncrements(std::uint64_t seed, std::uint32_t path_id, double dt);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint32_t path_id() const noexcept { return path_id_; }
    double dt() const noexcept { return dt_; }

    /// Increment of B^k over [t_step, t_step + dt], k >= 1.
    double operator()(int k, std::int64_t step) const;

private:
    std::uint64_t seed_ = 0;
    std::uint32_t path_id_ = 0;
    double dt_ = 0.0;
    double sqrt_dt_ = 0.0;
};

}  // namespace lsns
