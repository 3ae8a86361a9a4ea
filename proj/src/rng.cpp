#include "lsns/rng.hpp"

#include <cmath>
#include <numbers>

namespace lsns {
namespace {

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// Uniform in (0, 1) from 64 bits, never 0 so the logarithm stays finite.
inline double open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += philox_w0;
            k[1] += philox_w1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(philox_m0, c[0], hi0, lo0);
        mulhilo(philox_m1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

double counter_normal(std::uint64_t seed, std::uint32_t stream, std::uint32_t k, std::uint64_t step) {
    const auto w = philox4x32({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), k, stream},
                              {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    const double u1 = open_unit(w[0], w[1]);
    const double u2 = open_unit(w[2], w[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BrownianIncrements::BrownianIncrements(std::uint64_t seed, std::uint32_t path_id, double dt)
    : seed_(seed), path_id_(path_id), dt_(dt), sqrt_dt_(std::sqrt(dt)) {}

double BrownianIncrements::operator()(int k, std::int64_t step) const {
    return sqrt_dt_ * counter_normal(seed_, path_id_, static_cast<std::uint32_t>(k), static_cast<std::uint64_t>(step));
}

}  // namespace lsns
