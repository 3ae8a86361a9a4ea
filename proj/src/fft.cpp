#include "lsns/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace lsns::fft {
namespace {

struct PlanPair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

// The FFTW planner is not thread-safe; execution with new-array calls is.
// FFTW_ESTIMATE keeps the chosen algorithm, and so every bit of output, reproducible.
std::mutex planner_mutex;

const PlanPair& plans_for(int n) {
    static std::map<int, PlanPair> cache;
    std::lock_guard lock(planner_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const std::size_t real_size = static_cast<std::size_t>(n) * n * n;
    const std::size_t half_size = static_cast<std::size_t>(n) * n * (n / 2 + 1);
    double* r = fftw_alloc_real(real_size);
    fftw_complex* c = fftw_alloc_complex(half_size);
    PlanPair p;
    p.r2c = fftw_plan_dft_r2c_3d(n, n, n, r, c, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.c2r = fftw_plan_dft_c2r_3d(n, n, n, c, r, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(r);
    fftw_free(c);
    return cache.emplace(n, p).first->second;
}

struct Workspace {
    std::vector<double> real;
    std::vector<cplx> half;
    void reserve(int n) {
        const std::size_t real_size = static_cast<std::size_t>(n) * n * n;
        const std::size_t half_size = static_cast<std::size_t>(n) * n * (n / 2 + 1);
        if (real.size() < real_size) real.resize(real_size);
        if (half.size() < half_size) half.resize(half_size);
    }
};

Workspace& workspace(int n) {
    thread_local Workspace ws;
    ws.reserve(n);
    return ws;
}

}  // namespace

void forward(int n, std::span<const double> in, std::span<cplx> out) {
    const auto& p = plans_for(n);
    auto& ws = workspace(n);
    const int h = n / 2 + 1;
    std::copy(in.begin(), in.end(), ws.real.begin());
    fftw_execute_dft_r2c(p.r2c, ws.real.data(), reinterpret_cast<fftw_complex*>(ws.half.data()));
    const double scale = 1.0 / (static_cast<double>(n) * n * n);
    for (int i = 0; i < n; ++i) {
        const int mi = (n - i) % n;
        for (int j = 0; j < n; ++j) {
            const int mj = (n - j) % n;
            const std::size_t row = (static_cast<std::size_t>(i) * n + j) * n;
            const std::size_t hrow = (static_cast<std::size_t>(i) * n + j) * h;
            for (int k = 0; k < h; ++k) out[row + k] = ws.half[hrow + k] * scale;
            const std::size_t mrow = (static_cast<std::size_t>(mi) * n + mj) * h;
            for (int k = h; k < n; ++k) out[row + k] = std::conj(ws.half[mrow + (n - k)]) * scale;
        }
    }
}

void inverse(int n, std::span<const cplx> in, std::span<double> out) {
    const auto& p = plans_for(n);
    auto& ws = workspace(n);
    const int h = n / 2 + 1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t row = (static_cast<std::size_t>(i) * n + j) * n;
            const std::size_t hrow = (static_cast<std::size_t>(i) * n + j) * h;
            for (int k = 0; k < h; ++k) ws.half[hrow + k] = in[row + k];
        }
    fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(ws.half.data()), ws.real.data());
    std::copy(ws.real.begin(), ws.real.begin() + static_cast<std::ptrdiff_t>(out.size()), out.begin());
}

}  // namespace lsns::fft
