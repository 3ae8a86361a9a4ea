#pragma once

#include <span>

#include "lsns/field.hpp"

namespace lsns::fft {

/// out_n = n^-3 sum_x in(x) exp(-2 pi i n.x) over the full n^3 mode array (FFT order).
void forward(int n, std::span<const double> in, std::span<cplx> out);

/// out(x) = sum_n in_n exp(2 pi i n.x). Only the Hermitian half of `in` is read.
void inverse(int n, std::span<const cplx> in, std::span<double> out);

}  // namespace lsns::fft
