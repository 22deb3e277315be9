#pragma once

#include "oscamp/common.hpp"

#include <vector>

namespace oscamp {

// Unnormalized forward transform (e^{-2 pi i jk/n}); the inverse divides by n.
void fft(CVec& data);
void ifft(CVec& data);
CVec fft_of(const CVec& data);
CVec ifft_of(const CVec& data);

// Wavenumbers 2 pi k / L in FFT order, Nyquist set to 0 for odd derivatives.
Vec wavenumbers(int n, double L, bool zero_nyquist = true);

// Periodic samples f(x_j) -> f(x_j + shift).
CVec spectral_shift(const CVec& f, double shift, double L);
// Periodic samples -> d^order f / dx^order.
CVec spectral_derivative(const CVec& f, double L, int order = 1);
// Trigonometric interpolant of the samples evaluated at arbitrary points.
CVec spectral_resample(const CVec& f, double L, const Vec& x);
// Same on the uniform grid of n_out >= f.size() points over the same period (zero padding).
CVec spectral_upsample(const CVec& f, int n_out);

}  // namespace oscamp
