#pragma once

#include <complex>
#include <vector>

namespace gmmse {

// In-place iterative radix-2 FFT. n must be a power of two.
// inverse=true applies the conjugate transform and scales by 1/n.
void fft_radix2(std::complex<double>* data, int n, bool inverse);

// Forward transform of a real signal zero-padded to fft_size.
// Returns the one-sided spectrum (fft_size/2 + 1 bins).
std::vector<std::complex<double>> rfft(const double* x, int len, int fft_size);

// Inverse of rfft: expands the one-sided spectrum by Hermitian symmetry and
// returns fft_size real samples.
std::vector<double> irfft(const std::complex<double>* bins, int fft_size);

bool is_power_of_two(int n);

}  // namespace gmmse
