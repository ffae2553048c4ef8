#include "gmmse/fft.hpp"

#include <stdexcept>
#include <utility>

#include "gmmse/core.hpp"

namespace gmmse {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::complex<double>* data, int n, bool inverse) {
    if (!is_power_of_two(n)) throw std::invalid_argument("fft_radix2: n must be a power of two");

    // bit-reversal permutation
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (int len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / len * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                std::complex<double> u = data[i + k];
                std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / n;
        for (int i = 0; i < n; ++i) data[i] *= scale;
    }
}

std::vector<std::complex<double>> rfft(const double* x, int len, int fft_size) {
    if (len > fft_size) throw std::invalid_argument("rfft: signal longer than fft_size");
    std::vector<std::complex<double>> buf(fft_size, {0.0, 0.0});
    for (int i = 0; i < len; ++i) buf[i] = x[i];
    fft_radix2(buf.data(), fft_size, false);
    buf.resize(fft_size / 2 + 1);
    return buf;
}

std::vector<double> irfft(const std::complex<double>* bins, int fft_size) {
    const int half = fft_size / 2;
    std::vector<std::complex<double>> buf(fft_size);
    buf[0] = std::complex<double>(bins[0].real(), 0.0);
    buf[half] = std::complex<double>(bins[half].real(), 0.0);
    for (int k = 1; k < half; ++k) {
        buf[k] = bins[k];
        buf[fft_size - k] = std::conj(bins[k]);
    }
    fft_radix2(buf.data(), fft_size, true);
    std::vector<double> out(fft_size);
    for (int i = 0; i < fft_size; ++i) out[i] = buf[i].real();
    return out;
}

}  // namespace gmmse
