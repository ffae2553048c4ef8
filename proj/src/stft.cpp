#include "gmmse/stft.hpp"

#include <cmath>

#include "gmmse/fft.hpp"

namespace gmmse {

void validate(const StftConfig& cfg) {
    if (cfg.window_length <= 0 || cfg.fft_size <= 0 || cfg.hop <= 0)
        throw std::invalid_argument("StftConfig: sizes must be positive");
    if (cfg.hop * 2 != cfg.window_length)
        throw std::invalid_argument("StftConfig: hop must equal window_length/2");
    if (cfg.fft_size < cfg.window_length)
        throw std::invalid_argument("StftConfig: fft_size must be >= window_length");
    if (!is_power_of_two(cfg.fft_size))
        throw std::invalid_argument("StftConfig: fft_size must be a power of two");
}

StftConfig make_stft_config(int sample_rate, double window_ms, int fft_size) {
    StftConfig cfg;
    cfg.window_length = int(std::lround(sample_rate * window_ms / 1000.0));
    if (cfg.window_length % 2 != 0) ++cfg.window_length;
    cfg.hop = cfg.window_length / 2;
    cfg.fft_size = fft_size;
    validate(cfg);
    return cfg;
}

std::vector<double> hann_periodic(int length) {
    std::vector<double> w(length);
    for (int n = 0; n < length; ++n) w[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / length);
    return w;
}

int stft_frame_count(size_t signal_length, const StftConfig& cfg) {
    if (signal_length < size_t(cfg.window_length))
        throw DataError("stft: signal shorter than one window");
    return int((signal_length - cfg.window_length) / cfg.hop) + 1;
}

namespace {

void stft_one_frame(const AudioSignal& x, const StftConfig& cfg, const std::vector<double>& win,
                    int t, std::complex<double>* out_col) {
    const size_t start = size_t(t) * cfg.hop;
    std::vector<double> frame(cfg.window_length);
    for (int n = 0; n < cfg.window_length; ++n) frame[n] = x.samples[start + n] * win[n];
    auto bins = rfft(frame.data(), cfg.window_length, cfg.fft_size);
    for (int f = 0; f < cfg.num_bins(); ++f) out_col[f] = bins[f];
}

SpectralFrames stft_impl(const AudioSignal& x, const StftConfig& cfg, bool parallel) {
    validate(cfg);
    validate(x);
    const int T = stft_frame_count(x.length(), cfg);
    const auto win = hann_periodic(cfg.window_length);

    SpectralFrames S;
    S.config = cfg;
    S.sample_rate = x.sample_rate;
    S.original_length = x.length();
    S.data = CplxMat(cfg.num_bins(), T);

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < T; ++t) stft_one_frame(x, cfg, win, t, S.data.col(t));
    } else {
        for (int t = 0; t < T; ++t) stft_one_frame(x, cfg, win, t, S.data.col(t));
    }
    return S;
}

AudioSignal istft_impl(const SpectralFrames& S, bool parallel) {
    const StftConfig& cfg = S.config;
    validate(cfg);
    const int T = S.num_frames();
    const int W = cfg.window_length;
    const auto win = hann_periodic(W);

    // per-frame inverse transforms first (parallel part), overlap-add second
    RealMat frames(W, T);
    auto invert_one = [&](int t) {
        auto time = irfft(S.data.col(t), cfg.fft_size);
        double* dst = frames.col(t);
        for (int n = 0; n < W; ++n) dst[n] = time[n];
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < T; ++t) invert_one(t);
    } else {
        for (int t = 0; t < T; ++t) invert_one(t);
    }

    const size_t len = S.original_length;
    std::vector<double> acc(len, 0.0), norm(len, 0.0);
    for (int t = 0; t < T; ++t) {
        const size_t start = size_t(t) * cfg.hop;
        const double* src = frames.col(t);
        for (int n = 0; n < W; ++n) {
            const size_t i = start + n;
            if (i >= len) break;
            acc[i] += src[n] * win[n];
            norm[i] += win[n] * win[n];
        }
    }

    AudioSignal out;
    out.sample_rate = S.sample_rate;
    out.samples.resize(len);
    for (size_t i = 0; i < len; ++i)
        out.samples[i] = norm[i] > 1e-12 ? acc[i] / norm[i] : 0.0;
    return out;
}

}  // namespace

SpectralFrames stft(const AudioSignal& x, const StftConfig& cfg) { return stft_impl(x, cfg, true); }
SpectralFrames stft_serial(const AudioSignal& x, const StftConfig& cfg) { return stft_impl(x, cfg, false); }

AudioSignal istft(const SpectralFrames& S) { return istft_impl(S, true); }
AudioSignal istft_serial(const SpectralFrames& S) { return istft_impl(S, false); }

PsdSequence periodogram(const SpectralFrames& S, double lambda) {
    if (lambda < 0.0 || lambda >= 1.0)
        throw std::invalid_argument("periodogram: lambda must be in [0,1)");
    const int F = S.num_bins(), T = S.num_frames();
    PsdSequence P;
    P.data = RealMat(F, T);
    for (int t = 0; t < T; ++t) {
        const std::complex<double>* src = S.data.col(t);
        double* dst = P.data.col(t);
        for (int f = 0; f < F; ++f) dst[f] = std::norm(src[f]);
        if (lambda > 0.0 && t > 0) {
            const double* prev = P.data.col(t - 1);
            for (int f = 0; f < F; ++f) dst[f] = lambda * prev[f] + (1.0 - lambda) * dst[f];
        }
    }
    return P;
}

}  // namespace gmmse
