#pragma once

#include <vector>

#include "gmmse/audio.hpp"
#include "gmmse/core.hpp"

namespace gmmse {

// Analysis parameters. The window is a periodic Hann; hop must be exactly
// half the window so weighted overlap-add reconstructs the interior.
struct StftConfig {
    int window_length = 160;  // 20 ms at 8 kHz
    int fft_size = 512;
    int hop = 80;

    int num_bins() const { return fft_size / 2 + 1; }
};

void validate(const StftConfig& cfg);

StftConfig make_stft_config(int sample_rate, double window_ms = 20.0, int fft_size = 512);

// One-sided complex STFT, bins x frames.
struct SpectralFrames {
    CplxMat data;  // F x T
    StftConfig config;
    int sample_rate = 0;
    size_t original_length = 0;

    int num_bins() const { return data.rows; }
    int num_frames() const { return data.cols; }
};

// Nonnegative per-frame power spectra, bins x frames.
struct PsdSequence {
    RealMat data;  // F x T

    int num_bins() const { return data.rows; }
    int num_frames() const { return data.cols; }
};

// w[n] = 0.5 - 0.5 cos(2 pi n / N), the DFT-even variant
std::vector<double> hann_periodic(int length);

int stft_frame_count(size_t signal_length, const StftConfig& cfg);

SpectralFrames stft(const AudioSignal& x, const StftConfig& cfg);
SpectralFrames stft_serial(const AudioSignal& x, const StftConfig& cfg);

// Weighted overlap-add inverse, normalized by the accumulated squared
// analysis window; output truncated to original_length.
AudioSignal istft(const SpectralFrames& S);
AudioSignal istft_serial(const SpectralFrames& S);

// Instantaneous per-frame power |.|^2, optionally smoothed across time with
// factor lambda (0 disables smoothing).
PsdSequence periodogram(const SpectralFrames& S, double lambda = 0.0);

}  // namespace gmmse
