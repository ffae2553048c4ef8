#pragma once

#include <string>
#include <vector>

#include "gmmse/core.hpp"

namespace gmmse {

// Time-domain signal, amplitudes nominally in [-1, 1].
struct AudioSignal {
    std::vector<double> samples;
    int sample_rate = 0;

    size_t length() const { return samples.size(); }
    double duration_s() const { return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0; }
};

void validate(const AudioSignal& x);

// Reads a RIFF WAV file. Supported codecs: PCM 16-bit and IEEE float 32-bit
// (plain or WAVE_FORMAT_EXTENSIBLE). Integer samples are scaled by 2^15.
// Multi-channel input is averaged to mono when downmix is set, rejected
// otherwise.
AudioSignal load_wav(const std::string& path, bool downmix = true);

// Writes mono 16-bit PCM with saturating conversion.
void save_wav(const std::string& path, const AudioSignal& x);

// Band-limited sample rate conversion with a Kaiser-windowed sinc filter,
// 64 taps per output sample. Output length = round(len * target / source).
AudioSignal resample(const AudioSignal& x, int target_rate);

}  // namespace gmmse
