#pragma once

#include <cstdint>

#include "gmmse/audio.hpp"

namespace gmmse {

// Deterministic signal generators so training, enhancement, and evaluation
// all run offline. Outputs are peak-normalized (default 0.2) to leave
// headroom for low-SNR mixing without 16-bit clipping.

AudioSignal synth_tone(double freq_hz, double duration_s, int sample_rate,
                       double amplitude = 0.2);

AudioSignal synth_white_noise(double duration_s, int sample_rate, uint32_t seed,
                              double amplitude = 0.2);

// Voiced syllables (glided pitch, formant-shaped harmonics) interleaved with
// fricative-like resonant noise bursts and short pauses.
AudioSignal synth_speech_like(double duration_s, int sample_rate, uint32_t seed,
                              double amplitude = 0.2);

// Sum of 8 harmonics of 55 Hz, each with slow amplitude modulation.
AudioSignal synth_engine_noise(double duration_s, int sample_rate, uint32_t seed,
                               double amplitude = 0.2);

// Sum of 6 independently filtered and modulated noise bands.
AudioSignal synth_babble_noise(double duration_s, int sample_rate, uint32_t seed,
                               double amplitude = 0.2);

}  // namespace gmmse
