#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "gmmse/audio.hpp"
#include "gmmse/core.hpp"

namespace gmmse {

// Objective scores for one clean/processed signal pair.
struct StageMetrics {
    double stoi = 0.0;
    double seg_snr_db = 0.0;
    double global_snr_db = 0.0;
};

struct EvalReport {
    double stoi = 0.0;
    double seg_snr_db = 0.0;
    double global_snr_db = 0.0;
    std::map<int, StageMetrics> per_stage;  // keyed by 1-based stage index
};

struct MixResult {
    AudioSignal mixture;
    AudioSignal scaled_noise;
    double noise_gain = 0.0;       // factor applied to the noise crop
    double achieved_snr_db = 0.0;  // recomputed from the returned signals
};

// Scale a noise crop so that 10*log10(P_clean / P_noise) hits snr_db, using
// full-signal average powers, and return clean + scaled noise. The crop
// starts at noise_offset samples into the noise signal.
MixResult mix_at_snr(const AudioSignal& clean, const AudioSignal& noise, double snr_db,
                     size_t noise_offset = 0);

// Mean over 20 ms non-overlapping frames of 10*log10(sum c^2 / sum (c-e)^2),
// each frame clamped to [-10, 35] dB; frames where the clean energy is below
// 1e-10 are excluded.
double segmental_snr(const AudioSignal& clean, const AudioSignal& estimate);

// 10*log10(sum c^2 / sum (c-e)^2) over the whole signal, capped at 99 dB.
double global_snr(const AudioSignal& clean, const AudioSignal& estimate);

// Short-time objective intelligibility: one-third-octave band temporal
// envelopes at 10 kHz, correlated over 384 ms segments after per-segment
// normalization and SDR clipping. Returns the mean correlation.
double compute_stoi(const AudioSignal& clean, const AudioSignal& estimate);

EvalReport evaluate_signals(const AudioSignal& clean, const AudioSignal& estimate);

// Flat CSV serialization; per-stage columns appear when entries exist.
std::string eval_csv_header(const EvalReport& r);
std::string eval_csv_row(const EvalReport& r);
// Human-readable block for terminal output.
std::string eval_text(const EvalReport& r);

}  // namespace gmmse
