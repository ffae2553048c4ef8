#pragma once

#include <cstddef>
#include <string>

#include "gmmse/config.hpp"

namespace gmmse {

// Command bodies behind the CLI. All of them throw DataError for bad inputs
// and InvariantError for contract violations; the CLI maps those to exit
// codes 2 and 3.

// Generate the synthetic training/evaluation corpus tree under the config's
// corpus directories.
void cmd_synth(const ExperimentConfig& cfg);

// Fit a PSD mixture model ("speech" or "noise") to every WAV under
// corpus_dir and write the model plus a <out_model>.log training report.
void cmd_train(const ExperimentConfig& cfg, const std::string& kind,
               const std::string& corpus_dir, const std::string& out_model);

// Mix clean + scaled noise at the target SNR; writes out_path and a
// "<out>_noise.wav" scaled-noise reference next to it.
void cmd_mix(const ExperimentConfig& cfg, const std::string& clean_path,
             const std::string& noise_path, const std::string& out_path, double snr_db,
             size_t noise_offset);

struct EnhanceCmdOptions {
    bool emit_stages = false;
    bool faithful_restft = false;
    std::string dump_dir;  // when set, per-stage gain/PSD matrices land here as CSV
};

void cmd_enhance(const ExperimentConfig& cfg, const std::string& mixture_path,
                 const std::string& speech_model_path, const std::string& noise_model_path,
                 const std::string& out_path, const EnhanceCmdOptions& opts);

// Print metrics for a clean/processed pair; append a CSV row when csv_path
// is non-empty.
void cmd_evaluate(const ExperimentConfig& cfg, const std::string& clean_path,
                  const std::string& processed_path, const std::string& csv_path,
                  const std::string& label);

// Mix/enhance/evaluate over every noise type and sweep SNR; rows stream into
// csv_path as they finish.
void cmd_sweep(const ExperimentConfig& cfg, const std::string& csv_path, bool faithful_restft);

// Export a dB-scaled magnitude spectrogram with axis headers.
void cmd_spectrogram(const ExperimentConfig& cfg, const std::string& wav_path,
                     const std::string& csv_path);

}  // namespace gmmse
