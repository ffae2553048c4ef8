#pragma once

#include <string>
#include <vector>

#include "gmmse/enhancer.hpp"
#include "gmmse/stft.hpp"

namespace gmmse {

// Experiment-wide settings. Defaults are the reference operating point:
// 8 kHz audio, 20 ms / 512-pt STFT, 6 speech and 9 noise components,
// beta = 2, gamma = 1, two stages, SNR sweep {-10..10} dB.
struct ExperimentConfig {
    int sample_rate = 8000;
    double window_ms = 20.0;
    int fft_size = 512;

    int speech_components = 6;
    int noise_components = 9;
    std::string normalization = "per-frame";  // or "global"

    double beta = 2.0;
    double gamma = 1.0;
    int num_stages = 2;
    double stage_energy_fraction = 0.5;
    double gain_floor = 0.0;
    double smoothing = 0.0;

    std::vector<double> snr_sweep = {-10.0, -5.0, 0.0, 5.0, 10.0};
    unsigned seed = 12345;

    // synthetic corpus layout
    int train_files = 12;         // generated files per corpus kind
    double train_seconds = 10.0;  // duration of each training file
    int eval_utterances = 3;     // evaluation-set size
    double eval_seconds = 4.0;
    std::string speech_dir = "corpus/speech";
    std::string noise_dir = "corpus/noise";
    std::string eval_dir = "corpus/eval";
    std::string model_dir = "models";
};

void validate(const ExperimentConfig& cfg);

StftConfig stft_config(const ExperimentConfig& cfg);
EnhancerConfig enhancer_config(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// single-line JSON used to echo the effective settings into logs
std::string config_json(const ExperimentConfig& cfg);

}  // namespace gmmse
