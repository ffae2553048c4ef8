#include "gmmse/config.hpp"

#include <fstream>

#include <json.hpp>

#include "gmmse/gmm.hpp"

namespace gmmse {

void validate(const ExperimentConfig& cfg) {
    if (cfg.sample_rate < 1000) throw InvariantError("config: sample_rate too low");
    if (cfg.speech_components < 1 || cfg.noise_components < 1)
        throw InvariantError("config: component counts must be >= 1");
    if (cfg.num_stages > cfg.noise_components)
        throw InvariantError("config: more stages than noise components");
    if (cfg.snr_sweep.empty()) throw InvariantError("config: empty SNR sweep");
    if (cfg.train_files < 1 || cfg.eval_utterances < 1)
        throw InvariantError("config: corpus sizes must be >= 1");
    if (cfg.train_seconds <= 0.0 || cfg.eval_seconds <= 0.0)
        throw InvariantError("config: corpus durations must be positive");
    normalization_from_string(cfg.normalization);  // throws on unknown value
    validate(stft_config(cfg));
    validate(enhancer_config(cfg));
}

StftConfig stft_config(const ExperimentConfig& cfg) {
    return make_stft_config(cfg.sample_rate, cfg.window_ms, cfg.fft_size);
}

EnhancerConfig enhancer_config(const ExperimentConfig& cfg) {
    EnhancerConfig e;
    e.beta = cfg.beta;
    e.gamma = cfg.gamma;
    e.num_stages = cfg.num_stages;
    e.stage_energy_fraction = cfg.stage_energy_fraction;
    e.gain_floor = cfg.gain_floor;
    e.smoothing = cfg.smoothing;
    return e;
}

namespace {

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["sample_rate"] = c.sample_rate;
    j["window_ms"] = c.window_ms;
    j["fft_size"] = c.fft_size;
    j["speech_components"] = c.speech_components;
    j["noise_components"] = c.noise_components;
    j["normalization"] = c.normalization;
    j["beta"] = c.beta;
    j["gamma"] = c.gamma;
    j["num_stages"] = c.num_stages;
    j["stage_energy_fraction"] = c.stage_energy_fraction;
    j["gain_floor"] = c.gain_floor;
    j["smoothing"] = c.smoothing;
    j["snr_sweep"] = c.snr_sweep;
    j["seed"] = c.seed;
    j["train_files"] = c.train_files;
    j["train_seconds"] = c.train_seconds;
    j["eval_utterances"] = c.eval_utterances;
    j["eval_seconds"] = c.eval_seconds;
    j["speech_dir"] = c.speech_dir;
    j["noise_dir"] = c.noise_dir;
    j["eval_dir"] = c.eval_dir;
    j["model_dir"] = c.model_dir;
    return j;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    read_field(j, "sample_rate", c.sample_rate);
    read_field(j, "window_ms", c.window_ms);
    read_field(j, "fft_size", c.fft_size);
    read_field(j, "speech_components", c.speech_components);
    read_field(j, "noise_components", c.noise_components);
    read_field(j, "normalization", c.normalization);
    read_field(j, "beta", c.beta);
    read_field(j, "gamma", c.gamma);
    read_field(j, "num_stages", c.num_stages);
    read_field(j, "stage_energy_fraction", c.stage_energy_fraction);
    read_field(j, "gain_floor", c.gain_floor);
    read_field(j, "smoothing", c.smoothing);
    read_field(j, "snr_sweep", c.snr_sweep);
    read_field(j, "seed", c.seed);
    read_field(j, "train_files", c.train_files);
    read_field(j, "train_seconds", c.train_seconds);
    read_field(j, "eval_utterances", c.eval_utterances);
    read_field(j, "eval_seconds", c.eval_seconds);
    read_field(j, "speech_dir", c.speech_dir);
    read_field(j, "noise_dir", c.noise_dir);
    read_field(j, "eval_dir", c.eval_dir);
    read_field(j, "model_dir", c.model_dir);
    return c;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed config file " + path + ": " + e.what());
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad field in config file " + path + ": " + e.what());
    }
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write config file: " + path);
    f << to_json(cfg).dump(2) << "\n";
}

std::string config_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(); }

}  // namespace gmmse
