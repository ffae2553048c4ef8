#include "gmmse/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "gmmse/enhancer.hpp"
#include "gmmse/gmm.hpp"
#include "gmmse/metrics.hpp"
#include "gmmse/stft.hpp"
#include "gmmse/synth.hpp"

namespace fs = std::filesystem;

namespace gmmse {

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::vector<std::string> list_wavs(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        if (ext == ".wav") paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

std::vector<std::string> list_subdirs(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
    fs::path p(path);
    const std::string ext = p.extension().string();
    fs::path out = p.parent_path() / (p.stem().string() + suffix + ext);
    return out.string();
}

AudioSignal load_at_rate(const std::string& path, int sample_rate) {
    AudioSignal x = load_wav(path);
    if (x.sample_rate != sample_rate) {
        std::fprintf(stderr, "note: resampling %s from %d Hz to %d Hz\n", path.c_str(),
                     x.sample_rate, sample_rate);
        x = resample(x, sample_rate);
    }
    return x;
}

void write_matrix_csv(const std::string& path, const RealMat& m) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            if (c) f << ',';
            f << fmt("%.6e", m(r, c));
        }
        f << '\n';
    }
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

}  // namespace

void cmd_synth(const ExperimentConfig& cfg) {
    validate(cfg);
    const unsigned base = cfg.seed;
    const int fs = cfg.sample_rate;

    auto emit = [](const std::string& dir, const char* prefix, int index,
                   const AudioSignal& x) {
        fs::create_directories(dir);
        char name[64];
        std::snprintf(name, sizeof name, "%s_%02d.wav", prefix, index);
        const std::string path = (fs::path(dir) / name).string();
        save_wav(path, x);
        std::printf("wrote %s (%.2f s)\n", path.c_str(), x.duration_s());
    };

    for (int i = 0; i < cfg.train_files; ++i) {
        emit(cfg.speech_dir, "speech", i,
             synth_speech_like(cfg.train_seconds, fs, base + 100 + i));
        emit(cfg.noise_dir + "/engine", "engine", i,
             synth_engine_noise(cfg.train_seconds, fs, base + 200 + i));
        emit(cfg.noise_dir + "/babble", "babble", i,
             synth_babble_noise(cfg.train_seconds, fs, base + 300 + i));
    }
    // evaluation material uses held-out seeds; noise runs longer than the
    // utterances so mixing can crop from varied offsets
    for (int i = 0; i < cfg.eval_utterances; ++i) {
        emit(cfg.eval_dir + "/clean", "clean", i,
             synth_speech_like(cfg.eval_seconds, fs, base + 400 + i));
        emit(cfg.eval_dir + "/noise/engine", "engine", i,
             synth_engine_noise(cfg.eval_seconds + 2.0, fs, base + 500 + i));
        emit(cfg.eval_dir + "/noise/babble", "babble", i,
             synth_babble_noise(cfg.eval_seconds + 2.0, fs, base + 600 + i));
    }
}

void cmd_train(const ExperimentConfig& cfg, const std::string& kind,
               const std::string& corpus_dir, const std::string& out_model) {
    validate(cfg);
    const ModelKind mk = model_kind_from_string(kind);
    if (mk == ModelKind::Mixture) throw DataError("train: kind must be speech or noise");

    const std::vector<std::string> files = list_wavs(corpus_dir);
    if (files.empty()) throw DataError("train: no WAV files in " + corpus_dir);

    const StftConfig scfg = stft_config(cfg);
    RealMat all_frames;
    std::vector<std::string> used;
    for (const std::string& path : files) {
        try {
            const AudioSignal x = load_at_rate(path, cfg.sample_rate);
            const SpectralFrames S = stft(x, scfg);
            const PsdSequence P = periodogram(S);
            if (all_frames.rows == 0) {
                all_frames = P.data;
            } else {
                RealMat merged(all_frames.rows, all_frames.cols + P.data.cols);
                std::copy(all_frames.data.begin(), all_frames.data.end(), merged.data.begin());
                std::copy(P.data.data.begin(), P.data.data.end(),
                          merged.data.begin() + all_frames.data.size());
                all_frames = std::move(merged);
            }
            used.push_back(path);
        } catch (const DataError& e) {
            std::fprintf(stderr, "warning: skipping %s: %s\n", path.c_str(), e.what());
        }
    }
    if (used.empty()) throw DataError("train: every file in " + corpus_dir + " was unusable");

    int dropped = 0;
    const NormalizationMode norm = normalization_from_string(cfg.normalization);
    PsdSequence frames = normalize_psd_frames(PsdSequence{std::move(all_frames)}, norm, &dropped);

    TrainingOptions opts;
    opts.num_components = mk == ModelKind::Speech ? cfg.speech_components : cfg.noise_components;
    opts.seed = cfg.seed;
    TrainingReport report;
    GmmModel model = fit_gmm(frames, opts, &report);
    model.kind = mk;
    model.normalization = norm;
    model.sample_rate = cfg.sample_rate;
    model.fft_size = scfg.fft_size;
    validate(model);

    if (fs::path(out_model).has_parent_path())
        fs::create_directories(fs::path(out_model).parent_path());
    save_model(model, out_model);

    std::ofstream log(out_model + ".log");
    if (!log) throw DataError("cannot write training log for " + out_model);
    log << "config: " << config_json(cfg) << "\n";
    log << "kind: " << kind << "\n";
    for (const std::string& p : used) log << "file: " << p << "\n";
    log << "frames: " << frames.num_frames() << " (dropped " << dropped << " silent)\n";
    log << "components: " << report.effective_components << "\n";
    log << "iterations: " << report.iterations << "\n";
    log << "converged: " << (report.converged ? "yes" : "no") << "\n";
    log << "final_loglik: " << fmt("%.6f", report.loglik_history.back()) << "\n";
    for (int k = 0; k < model.num_components(); ++k) {
        double e = 0.0;
        for (int f = 0; f < model.dim(); ++f) e += model.means(f, k);
        log << "component " << k << ": weight " << fmt("%.6f", model.weights[k]) << ", energy "
            << fmt("%.6e", model.weights[k] * e) << "\n";
    }

    std::printf("trained %s model on %zu file(s), %d frames; %d iterations%s; wrote %s\n",
                kind.c_str(), used.size(), frames.num_frames(), report.iterations,
                report.converged ? "" : " (iteration cap hit)", out_model.c_str());
}

void cmd_mix(const ExperimentConfig& cfg, const std::string& clean_path,
             const std::string& noise_path, const std::string& out_path, double snr_db,
             size_t noise_offset) {
    const AudioSignal clean = load_at_rate(clean_path, cfg.sample_rate);
    const AudioSignal noise = load_at_rate(noise_path, cfg.sample_rate);
    const MixResult mix = mix_at_snr(clean, noise, snr_db, noise_offset);

    long clipped = 0;
    for (double v : mix.mixture.samples)
        if (v > 1.0 || v < -1.0) ++clipped;
    if (clipped > 0)
        std::fprintf(stderr, "warning: %ld sample(s) exceed full scale and will saturate\n",
                     clipped);

    if (fs::path(out_path).has_parent_path())
        fs::create_directories(fs::path(out_path).parent_path());
    save_wav(out_path, mix.mixture);
    save_wav(with_suffix(out_path, "_noise"), mix.scaled_noise);
    std::printf("config: %s\n", config_json(cfg).c_str());
    std::printf("noise gain %.6f, achieved SNR %.3f dB\n", mix.noise_gain, mix.achieved_snr_db);
}

void cmd_enhance(const ExperimentConfig& cfg, const std::string& mixture_path,
                 const std::string& speech_model_path, const std::string& noise_model_path,
                 const std::string& out_path, const EnhanceCmdOptions& opts) {
    validate(cfg);
    const GmmModel speech_model = load_model(speech_model_path);
    const GmmModel noise_model = load_model(noise_model_path);
    const StftConfig scfg = stft_config(cfg);

    if (speech_model.fft_size != scfg.fft_size || noise_model.fft_size != scfg.fft_size)
        throw InvariantError("enhance: model FFT size does not match config");
    if (speech_model.sample_rate != cfg.sample_rate ||
        noise_model.sample_rate != cfg.sample_rate)
        throw InvariantError("enhance: model sample rate does not match config");
    if (speech_model.kind != ModelKind::Speech)
        std::fprintf(stderr, "warning: %s was not trained as a speech model\n",
                     speech_model_path.c_str());
    if (noise_model.kind != ModelKind::Noise)
        std::fprintf(stderr, "warning: %s was not trained as a noise model\n",
                     noise_model_path.c_str());
    if (speech_model.normalization != noise_model.normalization)
        std::fprintf(stderr, "warning: models use different PSD normalizations\n");

    const AudioSignal mixture = load_at_rate(mixture_path, cfg.sample_rate);
    const SpectralFrames M = stft(mixture, scfg);

    EnhanceOptions eopts;
    eopts.faithful_restft = opts.faithful_restft;
    eopts.collect_diagnostics = !opts.dump_dir.empty();
    const EnhanceResult res = enhance(M, speech_model, noise_model, enhancer_config(cfg), eopts);

    if (fs::path(out_path).has_parent_path())
        fs::create_directories(fs::path(out_path).parent_path());
    save_wav(out_path, istft(res.output));
    if (opts.emit_stages) {
        for (size_t i = 0; i < res.stage_outputs.size(); ++i) {
            const std::string stage_path = with_suffix(out_path, "_stage" + std::to_string(i + 1));
            save_wav(stage_path, istft(res.stage_outputs[i]));
        }
    }
    if (!opts.dump_dir.empty()) {
        fs::create_directories(opts.dump_dir);
        for (size_t i = 0; i < res.diagnostics.size(); ++i) {
            const std::string stem =
                (fs::path(opts.dump_dir) / ("stage" + std::to_string(i + 1))).string();
            write_matrix_csv(stem + "_gain.csv", res.diagnostics[i].gain.values);
            write_matrix_csv(stem + "_speech_psd.csv", res.diagnostics[i].speech_psd);
            write_matrix_csv(stem + "_noise_psd.csv", res.diagnostics[i].noise_psd);
        }
    }

    std::printf("config: %s\n", config_json(cfg).c_str());
    std::printf("enhanced %s -> %s (%d stages", mixture_path.c_str(), out_path.c_str(),
                res.plan.num_stages());
    for (int i = 0; i < res.plan.num_stages(); ++i)
        std::printf("%s stage %d uses %zu component(s)", i ? "," : ";", i + 1,
                    res.plan.partitions[i].size());
    std::printf(")\n");
}

void cmd_evaluate(const ExperimentConfig& cfg, const std::string& clean_path,
                  const std::string& processed_path, const std::string& csv_path,
                  const std::string& label) {
    AudioSignal clean = load_wav(clean_path);
    AudioSignal processed = load_wav(processed_path);
    if (clean.sample_rate != processed.sample_rate)
        throw DataError("evaluate: sample rate mismatch");

    const int hop = make_stft_config(clean.sample_rate, cfg.window_ms, cfg.fft_size).hop;
    const size_t len_c = clean.samples.size(), len_p = processed.samples.size();
    const size_t diff = len_c > len_p ? len_c - len_p : len_p - len_c;
    if (diff > size_t(hop))
        throw DataError("evaluate: length mismatch exceeds one analysis hop");
    const size_t len = std::max(len_c, len_p);
    clean.samples.resize(len, 0.0);
    processed.samples.resize(len, 0.0);

    const EvalReport r = evaluate_signals(clean, processed);
    std::printf("%s", eval_text(r).c_str());

    if (!csv_path.empty()) {
        const bool fresh = !fs::exists(csv_path) || fs::file_size(csv_path) == 0;
        std::ofstream f(csv_path, std::ios::app);
        if (!f) throw DataError("cannot open CSV for append: " + csv_path);
        if (fresh) f << "label,clean,processed," << eval_csv_header(r) << "\n";
        f << csv_escape(label) << ',' << csv_escape(clean_path) << ','
          << csv_escape(processed_path) << ',' << eval_csv_row(r) << "\n";
    }
}

void cmd_sweep(const ExperimentConfig& cfg, const std::string& csv_path, bool faithful_restft) {
    validate(cfg);
    const StftConfig scfg = stft_config(cfg);
    const EnhancerConfig ecfg = enhancer_config(cfg);

    const std::vector<std::string> clean_files = list_wavs(cfg.eval_dir + "/clean");
    if (clean_files.empty()) throw DataError("sweep: no evaluation utterances");
    const std::vector<std::string> noise_types = list_subdirs(cfg.eval_dir + "/noise");
    if (noise_types.empty()) throw DataError("sweep: no evaluation noise types");

    const GmmModel speech_model = load_model(cfg.model_dir + "/speech.json");

    std::vector<AudioSignal> cleans;
    for (const std::string& p : clean_files) cleans.push_back(load_at_rate(p, cfg.sample_rate));

    if (fs::path(csv_path).has_parent_path())
        fs::create_directories(fs::path(csv_path).parent_path());
    std::ofstream csv(csv_path);
    if (!csv) throw DataError("cannot write " + csv_path);
    csv << "noise_type,snr_db,mixture_stoi,mixture_seg_snr_db,mixture_global_snr_db";
    for (int i = 1; i <= cfg.num_stages; ++i)
        csv << ",stage" << i << "_stoi,stage" << i << "_seg_snr_db,stage" << i
            << "_global_snr_db";
    csv << "\n" << std::flush;

    std::printf("config: %s\n", config_json(cfg).c_str());
    std::mt19937 offset_rng(cfg.seed);

    for (const std::string& type : noise_types) {
        const GmmModel noise_model = load_model(cfg.model_dir + "/" + type + ".json");
        const std::vector<std::string> noise_files = list_wavs(cfg.eval_dir + "/noise/" + type);
        if (noise_files.empty()) throw DataError("sweep: no noise files for type " + type);
        std::vector<AudioSignal> noises;
        for (const std::string& p : noise_files) noises.push_back(load_at_rate(p, cfg.sample_rate));

        for (double snr : cfg.snr_sweep) {
            double mix_stoi = 0.0, mix_seg = 0.0, mix_glob = 0.0;
            std::vector<double> st_stoi(cfg.num_stages, 0.0), st_seg(cfg.num_stages, 0.0),
                st_glob(cfg.num_stages, 0.0);

            for (size_t u = 0; u < cleans.size(); ++u) {
                const AudioSignal& clean = cleans[u];
                const AudioSignal& noise = noises[u % noises.size()];
                if (noise.samples.size() < clean.samples.size())
                    throw DataError("sweep: noise file shorter than utterance");
                const size_t slack = noise.samples.size() - clean.samples.size();
                const size_t offset = slack ? offset_rng() % (slack + 1) : 0;

                const MixResult mix = mix_at_snr(clean, noise, snr, offset);
                const SpectralFrames M = stft(mix.mixture, scfg);
                EnhanceOptions eopts;
                eopts.faithful_restft = faithful_restft;
                const EnhanceResult res = enhance(M, speech_model, noise_model, ecfg, eopts);

                mix_stoi += compute_stoi(clean, mix.mixture);
                mix_seg += segmental_snr(clean, mix.mixture);
                mix_glob += global_snr(clean, mix.mixture);
                for (int i = 0; i < cfg.num_stages; ++i) {
                    const AudioSignal y = istft(res.stage_outputs[i]);
                    st_stoi[i] += compute_stoi(clean, y);
                    st_seg[i] += segmental_snr(clean, y);
                    st_glob[i] += global_snr(clean, y);
                }
            }

            const double n = double(cleans.size());
            csv << type << ',' << fmt("%.2f", snr) << ',' << fmt("%.6f", mix_stoi / n) << ','
                << fmt("%.6f", mix_seg / n) << ',' << fmt("%.6f", mix_glob / n);
            for (int i = 0; i < cfg.num_stages; ++i)
                csv << ',' << fmt("%.6f", st_stoi[i] / n) << ',' << fmt("%.6f", st_seg[i] / n)
                    << ',' << fmt("%.6f", st_glob[i] / n);
            csv << "\n" << std::flush;  // keep partial results on failure

            std::printf("%s %+.1f dB: mixture STOI %.4f segSNR %+.2f -> final STOI %.4f segSNR "
                        "%+.2f\n",
                        type.c_str(), snr, mix_stoi / n, mix_seg / n,
                        st_stoi[cfg.num_stages - 1] / n, st_seg[cfg.num_stages - 1] / n);
        }
    }
    std::printf("wrote %s\n", csv_path.c_str());
}

void cmd_spectrogram(const ExperimentConfig& cfg, const std::string& wav_path,
                     const std::string& csv_path) {
    const AudioSignal x = load_at_rate(wav_path, cfg.sample_rate);
    const StftConfig scfg = stft_config(cfg);
    const SpectralFrames S = stft(x, scfg);

    if (fs::path(csv_path).has_parent_path())
        fs::create_directories(fs::path(csv_path).parent_path());
    std::ofstream f(csv_path);
    if (!f) throw DataError("cannot write " + csv_path);

    f << "hz";
    for (int t = 0; t < S.num_frames(); ++t)
        f << ',' << fmt("%.4f", double(t) * scfg.hop / cfg.sample_rate);
    f << "\n";
    for (int b = 0; b < S.num_bins(); ++b) {
        f << fmt("%.2f", double(b) * cfg.sample_rate / scfg.fft_size);
        for (int t = 0; t < S.num_frames(); ++t) {
            // power dB with a -100 dB floor
            const double db = 10.0 * std::log10(std::max(std::norm(S.data(b, t)), 1e-10));
            f << ',' << fmt("%.2f", db);
        }
        f << "\n";
    }
    std::printf("wrote %s (%d bins x %d frames)\n", csv_path.c_str(), S.num_bins(),
                S.num_frames());
}

}  // namespace gmmse
