#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "gmmse/commands.hpp"
#include "gmmse/core.hpp"

namespace {

// --config must take effect before the other flags bind their defaults, so
// it is pulled out of argv ahead of the CLI11 parse
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    gmmse::ExperimentConfig cfg;
    std::string config_path = find_config_arg(argc, argv);
    try {
        if (!config_path.empty()) cfg = gmmse::load_config(config_path);
    } catch (const gmmse::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    CLI::App app{"GMM-based multi-stage parametric Wiener filtering for speech enhancement"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_dummy;
    app.add_option("--config", config_dummy, "JSON config file (flags override its values)");
    app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--beta", cfg.beta, "noise overestimation factor");
    app.add_option("--gamma", cfg.gamma, "gain exponent");
    app.add_option("--stages", cfg.num_stages, "number of filtering stages");

    CLI::App* synth = app.add_subcommand("synth", "generate the synthetic corpus tree");
    synth->callback([&] { gmmse::cmd_synth(cfg); });

    CLI::App* train = app.add_subcommand("train", "fit a PSD mixture model to a WAV corpus");
    std::string train_kind, train_dir, train_out;
    train->add_option("kind", train_kind, "speech or noise")
        ->required()
        ->check(CLI::IsMember({"speech", "noise"}));
    train->add_option("corpus_dir", train_dir, "directory of WAV files")->required();
    train->add_option("out_model", train_out, "output model JSON path")->required();
    train->callback([&] { gmmse::cmd_train(cfg, train_kind, train_dir, train_out); });

    CLI::App* mix = app.add_subcommand("mix", "mix clean speech with noise at a target SNR");
    std::string mix_clean, mix_noise, mix_out;
    double mix_snr = 0.0;
    size_t mix_offset = 0;
    mix->add_option("clean", mix_clean, "clean WAV")->required();
    mix->add_option("noise", mix_noise, "noise WAV (at least as long as clean)")->required();
    mix->add_option("out", mix_out, "output mixture WAV")->required();
    mix->add_option("--snr", mix_snr, "target SNR in dB (default 0)");
    mix->add_option("--offset", mix_offset, "noise crop offset in samples");
    mix->callback([&] { gmmse::cmd_mix(cfg, mix_clean, mix_noise, mix_out, mix_snr, mix_offset); });

    CLI::App* enh = app.add_subcommand("enhance", "run the multi-stage enhancement pipeline");
    std::string enh_in, enh_smodel, enh_nmodel, enh_out;
    gmmse::EnhanceCmdOptions enh_opts;
    enh->add_option("mixture", enh_in, "noisy WAV")->required();
    enh->add_option("speech_model", enh_smodel, "speech model JSON")->required();
    enh->add_option("noise_model", enh_nmodel, "noise model JSON")->required();
    enh->add_option("out", enh_out, "output WAV")->required();
    enh->add_flag("--emit-stages", enh_opts.emit_stages, "also write each stage's output");
    enh->add_flag("--faithful-restft", enh_opts.faithful_restft,
                  "resynthesize and re-analyze between stages");
    enh->add_option("--dump-dir", enh_opts.dump_dir, "write per-stage gain/PSD CSV matrices");
    enh->callback([&] { gmmse::cmd_enhance(cfg, enh_in, enh_smodel, enh_nmodel, enh_out, enh_opts); });

    CLI::App* eval = app.add_subcommand("evaluate", "score a processed signal against its clean reference");
    std::string eval_clean, eval_proc, eval_csv, eval_label;
    eval->add_option("clean", eval_clean, "clean reference WAV")->required();
    eval->add_option("processed", eval_proc, "processed WAV")->required();
    eval->add_option("--csv", eval_csv, "append one result row to this CSV");
    eval->add_option("--label", eval_label, "label column for the CSV row");
    eval->callback([&] { gmmse::cmd_evaluate(cfg, eval_clean, eval_proc, eval_csv, eval_label); });

    CLI::App* sweep = app.add_subcommand("sweep", "mix/enhance/evaluate across the SNR sweep");
    std::string sweep_csv = "sweep.csv";
    bool sweep_faithful = false;
    sweep->add_option("--csv", sweep_csv, "output CSV path (default sweep.csv)");
    sweep->add_flag("--faithful-restft", sweep_faithful,
                    "resynthesize and re-analyze between stages");
    sweep->callback([&] { gmmse::cmd_sweep(cfg, sweep_csv, sweep_faithful); });

    CLI::App* spec = app.add_subcommand("spectrogram", "export a dB magnitude spectrogram as CSV");
    std::string spec_in, spec_out;
    spec->add_option("wav", spec_in, "input WAV")->required();
    spec->add_option("out_csv", spec_out, "output CSV path")->required();
    spec->callback([&] { gmmse::cmd_spectrogram(cfg, spec_in, spec_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help exits 0, usage errors exit 1
    } catch (const gmmse::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const gmmse::InvariantError& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 0;
}
