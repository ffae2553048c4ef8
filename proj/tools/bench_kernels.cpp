// Times the OpenMP kernels against their serial reference implementations
// and checks that both produce bit-identical results.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include <omp.h>

#include "gmmse/enhancer.hpp"
#include "gmmse/gmm.hpp"
#include "gmmse/stft.hpp"
#include "gmmse/synth.hpp"

using namespace gmmse;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double max_diff(const CplxMat& a, const CplxMat& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        d = std::max(d, std::abs(a.data[i].real() - b.data[i].real()));
        d = std::max(d, std::abs(a.data[i].imag() - b.data[i].imag()));
    }
    return d;
}

double max_diff(const RealMat& a, const RealMat& b) { return max_diff(a.data, b.data); }

template <typename F>
double time_best_ms(F&& fn, int reps) {
    double best = 1e30;
    for (int r = 0; r < reps; ++r) {
        const double t0 = omp_get_wtime();
        fn();
        best = std::min(best, (omp_get_wtime() - t0) * 1000.0);
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, double diff) {
    std::printf("%-16s %10.2f ms %10.2f ms %7.2fx %12g\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, diff);
}

// deterministic synthetic model, no training required
GmmModel make_model(int dim, int components, int sample_rate, int fft_size, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    GmmModel m;
    m.sample_rate = sample_rate;
    m.fft_size = fft_size;
    m.weights.assign(components, 1.0 / components);
    m.means = RealMat(dim, components);
    m.variances = RealMat(dim, components);
    for (int k = 0; k < components; ++k) {
        double s = 0.0;
        for (int f = 0; f < dim; ++f) {
            m.means(f, k) = u(rng);
            s += m.means(f, k);
        }
        for (int f = 0; f < dim; ++f) {
            m.means(f, k) /= s;
            m.variances(f, k) = 1e-3;
        }
    }
    return m;
}

}  // namespace

int main() {
    const int reps = 5;
    std::printf("threads: %d\n\n", omp_get_max_threads());
    std::printf("%-16s %13s %13s %8s %12s\n", "kernel", "serial", "parallel", "speedup",
                "max|diff|");

    const AudioSignal x = synth_speech_like(30.0, 8000, 7);
    const StftConfig cfg = make_stft_config(8000);

    SpectralFrames S_par, S_ser;
    {
        const double ms_s = time_best_ms([&] { S_ser = stft_serial(x, cfg); }, reps);
        const double ms_p = time_best_ms([&] { S_par = stft(x, cfg); }, reps);
        report("stft", ms_s, ms_p, max_diff(S_par.data, S_ser.data));
    }
    {
        AudioSignal y_par, y_ser;
        const double ms_s = time_best_ms([&] { y_ser = istft_serial(S_ser); }, reps);
        const double ms_p = time_best_ms([&] { y_par = istft(S_par); }, reps);
        report("istft", ms_s, ms_p, max_diff(y_par.samples, y_ser.samples));
    }

    const GmmModel speech_model = make_model(cfg.num_bins(), 6, 8000, cfg.fft_size, 11);
    const GmmModel noise_model = make_model(cfg.num_bins(), 9, 8000, cfg.fft_size, 13);
    {
        std::vector<int> all(noise_model.num_components());
        for (size_t i = 0; i < all.size(); ++i) all[i] = int(i);
        EnhancerConfig ecfg;
        SpectralFrames e_par, e_ser;
        const double ms_s = time_best_ms(
            [&] { e_ser = enhance_stage_serial(S_ser, speech_model, noise_model, all, ecfg); },
            reps);
        const double ms_p = time_best_ms(
            [&] { e_par = enhance_stage(S_ser, speech_model, noise_model, all, ecfg); }, reps);
        report("enhance_stage", ms_s, ms_p, max_diff(e_par.data, e_ser.data));
    }

    {
        const PsdSequence P = periodogram(S_ser);
        int dropped = 0;
        const PsdSequence N = normalize_psd_frames(P, NormalizationMode::PerFrame, &dropped);
        const GmmModel em_model = make_model(cfg.num_bins(), 6, 8000, cfg.fft_size, 17);
        RealMat resp_par, resp_ser;
        double ll_par = 0.0, ll_ser = 0.0;
        const double ms_s =
            time_best_ms([&] { ll_ser = detail::em_estep_serial(em_model, N, resp_ser); }, reps);
        const double ms_p =
            time_best_ms([&] { ll_par = detail::em_estep(em_model, N, resp_par); }, reps);
        report("em_estep", ms_s, ms_p,
               std::max(max_diff(resp_par, resp_ser), std::abs(ll_par - ll_ser)));

        std::vector<double> mass_p, mass_s;
        RealMat sx_p, sx2_p, sx_s, sx2_s;
        const double ams_s = time_best_ms(
            [&] { detail::em_accumulate_serial(N, resp_ser, mass_s, sx_s, sx2_s); }, reps);
        const double ams_p =
            time_best_ms([&] { detail::em_accumulate(N, resp_par, mass_p, sx_p, sx2_p); }, reps);
        const double adiff = std::max({max_diff(mass_p, mass_s), max_diff(sx_p, sx_s),
                                       max_diff(sx2_p, sx2_s)});
        report("em_accumulate", ams_s, ams_p, adiff);
    }

    std::printf("\nall max|diff| values must be exactly 0.\n");
    return 0;
}
