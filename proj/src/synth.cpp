#include "gmmse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gmmse/core.hpp"

namespace gmmse {

namespace {

void peak_normalize(std::vector<double>& x, double amplitude) {
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
        const double s = amplitude / peak;
        for (double& v : x) v *= s;
    }
}

// two-pole resonator: y[n] = (1 - r^2) x[n] + 2 r cos(w) y[n-1] - r^2 y[n-2]
struct Resonator {
    double a1, a2, b0;
    double y1 = 0.0, y2 = 0.0;

    Resonator(double center_hz, double bandwidth_hz, int sample_rate) {
        const double r = std::exp(-kPi * bandwidth_hz / sample_rate);
        a1 = 2.0 * r * std::cos(2.0 * kPi * center_hz / sample_rate);
        a2 = -r * r;
        b0 = 1.0 - r * r;
    }

    double step(double x) {
        const double y = b0 * x + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        return y;
    }
};

// formant-shaped spectral envelope with a gentle low-pass tilt
double formant_envelope(double f, const double* centers, const double* widths,
                        const double* gains, int count) {
    double e = 0.02;
    for (int i = 0; i < count; ++i) {
        const double d = (f - centers[i]) / widths[i];
        e += gains[i] * std::exp(-0.5 * d * d);
    }
    return e / std::sqrt(1.0 + (f / 1200.0) * (f / 1200.0));
}

void rms_normalize(std::vector<double>& x, double target_rms) {
    double e = 0.0;
    for (double v : x) e += v * v;
    const double rms = std::sqrt(e / std::max<size_t>(x.size(), 1));
    if (rms > 0.0) {
        const double s = target_rms / rms;
        for (double& v : x) v *= s;
    }
}

}  // namespace

AudioSignal synth_tone(double freq_hz, double duration_s, int sample_rate, double amplitude) {
    AudioSignal out;
    out.sample_rate = sample_rate;
    const int n = int(std::lround(duration_s * sample_rate));
    out.samples.resize(n);
    for (int i = 0; i < n; ++i)
        out.samples[i] = amplitude * std::sin(2.0 * kPi * freq_hz * i / sample_rate);
    return out;
}

AudioSignal synth_white_noise(double duration_s, int sample_rate, uint32_t seed,
                              double amplitude) {
    AudioSignal out;
    out.sample_rate = sample_rate;
    const int n = int(std::lround(duration_s * sample_rate));
    out.samples.resize(n);
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i) out.samples[i] = gauss(rng);
    peak_normalize(out.samples, amplitude);
    return out;
}

AudioSignal synth_speech_like(double duration_s, int sample_rate, uint32_t seed,
                              double amplitude) {
    AudioSignal out;
    out.sample_rate = sample_rate;
    const int total = int(std::lround(duration_s * sample_rate));
    out.samples.assign(total, 0.0);

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double nyquist = sample_rate / 2.0;

    int pos = 0;
    while (pos < total) {
        const double kind = u(rng);
        if (kind < 0.12) {  // pause between words
            pos += int((0.06 + 0.14 * u(rng)) * sample_rate);
            continue;
        }

        if (kind < 0.30) {  // fricative-like burst
            const int len = std::min(int((0.05 + 0.07 * u(rng)) * sample_rate), total - pos);
            const double center = 1800.0 + (0.92 * nyquist - 2300.0) * u(rng);
            Resonator res(center, 350.0 + 500.0 * u(rng), sample_rate);
            std::vector<double> burst(len);
            for (int i = 0; i < len; ++i) burst[i] = res.step(gauss(rng));
            rms_normalize(burst, 0.35);
            for (int i = 0; i < len; ++i) {
                const double ramp = std::min({1.0, i / (0.008 * sample_rate),
                                              (len - 1 - i) / (0.015 * sample_rate)});
                out.samples[pos + i] = burst[i] * std::max(ramp, 0.0);
            }
            pos += len;
            continue;
        }

        // voiced syllable: pitch glide + formant-weighted harmonics; the
        // narrow f0 range keeps the harmonic comb stable across syllables
        const int len = std::min(int((0.10 + 0.18 * u(rng)) * sample_rate), total - pos);
        const double f0_start = 115.0 + 25.0 * u(rng);
        const double f0_end = 115.0 + 25.0 * u(rng);
        const double centers[3] = {320.0 + 480.0 * u(rng), 1000.0 + 1300.0 * u(rng),
                                   2400.0 + 900.0 * u(rng)};
        const double widths[3] = {90.0, 130.0, 180.0};
        const double gains[3] = {1.0, 0.65, 0.3};

        const double f0_max = std::max(f0_start, f0_end);
        const int harmonics = std::max(1, int(0.95 * nyquist / f0_max));
        std::vector<double> amp(harmonics);
        const double f0_mid = 0.5 * (f0_start + f0_end);
        for (int h = 0; h < harmonics; ++h)
            amp[h] = formant_envelope((h + 1) * f0_mid, centers, widths, gains, 3);

        double phase = 2.0 * kPi * u(rng);
        const int attack = int(0.015 * sample_rate);
        const int release = int(0.040 * sample_rate);
        for (int i = 0; i < len; ++i) {
            const double f0 = f0_start + (f0_end - f0_start) * i / std::max(len - 1, 1);
            phase += 2.0 * kPi * f0 / sample_rate;
            double s = 0.0;
            for (int h = 0; h < harmonics; ++h) s += amp[h] * std::sin((h + 1) * phase);
            s += 0.015 * gauss(rng);  // aspiration floor
            double env = 1.0;
            if (i < attack) env = i / double(attack);
            if (len - 1 - i < release) env = std::min(env, (len - 1 - i) / double(release));
            out.samples[pos + i] = s * env;
        }
        pos += len;
    }

    peak_normalize(out.samples, amplitude);
    return out;
}

AudioSignal synth_engine_noise(double duration_s, int sample_rate, uint32_t seed,
                               double amplitude) {
    AudioSignal out;
    out.sample_rate = sample_rate;
    const int n = int(std::lround(duration_s * sample_rate));
    out.samples.assign(n, 0.0);

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double base = 55.0;
    const int num_harmonics = 8;

    for (int k = 1; k <= num_harmonics; ++k) {
        const double a = (0.8 + 0.4 * u(rng)) / std::sqrt(double(k));
        const double carrier_phase = 2.0 * kPi * u(rng);
        const double am_rate = 0.3 + 1.2 * u(rng);  // Hz
        const double am_depth = 0.2 + 0.3 * u(rng);
        const double am_phase = 2.0 * kPi * u(rng);
        for (int i = 0; i < n; ++i) {
            const double t = double(i) / sample_rate;
            const double am = 1.0 + am_depth * std::sin(2.0 * kPi * am_rate * t + am_phase);
            out.samples[i] += a * am * std::sin(2.0 * kPi * base * k * t + carrier_phase);
        }
    }

    peak_normalize(out.samples, amplitude);
    return out;
}

AudioSignal synth_babble_noise(double duration_s, int sample_rate, uint32_t seed,
                               double amplitude) {
    AudioSignal out;
    out.sample_rate = sample_rate;
    const int n = int(std::lround(duration_s * sample_rate));
    out.samples.assign(n, 0.0);

    const int num_bands = 6;
    const double lo = 250.0, hi = std::min(3200.0, 0.8 * sample_rate / 2.0);
    for (int b = 0; b < num_bands; ++b) {
        std::mt19937 rng(seed + 0x9e3779b9u * uint32_t(b + 1));  // independent stream per band
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        const double center =
            lo * std::pow(hi / lo, (b + 0.5 * u(rng)) / double(num_bands - 0.5));
        Resonator res(center, 0.25 * center, sample_rate);

        // slow multi-sine envelope, syllabic rates
        const double rate1 = 1.5 + 3.0 * u(rng), rate2 = 3.0 + 4.0 * u(rng);
        const double ph1 = 2.0 * kPi * u(rng), ph2 = 2.0 * kPi * u(rng);

        std::vector<double> band(n);
        for (int i = 0; i < n; ++i) {
            const double t = double(i) / sample_rate;
            const double env = 0.35 + 0.65 * std::abs(0.6 * std::sin(2.0 * kPi * rate1 * t + ph1) +
                                                      0.4 * std::sin(2.0 * kPi * rate2 * t + ph2));
            band[i] = env * res.step(gauss(rng));
        }
        rms_normalize(band, 1.0);
        for (int i = 0; i < n; ++i) out.samples[i] += band[i];
    }

    peak_normalize(out.samples, amplitude);
    return out;
}

}  // namespace gmmse
