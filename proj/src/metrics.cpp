#include "gmmse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <sstream>

#include "gmmse/fft.hpp"

namespace gmmse {

namespace {

double signal_power(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s / double(x.size());
}

}  // namespace

MixResult mix_at_snr(const AudioSignal& clean, const AudioSignal& noise, double snr_db,
                     size_t noise_offset) {
    validate(clean);
    validate(noise);
    if (clean.sample_rate != noise.sample_rate)
        throw DataError("mix_at_snr: sample rate mismatch");
    if (noise_offset + clean.samples.size() > noise.samples.size())
        throw DataError("mix_at_snr: noise too short for requested offset");

    std::vector<double> crop(noise.samples.begin() + noise_offset,
                             noise.samples.begin() + noise_offset + clean.samples.size());
    const double p_clean = signal_power(clean.samples);
    const double p_noise = signal_power(crop);
    if (p_clean <= 0.0) throw DataError("mix_at_snr: clean signal has zero power");
    if (p_noise <= 0.0) throw DataError("mix_at_snr: noise crop has zero power");

    const double g = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));

    MixResult res;
    res.noise_gain = g;
    res.scaled_noise.sample_rate = clean.sample_rate;
    res.scaled_noise.samples.resize(crop.size());
    res.mixture.sample_rate = clean.sample_rate;
    res.mixture.samples.resize(crop.size());
    for (size_t i = 0; i < crop.size(); ++i) {
        res.scaled_noise.samples[i] = g * crop[i];
        res.mixture.samples[i] = clean.samples[i] + res.scaled_noise.samples[i];
    }
    res.achieved_snr_db =
        10.0 * std::log10(signal_power(clean.samples) / signal_power(res.scaled_noise.samples));
    return res;
}

double segmental_snr(const AudioSignal& clean, const AudioSignal& estimate) {
    if (clean.sample_rate != estimate.sample_rate)
        throw DataError("segmental_snr: sample rate mismatch");
    if (clean.samples.size() != estimate.samples.size())
        throw DataError("segmental_snr: length mismatch");
    const int frame = int(std::lround(0.02 * clean.sample_rate));
    if (frame < 1 || clean.samples.size() < size_t(frame))
        throw DataError("segmental_snr: signal shorter than one frame");

    double acc = 0.0;
    int used = 0;
    const size_t num_frames = clean.samples.size() / frame;
    for (size_t j = 0; j < num_frames; ++j) {
        const size_t base = j * frame;
        double e_clean = 0.0, e_err = 0.0;
        for (int n = 0; n < frame; ++n) {
            const double c = clean.samples[base + n];
            const double d = c - estimate.samples[base + n];
            e_clean += c * c;
            e_err += d * d;
        }
        if (e_clean < 1e-10) continue;  // silent reference frame
        double snr;
        if (e_err <= 0.0)
            snr = 35.0;
        else
            snr = std::clamp(10.0 * std::log10(e_clean / e_err), -10.0, 35.0);
        acc += snr;
        ++used;
    }
    if (used == 0) throw DataError("segmental_snr: no active frames");
    return acc / used;
}

double global_snr(const AudioSignal& clean, const AudioSignal& estimate) {
    if (clean.samples.size() != estimate.samples.size())
        throw DataError("global_snr: length mismatch");
    double e_clean = 0.0, e_err = 0.0;
    for (size_t i = 0; i < clean.samples.size(); ++i) {
        const double c = clean.samples[i];
        const double d = c - estimate.samples[i];
        e_clean += c * c;
        e_err += d * d;
    }
    if (e_clean <= 0.0) throw DataError("global_snr: reference has zero power");
    if (e_err <= 0.0) return 99.0;
    return std::min(10.0 * std::log10(e_clean / e_err), 99.0);
}

// ---------------------------------------------------------------------------
// STOI (Taal et al. 2011): 10 kHz, 256-sample Hann frames with 50% overlap,
// 512-pt FFT, 15 one-third-octave bands from 150 Hz, correlation of 30-frame
// band envelopes after normalization and -15 dB SDR clipping.
// ---------------------------------------------------------------------------
namespace {

constexpr int kStoiRate = 10000;
constexpr int kStoiFrame = 256;
constexpr int kStoiHop = 128;
constexpr int kStoiFft = 512;
constexpr int kStoiBands = 15;
constexpr double kStoiMinFreq = 150.0;
constexpr int kStoiSegment = 30;       // frames per comparison segment
constexpr double kStoiDynRange = 40.0;  // silent-frame threshold below max, dB

// symmetric Hann without zero endpoints: 0.5 (1 - cos(2 pi k / (N+1)))
std::vector<double> hann_symmetric(int n) {
    std::vector<double> w(n);
    for (int k = 1; k <= n; ++k) w[k - 1] = 0.5 * (1.0 - std::cos(2.0 * kPi * k / (n + 1)));
    return w;
}

// drop frames whose windowed energy is more than kStoiDynRange dB below the
// loudest frame, repacking the survivors by overlap-add
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
    const std::vector<double> w = hann_symmetric(kStoiFrame);
    std::vector<size_t> starts;
    for (size_t s = 0; s + kStoiFrame < x.size(); s += kStoiHop) starts.push_back(s);
    if (starts.empty()) throw DataError("stoi: signal shorter than one analysis frame");

    std::vector<double> level(starts.size());
    double level_max = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < starts.size(); ++j) {
        double e = 0.0;
        for (int n = 0; n < kStoiFrame; ++n) {
            const double v = x[starts[j] + n] * w[n];
            e += v * v;
        }
        level[j] = 20.0 * std::log10(std::sqrt(e) / std::sqrt(double(kStoiFrame)));
        level_max = std::max(level_max, level[j]);
    }

    std::vector<double> xs(x.size(), 0.0), ys(y.size(), 0.0);
    size_t count = 0, end = 0;
    for (size_t j = 0; j < starts.size(); ++j) {
        if (!(level[j] - level_max + kStoiDynRange > 0.0)) continue;
        for (int n = 0; n < kStoiFrame; ++n) {
            xs[count + n] += x[starts[j] + n] * w[n];
            ys[count + n] += y[starts[j] + n] * w[n];
        }
        end = count + kStoiFrame;
        count += kStoiHop;
    }
    if (end == 0) throw DataError("stoi: no frames above the silence threshold");
    xs.resize(end);
    ys.resize(end);
    x = std::move(xs);
    y = std::move(ys);
}

struct Band {
    int first = 0;  // first FFT bin in the band
    int last = 0;   // one past the last bin
};

std::vector<Band> third_octave_bands() {
    std::vector<double> freq(kStoiFft / 2 + 1);
    for (size_t i = 0; i < freq.size(); ++i) freq[i] = double(kStoiRate) * double(i) / kStoiFft;

    auto nearest_bin = [&freq](double target) {
        int best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (size_t i = 0; i < freq.size(); ++i) {
            const double d = (freq[i] - target) * (freq[i] - target);
            if (d < best_d) {
                best_d = d;
                best = int(i);
            }
        }
        return best;
    };

    std::vector<Band> bands(kStoiBands);
    for (int j = 0; j < kStoiBands; ++j) {
        const double cf = kStoiMinFreq * std::pow(2.0, j / 3.0);
        bands[j].first = nearest_bin(cf * std::pow(2.0, -1.0 / 6.0));
        bands[j].last = nearest_bin(cf * std::pow(2.0, 1.0 / 6.0));
    }
    return bands;
}

// one-third-octave envelope matrix, bands x frames
RealMat band_envelopes(const std::vector<double>& x, const std::vector<Band>& bands) {
    const std::vector<double> w = hann_symmetric(kStoiFrame);
    std::vector<size_t> starts;
    for (size_t s = 0; s + kStoiFrame < x.size(); s += kStoiHop) starts.push_back(s);
    if (starts.empty()) throw DataError("stoi: no analysis frames after silence removal");

    RealMat env(kStoiBands, int(starts.size()));
    std::vector<double> buf(kStoiFrame);
    for (size_t t = 0; t < starts.size(); ++t) {
        for (int n = 0; n < kStoiFrame; ++n) buf[n] = x[starts[t] + n] * w[n];
        const std::vector<std::complex<double>> spec = rfft(buf.data(), kStoiFrame, kStoiFft);
        for (int j = 0; j < kStoiBands; ++j) {
            double e = 0.0;
            for (int b = bands[j].first; b < bands[j].last; ++b) e += std::norm(spec[b]);
            env(j, int(t)) = std::sqrt(e);
        }
    }
    return env;
}

}  // namespace

double compute_stoi(const AudioSignal& clean, const AudioSignal& estimate) {
    if (clean.sample_rate != estimate.sample_rate)
        throw DataError("stoi: sample rate mismatch");
    if (clean.samples.size() != estimate.samples.size())
        throw DataError("stoi: length mismatch");

    AudioSignal c = clean.sample_rate == kStoiRate ? clean : resample(clean, kStoiRate);
    AudioSignal e = estimate.sample_rate == kStoiRate ? estimate : resample(estimate, kStoiRate);

    std::vector<double> x = std::move(c.samples);
    std::vector<double> y = std::move(e.samples);
    remove_silent_frames(x, y);

    const std::vector<Band> bands = third_octave_bands();
    const RealMat X = band_envelopes(x, bands);
    const RealMat Y = band_envelopes(y, bands);
    const int T = X.cols;
    if (T < kStoiSegment) throw DataError("stoi: fewer active frames than one segment");

    const double clip = 1.0 + std::pow(10.0, 15.0 / 20.0);  // -15 dB SDR bound

    double acc = 0.0;
    long cells = 0;
    std::vector<double> xs(kStoiSegment), yp(kStoiSegment);
    for (int m = kStoiSegment - 1; m < T; ++m) {
        for (int j = 0; j < kStoiBands; ++j) {
            double x2 = 0.0, y2 = 0.0;
            for (int n = 0; n < kStoiSegment; ++n) {
                const double xv = X(j, m - kStoiSegment + 1 + n);
                const double yv = Y(j, m - kStoiSegment + 1 + n);
                xs[n] = xv;
                x2 += xv * xv;
                y2 += yv * yv;
            }
            if (x2 <= 0.0 || y2 <= 0.0) continue;  // degenerate cell, no information
            const double alpha = std::sqrt(x2 / y2);
            for (int n = 0; n < kStoiSegment; ++n) {
                const double yv = alpha * Y(j, m - kStoiSegment + 1 + n);
                yp[n] = std::min(yv, xs[n] * clip);
            }
            double mx = 0.0, my = 0.0;
            for (int n = 0; n < kStoiSegment; ++n) {
                mx += xs[n];
                my += yp[n];
            }
            mx /= kStoiSegment;
            my /= kStoiSegment;
            double sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (int n = 0; n < kStoiSegment; ++n) {
                const double dx = xs[n] - mx;
                const double dy = yp[n] - my;
                sxx += dx * dx;
                syy += dy * dy;
                sxy += dx * dy;
            }
            if (sxx <= 0.0 || syy <= 0.0) continue;  // constant envelope
            acc += sxy / std::sqrt(sxx * syy);
            ++cells;
        }
    }
    if (cells == 0) throw DataError("stoi: no usable band segments");
    return acc / double(cells);
}

EvalReport evaluate_signals(const AudioSignal& clean, const AudioSignal& estimate) {
    EvalReport r;
    r.stoi = compute_stoi(clean, estimate);
    r.seg_snr_db = segmental_snr(clean, estimate);
    r.global_snr_db = global_snr(clean, estimate);
    return r;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string eval_csv_header(const EvalReport& r) {
    std::string h = "stoi,seg_snr_db,global_snr_db";
    for (const auto& [idx, unused] : r.per_stage) {
        (void)unused;
        const std::string s = std::to_string(idx);
        h += ",stage" + s + "_stoi,stage" + s + "_seg_snr_db,stage" + s + "_global_snr_db";
    }
    return h;
}

std::string eval_csv_row(const EvalReport& r) {
    std::string row = fmt(r.stoi) + "," + fmt(r.seg_snr_db) + "," + fmt(r.global_snr_db);
    for (const auto& [idx, m] : r.per_stage) {
        (void)idx;
        row += "," + fmt(m.stoi) + "," + fmt(m.seg_snr_db) + "," + fmt(m.global_snr_db);
    }
    return row;
}

std::string eval_text(const EvalReport& r) {
    std::ostringstream os;
    os << "STOI        " << fmt(r.stoi) << "  (" << fmt(r.stoi * 100.0) << "%)\n";
    os << "segSNR      " << fmt(r.seg_snr_db) << " dB\n";
    os << "global SNR  " << fmt(r.global_snr_db) << " dB\n";
    for (const auto& [idx, m] : r.per_stage) {
        os << "stage " << idx << ": STOI " << fmt(m.stoi) << ", segSNR " << fmt(m.seg_snr_db)
           << " dB, global SNR " << fmt(m.global_snr_db) << " dB\n";
    }
    return os.str();
}

}  // namespace gmmse
