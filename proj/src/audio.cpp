#include "gmmse/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>

namespace gmmse {

void validate(const AudioSignal& x) {
    if (x.sample_rate <= 0) throw InvariantError("AudioSignal: sample_rate must be positive");
    if (!all_finite(x.samples)) throw InvariantError("AudioSignal: non-finite sample");
}

namespace {

uint32_t read_u32(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
uint16_t read_u16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

void write_u32(std::ofstream& f, uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
}
void write_u16(std::ofstream& f, uint16_t v) {
    uint8_t b[2] = {uint8_t(v), uint8_t(v >> 8)};
    f.write(reinterpret_cast<const char*>(b), 2);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioSignal load_wav(const std::string& path, bool downmix) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open WAV file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw DataError("corrupt WAV header: " + path);

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    const uint8_t* data_ptr = nullptr;
    size_t data_len = 0;
    bool have_fmt = false;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const uint8_t* chunk = bytes.data() + pos;
        uint32_t chunk_size = read_u32(chunk + 4);
        const uint8_t* body = chunk + 8;
        if (pos + 8 + chunk_size > bytes.size()) break;

        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw DataError("corrupt fmt chunk: " + path);
            format = read_u16(body);
            channels = read_u16(body + 2);
            rate = read_u32(body + 4);
            bits = read_u16(body + 14);
            if (format == kFormatExtensible) {
                // first two bytes of the SubFormat GUID carry the codec tag
                if (chunk_size < 40) throw DataError("corrupt extensible fmt chunk: " + path);
                format = read_u16(body + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data_ptr = body;
            data_len = chunk_size;
        }
        pos += 8 + chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }

    if (!have_fmt || data_ptr == nullptr) throw DataError("corrupt WAV (missing fmt/data): " + path);
    if (channels == 0 || rate == 0) throw DataError("corrupt WAV format fields: " + path);

    const bool pcm16 = (format == kFormatPcm && bits == 16);
    const bool float32 = (format == kFormatFloat && bits == 32);
    if (!pcm16 && !float32)
        throw DataError("unsupported WAV codec (need PCM 16-bit or IEEE float 32-bit): " + path);
    if (channels > 1 && !downmix)
        throw DataError("multi-channel WAV without downmix: " + path);

    const size_t bytes_per_sample = bits / 8;
    const size_t frame_bytes = bytes_per_sample * channels;
    const size_t num_frames = data_len / frame_bytes;

    AudioSignal out;
    out.sample_rate = int(rate);
    out.samples.resize(num_frames);
    for (size_t i = 0; i < num_frames; ++i) {
        double acc = 0.0;
        for (uint16_t c = 0; c < channels; ++c) {
            const uint8_t* s = data_ptr + i * frame_bytes + c * bytes_per_sample;
            if (pcm16) {
                int16_t v = int16_t(read_u16(s));
                acc += double(v) / 32768.0;
            } else {
                float v;
                std::memcpy(&v, s, 4);
                acc += double(v);
            }
        }
        out.samples[i] = acc / channels;
    }
    validate(out);
    return out;
}

void save_wav(const std::string& path, const AudioSignal& x) {
    validate(x);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write WAV file: " + path);

    const uint32_t n = uint32_t(x.samples.size());
    const uint32_t data_bytes = n * 2;
    f.write("RIFF", 4);
    write_u32(f, 36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    write_u32(f, 16);
    write_u16(f, kFormatPcm);
    write_u16(f, 1);  // mono
    write_u32(f, uint32_t(x.sample_rate));
    write_u32(f, uint32_t(x.sample_rate) * 2);
    write_u16(f, 2);
    write_u16(f, 16);
    f.write("data", 4);
    write_u32(f, data_bytes);
    for (double s : x.samples) {
        double scaled = std::round(s * 32768.0);
        scaled = std::clamp(scaled, -32768.0, 32767.0);
        write_u16(f, uint16_t(int16_t(scaled)));
    }
    if (!f) throw DataError("short write: " + path);
}

namespace {

// zeroth-order modified Bessel function, power series
double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double x2 = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= x2 / (double(k) * k);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

AudioSignal resample(const AudioSignal& x, int target_rate) {
    validate(x);
    if (target_rate <= 0) throw std::invalid_argument("resample: target_rate must be positive");
    if (target_rate == x.sample_rate) return x;

    const int g = std::gcd(target_rate, x.sample_rate);
    const long up = target_rate / g;
    const long down = x.sample_rate / g;

    constexpr int kTaps = 64;
    constexpr int kHalf = kTaps / 2;
    constexpr double kKaiserBeta = 8.6;
    // anti-aliasing cutoff relative to the source Nyquist
    const double cutoff = std::min(1.0, double(target_rate) / x.sample_rate);
    const double i0_beta = bessel_i0(kKaiserBeta);

    const size_t in_len = x.samples.size();
    const size_t out_len = size_t(std::llround(double(in_len) * target_rate / x.sample_rate));

    AudioSignal out;
    out.sample_rate = target_rate;
    out.samples.assign(out_len, 0.0);

    // tap evaluation at fractional offset frac in [0,1): taps cover
    // input indices base-kHalf+1 .. base+kHalf
    auto fill_taps = [&](double frac, double* taps) {
        double sum = 0.0;
        for (int k = 0; k < kTaps; ++k) {
            const double u = double(k - kHalf + 1) - frac;  // distance from center
            const double w_arg = u / kHalf;
            double w = 0.0;
            if (std::abs(w_arg) <= 1.0)
                w = bessel_i0(kKaiserBeta * std::sqrt(1.0 - w_arg * w_arg)) / i0_beta;
            taps[k] = cutoff * sinc(cutoff * u) * w;
            sum += taps[k];
        }
        // unity DC gain per phase
        if (sum != 0.0)
            for (int k = 0; k < kTaps; ++k) taps[k] /= sum;
    };

    // precompute the polyphase table when the rational phase count is small
    const bool tabulate = up <= 4096;
    std::vector<double> table;
    if (tabulate) {
        table.resize(size_t(up) * kTaps);
        for (long p = 0; p < up; ++p) {
            // output n with n % up == p has center frac = fractional part of n*down/up
            const double center = double(p) * down / up;
            fill_taps(center - std::floor(center), &table[size_t(p) * kTaps]);
        }
    }

    std::vector<double> scratch(kTaps);
    for (size_t n = 0; n < out_len; ++n) {
        const double center = double(n) * down / up;
        const long base = long(std::floor(center));
        const double* taps;
        if (tabulate) {
            taps = &table[size_t(n % size_t(up)) * kTaps];
        } else {
            fill_taps(center - double(base), scratch.data());
            taps = scratch.data();
        }
        double acc = 0.0;
        for (int k = 0; k < kTaps; ++k) {
            const long idx = base + k - kHalf + 1;
            if (idx >= 0 && idx < long(in_len)) acc += x.samples[size_t(idx)] * taps[k];
        }
        out.samples[n] = acc;
    }
    return out;
}

}  // namespace gmmse
