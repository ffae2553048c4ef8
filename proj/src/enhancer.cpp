#include "gmmse/enhancer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "gmmse/audio.hpp"

namespace gmmse {

void validate(const EnhancerConfig& cfg) {
    if (!(cfg.beta >= 0.0)) throw InvariantError("EnhancerConfig: beta must be >= 0");
    if (!(cfg.gamma > 0.0)) throw InvariantError("EnhancerConfig: gamma must be > 0");
    if (cfg.num_stages < 1) throw InvariantError("EnhancerConfig: num_stages must be >= 1");
    if (!(cfg.stage_energy_fraction > 0.0) || cfg.stage_energy_fraction > 1.0)
        throw InvariantError("EnhancerConfig: stage_energy_fraction must be in (0, 1]");
    if (!(cfg.gain_floor >= 0.0) || cfg.gain_floor >= 1.0)
        throw InvariantError("EnhancerConfig: gain_floor must be in [0, 1)");
    if (!(cfg.smoothing >= 0.0) || cfg.smoothing >= 1.0)
        throw InvariantError("EnhancerConfig: smoothing must be in [0, 1)");
}

void validate(const StagePlan& plan, int num_noise_components) {
    if (plan.partitions.empty()) throw InvariantError("StagePlan: no stages");
    if (int(plan.ranking_keys.size()) != num_noise_components)
        throw InvariantError("StagePlan: ranking key count mismatch");
    std::vector<char> seen(num_noise_components, 0);
    for (const auto& part : plan.partitions) {
        if (part.empty()) throw InvariantError("StagePlan: empty stage");
        for (int k : part) {
            if (k < 0 || k >= num_noise_components)
                throw InvariantError("StagePlan: component index out of range");
            if (seen[k]) throw InvariantError("StagePlan: component assigned twice");
            seen[k] = 1;
        }
    }
    for (char s : seen)
        if (!s) throw InvariantError("StagePlan: component missing from all stages");
    // earlier stages must hold the higher-energy components
    for (size_t i = 0; i + 1 < plan.partitions.size(); ++i) {
        double lo = std::numeric_limits<double>::max();
        for (int k : plan.partitions[i]) lo = std::min(lo, plan.ranking_keys[k]);
        for (int k : plan.partitions[i + 1])
            if (plan.ranking_keys[k] > lo)
                throw InvariantError("StagePlan: ranking order violated across stages");
    }
}

StagePlan plan_stages(const GmmModel& noise_model, const EnhancerConfig& cfg) {
    validate(cfg);
    const int K = noise_model.num_components();
    const int I = cfg.num_stages;
    if (I > K) throw InvariantError("plan_stages: more stages than noise components");

    StagePlan plan;
    plan.ranking_keys.resize(K);
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        const double* mu = noise_model.means.col(k);
        for (int f = 0; f < noise_model.dim(); ++f) s += mu[f];
        plan.ranking_keys[k] = noise_model.weights[k] * s;
    }

    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&plan](int a, int b) {
        return plan.ranking_keys[a] > plan.ranking_keys[b];
    });

    int start = 0;
    for (int stage = 0; stage < I; ++stage) {
        const int remaining = K - start;
        const int stages_left = I - stage;
        int take = remaining;
        if (stage < I - 1) {
            double total = 0.0;
            for (int j = start; j < K; ++j) total += plan.ranking_keys[order[j]];
            const double target = cfg.stage_energy_fraction * total;
            double cum = 0.0;
            for (int j = 0; j < remaining; ++j) {
                cum += plan.ranking_keys[order[start + j]];
                // small relative slack so exact-threshold examples are not
                // missed to rounding in the running sum
                if (cum >= target - 1e-12 * std::abs(total)) {
                    take = j + 1;
                    break;
                }
            }
            take = std::min(take, remaining - (stages_left - 1));  // keep later stages non-empty
            take = std::max(take, 1);
        }
        plan.partitions.emplace_back(order.begin() + start, order.begin() + start + take);
        start += take;
    }
    for (auto& part : plan.partitions) std::sort(part.begin(), part.end());
    validate(plan, K);
    return plan;
}

void validate(const CoefficientVector& c) {
    for (double a : c.speech)
        if (!(a >= 0.0) || !std::isfinite(a))
            throw InvariantError("CoefficientVector: negative or non-finite speech entry");
    for (double a : c.noise)
        if (!(a >= 0.0) || !std::isfinite(a))
            throw InvariantError("CoefficientVector: negative or non-finite noise entry");
}

CoefficientSolver::CoefficientSolver(const RealMat& U_s, const RealMat& U_v) {
    if (U_s.rows != U_v.rows)
        throw InvariantError("CoefficientSolver: prototype dimension mismatch");
    const int F = U_s.rows;
    const int K = U_s.cols + U_v.cols;
    if (K < 1 || F < 1) throw InvariantError("CoefficientSolver: empty prototype matrix");
    if (K > F) throw InvariantError("CoefficientSolver: more prototypes than frequency bins");

    num_speech_ = U_s.cols;
    stacked_ = RealMat(F, K);
    for (int k = 0; k < U_s.cols; ++k)
        std::copy(U_s.col(k), U_s.col(k) + F, stacked_.col(k));
    for (int k = 0; k < U_v.cols; ++k)
        std::copy(U_v.col(k), U_v.col(k) + F, stacked_.col(num_speech_ + k));

    column_sums_.resize(K);
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        const double* c = stacked_.col(k);
        for (int f = 0; f < F; ++f) s += c[f];
        column_sums_[k] = s;
        if (s <= 0.0) throw InvariantError("CoefficientSolver: prototype column is all zero");
    }

    // Moore-Penrose inverse via SVD, small singular values dropped
    Eigen::MatrixXd U(F, K);
    for (int k = 0; k < K; ++k)
        for (int f = 0; f < F; ++f) U(f, k) = stacked_(f, k);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(U, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = 1e-10 * sv(0);
    Eigen::VectorXd inv_sv(sv.size());
    for (int i = 0; i < sv.size(); ++i) inv_sv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
    const Eigen::MatrixXd P = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();

    pinv_ = RealMat(K, F);
    for (int f = 0; f < F; ++f)
        for (int k = 0; k < K; ++k) pinv_(k, f) = P(k, f);
}

std::vector<double> CoefficientSolver::solve_raw(const double* mixture_frame, int dim) const {
    if (dim != stacked_.rows)
        throw std::invalid_argument("CoefficientSolver::solve_raw: frame dimension mismatch");
    const int F = stacked_.rows, K = stacked_.cols;
    std::vector<double> raw(K, 0.0);
    for (int f = 0; f < F; ++f) {
        const double phi = mixture_frame[f];
        const double* col = pinv_.col(f);
        for (int k = 0; k < K; ++k) raw[k] += col[k] * phi;
    }
    return raw;
}

CoefficientVector CoefficientSolver::solve(const double* mixture_frame, int dim) const {
    const int F = stacked_.rows, K = stacked_.cols;
    std::vector<double> raw = solve_raw(mixture_frame, dim);

    double target = 0.0;
    for (int f = 0; f < F; ++f) target += mixture_frame[f];
    double reconstructed = 0.0;
    for (int k = 0; k < K; ++k)
        if (raw[k] > 0.0) reconstructed += raw[k] * column_sums_[k];

    std::vector<double> alpha(K, 0.0);
    if (reconstructed > 0.0 && target > 0.0) {
        const double scale = target / reconstructed;
        for (int k = 0; k < K; ++k)
            if (raw[k] > 0.0) alpha[k] = raw[k] * scale;
    }

    CoefficientVector out;
    out.speech.assign(alpha.begin(), alpha.begin() + num_speech_);
    out.noise.assign(alpha.begin() + num_speech_, alpha.end());
    return out;
}

CoefficientVector solve_coefficients(const std::vector<double>& mixture_psd_frame,
                                     const RealMat& U_s, const RealMat& U_v) {
    const CoefficientSolver solver(U_s, U_v);
    return solver.solve(mixture_psd_frame.data(), int(mixture_psd_frame.size()));
}

std::pair<std::vector<double>, std::vector<double>> reconstruct_psds(
    const CoefficientVector& coeffs, const RealMat& U_s, const RealMat& U_v) {
    validate(coeffs);
    if (int(coeffs.speech.size()) != U_s.cols || int(coeffs.noise.size()) != U_v.cols)
        throw std::invalid_argument("reconstruct_psds: coefficient count mismatch");
    if (U_s.rows != U_v.rows)
        throw std::invalid_argument("reconstruct_psds: prototype dimension mismatch");
    const int F = U_s.rows;
    std::vector<double> speech(F, 0.0), noise(F, 0.0);
    for (int k = 0; k < U_s.cols; ++k) {
        const double a = coeffs.speech[k];
        if (a == 0.0) continue;
        const double* col = U_s.col(k);
        for (int f = 0; f < F; ++f) speech[f] += a * col[f];
    }
    for (int k = 0; k < U_v.cols; ++k) {
        const double a = coeffs.noise[k];
        if (a == 0.0) continue;
        const double* col = U_v.col(k);
        for (int f = 0; f < F; ++f) noise[f] += a * col[f];
    }
    return {std::move(speech), std::move(noise)};
}

std::vector<double> parametric_wiener_gain(const std::vector<double>& speech_psd,
                                           const std::vector<double>& noise_psd,
                                           const EnhancerConfig& cfg) {
    if (speech_psd.size() != noise_psd.size())
        throw std::invalid_argument("parametric_wiener_gain: PSD length mismatch");
    std::vector<double> w(speech_psd.size());
    for (size_t i = 0; i < w.size(); ++i) {
        double g;
        if (cfg.beta == 0.0) {
            g = 1.0;  // noise term drops out of the ratio
        } else {
            const double denom = speech_psd[i] + cfg.beta * noise_psd[i];
            if (denom <= 0.0) {
                w[i] = cfg.gain_floor;
                continue;
            }
            const double ratio = speech_psd[i] / denom;
            if (cfg.gamma == 1.0)
                g = ratio;
            else if (cfg.gamma == 2.0)
                g = ratio * ratio;
            else
                g = std::pow(ratio, cfg.gamma);
        }
        w[i] = std::max(cfg.gain_floor, g);
    }
    return w;
}

namespace {

SpectralFrames enhance_stage_impl(const SpectralFrames& M, const GmmModel& speech_model,
                                  const GmmModel& noise_model,
                                  const std::vector<int>& stage_components,
                                  const EnhancerConfig& cfg, StageDiagnostics* diag,
                                  bool parallel) {
    validate(cfg);
    const int F = M.num_bins(), T = M.num_frames();
    if (speech_model.dim() != F || noise_model.dim() != F)
        throw InvariantError("enhance_stage: model dimension does not match STFT bins");
    if (speech_model.sample_rate != M.sample_rate || noise_model.sample_rate != M.sample_rate)
        throw InvariantError("enhance_stage: model sample rate does not match signal");
    if (stage_components.empty()) throw InvariantError("enhance_stage: empty component set");

    const RealMat& U_s = speech_model.means;
    const RealMat U_v = select_columns(noise_model.means, stage_components);
    const CoefficientSolver solver(U_s, U_v);
    const PsdSequence phi = periodogram(M, cfg.smoothing);

    SpectralFrames out = M;
    if (diag) {
        diag->gain.values = RealMat(F, T);
        diag->speech_psd = RealMat(F, T);
        diag->noise_psd = RealMat(F, T);
    }

    auto process_frame = [&](int t) {
        const double* phi_t = phi.data.col(t);
        double total = 0.0;
        for (int f = 0; f < F; ++f) total += phi_t[f];

        std::vector<double> gain, speech_psd, noise_psd;
        if (total <= 0.0) {
            gain.assign(F, 1.0);  // silent frame passes through
            speech_psd.assign(F, 0.0);
            noise_psd.assign(F, 0.0);
        } else {
            const CoefficientVector alpha = solver.solve(phi_t, F);
            auto psds = reconstruct_psds(alpha, U_s, U_v);
            speech_psd = std::move(psds.first);
            noise_psd = std::move(psds.second);
            gain = parametric_wiener_gain(speech_psd, noise_psd, cfg);
        }

        const std::complex<double>* src = M.data.col(t);
        std::complex<double>* dst = out.data.col(t);
        for (int f = 0; f < F; ++f) dst[f] = gain[f] * src[f];

        if (diag) {
            std::copy(gain.begin(), gain.end(), diag->gain.values.col(t));
            std::copy(speech_psd.begin(), speech_psd.end(), diag->speech_psd.col(t));
            std::copy(noise_psd.begin(), noise_psd.end(), diag->noise_psd.col(t));
        }
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < T; ++t) process_frame(t);
    } else {
        for (int t = 0; t < T; ++t) process_frame(t);
    }
    return out;
}

}  // namespace

SpectralFrames enhance_stage(const SpectralFrames& M, const GmmModel& speech_model,
                             const GmmModel& noise_model,
                             const std::vector<int>& stage_components, const EnhancerConfig& cfg,
                             StageDiagnostics* diag) {
    return enhance_stage_impl(M, speech_model, noise_model, stage_components, cfg, diag, true);
}

SpectralFrames enhance_stage_serial(const SpectralFrames& M, const GmmModel& speech_model,
                                    const GmmModel& noise_model,
                                    const std::vector<int>& stage_components,
                                    const EnhancerConfig& cfg, StageDiagnostics* diag) {
    return enhance_stage_impl(M, speech_model, noise_model, stage_components, cfg, diag, false);
}

EnhanceResult enhance(const SpectralFrames& M, const GmmModel& speech_model,
                      const GmmModel& noise_model, const EnhancerConfig& cfg,
                      const EnhanceOptions& opts) {
    validate(cfg);
    EnhanceResult res;
    res.plan = plan_stages(noise_model, cfg);
    const int I = res.plan.num_stages();
    res.stage_outputs.reserve(I);
    if (opts.collect_diagnostics) res.diagnostics.resize(I);

    SpectralFrames cur = M;
    for (int i = 0; i < I; ++i) {
        StageDiagnostics* d = opts.collect_diagnostics ? &res.diagnostics[i] : nullptr;
        SpectralFrames shat =
            enhance_stage(cur, speech_model, noise_model, res.plan.partitions[i], cfg, d);
        if (i + 1 < I) {
            if (opts.faithful_restft) {
                // round-trip through the waveform so the next stage analyzes
                // a synthesizable signal rather than the raw masked frames
                const AudioSignal y = istft(shat);
                cur = stft(y, shat.config);
            } else {
                cur = shat;  // chain directly in the STFT domain
            }
        }
        res.stage_outputs.push_back(std::move(shat));
    }
    res.output = res.stage_outputs.back();
    return res;
}

}  // namespace gmmse
