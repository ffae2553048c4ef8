#pragma once

#include <utility>
#include <vector>

#include "gmmse/core.hpp"
#include "gmmse/gmm.hpp"
#include "gmmse/stft.hpp"

namespace gmmse {

// Tuning knobs for the staged parametric Wiener pipeline.
struct EnhancerConfig {
    double beta = 2.0;                   // noise overestimation factor, >= 0
    double gamma = 1.0;                  // gain exponent, > 0
    int num_stages = 2;                  // >= 1
    double stage_energy_fraction = 0.5;  // cumulative-energy split threshold, (0, 1]
    double gain_floor = 0.0;             // minimum applied gain, [0, 1)
    double smoothing = 0.0;              // periodogram smoothing factor, [0, 1)
};

void validate(const EnhancerConfig& cfg);

// Ordered partition of the noise-model components into per-stage index sets,
// highest-energy components first.
struct StagePlan {
    std::vector<std::vector<int>> partitions;  // component indices per stage
    std::vector<double> ranking_keys;          // weight * mean-spectrum sum, per component

    int num_stages() const { return int(partitions.size()); }
};

void validate(const StagePlan& plan, int num_noise_components);

// Rank components by prior-weighted mean energy and split them into
// num_stages groups: each stage takes the smallest remaining prefix whose
// cumulative key reaches stage_energy_fraction of the remaining total, the
// last stage takes whatever is left. Ties keep component order.
StagePlan plan_stages(const GmmModel& noise_model, const EnhancerConfig& cfg);

// Per-frame nonnegative mixing coefficients over the model prototype spectra.
struct CoefficientVector {
    std::vector<double> speech;
    std::vector<double> noise;
};

void validate(const CoefficientVector& c);

// Precomputes the pseudo-inverse of the stacked prototype matrix [U_s U_v]
// (constant across frames) so each per-frame solve is one small mat-vec
// followed by rectification.
class CoefficientSolver {
public:
    CoefficientSolver(const RealMat& U_s, const RealMat& U_v);

    // Raw least-squares solution, before rectification.
    std::vector<double> solve_raw(const double* mixture_frame, int dim) const;

    // Rectified solution: negatives zeroed, survivors rescaled by a single
    // factor so the reconstructed total power matches the frame's total.
    CoefficientVector solve(const double* mixture_frame, int dim) const;

    int dim() const { return stacked_.rows; }
    int num_speech() const { return num_speech_; }
    int num_noise() const { return stacked_.cols - num_speech_; }

private:
    RealMat stacked_;  // F x (K_s + K_v), prototype spectra as columns
    RealMat pinv_;     // (K_s + K_v) x F
    std::vector<double> column_sums_;
    int num_speech_ = 0;
};

// One-shot convenience wrapper around CoefficientSolver.
CoefficientVector solve_coefficients(const std::vector<double>& mixture_psd_frame,
                                     const RealMat& U_s, const RealMat& U_v);

// speech frame = U_s * alpha_s, noise frame = U_v * alpha_v.
std::pair<std::vector<double>, std::vector<double>> reconstruct_psds(
    const CoefficientVector& coeffs, const RealMat& U_s, const RealMat& U_v);

// w(f) = max(gain_floor, (phi_s / (phi_s + beta * phi_v))^gamma).
// Bins where the denominator vanishes get gain_floor; beta == 0 gives unit
// gain everywhere (the noise term drops out of the ratio entirely).
std::vector<double> parametric_wiener_gain(const std::vector<double>& speech_psd,
                                           const std::vector<double>& noise_psd,
                                           const EnhancerConfig& cfg);

// Time-frequency gain mask applied by one stage.
struct GainMask {
    RealMat values;  // F x T
};

// Per-stage intermediate quantities, exportable for inspection.
struct StageDiagnostics {
    GainMask gain;
    RealMat speech_psd;  // F x T reconstructed speech PSD estimate
    RealMat noise_psd;   // F x T reconstructed stage-noise PSD estimate
};

// One filtering stage: per frame, estimate speech/noise PSDs from the
// mixture periodogram via the coefficient solve against [U_s, U_v(stage)],
// then scale the complex frame by the parametric Wiener gain (noisy phase
// kept). Frames with an all-zero periodogram pass through with unit gain.
SpectralFrames enhance_stage(const SpectralFrames& M, const GmmModel& speech_model,
                             const GmmModel& noise_model,
                             const std::vector<int>& stage_components,
                             const EnhancerConfig& cfg, StageDiagnostics* diag = nullptr);
SpectralFrames enhance_stage_serial(const SpectralFrames& M, const GmmModel& speech_model,
                                    const GmmModel& noise_model,
                                    const std::vector<int>& stage_components,
                                    const EnhancerConfig& cfg, StageDiagnostics* diag = nullptr);

struct EnhanceOptions {
    bool faithful_restft = false;     // resynthesize + re-analyze between stages
    bool collect_diagnostics = false;
};

struct EnhanceResult {
    SpectralFrames output;                      // final stage output
    std::vector<SpectralFrames> stage_outputs;  // one entry per stage
    StagePlan plan;
    std::vector<StageDiagnostics> diagnostics;  // filled when requested
};

// Full multi-stage chain: stage i+1 filters the output of stage i. By
// default stages chain in the STFT domain; with faithful_restft the stage
// output is synthesized to a waveform and re-analyzed first.
EnhanceResult enhance(const SpectralFrames& M, const GmmModel& speech_model,
                      const GmmModel& noise_model, const EnhancerConfig& cfg,
                      const EnhanceOptions& opts = {});

}  // namespace gmmse
