#pragma once

#include <string>
#include <vector>

#include "gmmse/core.hpp"
#include "gmmse/stft.hpp"

namespace gmmse {

enum class ModelKind { Speech, Noise, Mixture };
enum class NormalizationMode { PerFrame, Global };

std::string to_string(ModelKind k);
std::string to_string(NormalizationMode m);
ModelKind model_kind_from_string(const std::string& s);
NormalizationMode normalization_from_string(const std::string& s);

// Diagonal-covariance Gaussian mixture over normalized PSD frames.
// Means and variances are stored one component per column (F x K).
struct GmmModel {
    std::vector<double> weights;
    RealMat means;
    RealMat variances;
    ModelKind kind = ModelKind::Speech;
    NormalizationMode normalization = NormalizationMode::PerFrame;
    int sample_rate = 0;
    int fft_size = 0;

    int num_components() const { return int(weights.size()); }
    int dim() const { return means.rows; }
};

void validate(const GmmModel& m);

struct TrainingOptions {
    int num_components = 1;
    int max_iterations = 200;
    double tolerance = 1e-6;  // relative log-likelihood change
    unsigned seed = 0;
    double variance_floor = 1e-6;
};

struct TrainingReport {
    std::vector<double> loglik_history;
    int iterations = 0;
    bool converged = false;
    int effective_components = 0;  // < requested when input is degenerate
};

// Scales PSD frames for training. PerFrame: every column sums to one
// (all-zero columns are dropped, count reported). Global: one scalar so the
// average column sum is one.
PsdSequence normalize_psd_frames(const PsdSequence& P, NormalizationMode mode,
                                 int* dropped = nullptr);

// EM fit with k-means++ seeding and one k-means refinement pass. Reduces the
// component count with a warning when the input has fewer distinct frames
// than requested components.
GmmModel fit_gmm(const PsdSequence& P, const TrainingOptions& opts,
                 TrainingReport* report = nullptr);

// Log of the mixture density at one F-dimensional frame, max-shifted
// log-sum-exp over components.
double log_density(const GmmModel& m, const double* frame, int dim);
double log_density(const GmmModel& m, const std::vector<double>& frame);

void save_model(const GmmModel& m, const std::string& path);
GmmModel load_model(const std::string& path);

// Columns are component means in component order.
RealMat mean_matrix(const GmmModel& m);
RealMat select_columns(const RealMat& m, const std::vector<int>& indices);

namespace detail {

// One E-step: fills responsibilities (K x T) and returns the data
// log-likelihood. Parallel over frames; per-frame results and the
// fixed-order likelihood sum are bit-identical to the serial variant.
double em_estep(const GmmModel& m, const PsdSequence& P, RealMat& resp);
double em_estep_serial(const GmmModel& m, const PsdSequence& P, RealMat& resp);

// M-step sufficient statistics: weight mass per component plus weighted sums
// of frames and squared frames (F x K each). Parallel over components with a
// fixed frame order, bit-identical to the serial variant.
void em_accumulate(const PsdSequence& P, const RealMat& resp, std::vector<double>& mass,
                   RealMat& sum_x, RealMat& sum_x2);
void em_accumulate_serial(const PsdSequence& P, const RealMat& resp, std::vector<double>& mass,
                          RealMat& sum_x, RealMat& sum_x2);

}  // namespace detail

}  // namespace gmmse
