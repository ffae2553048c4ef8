#include "gmmse/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include <json.hpp>

namespace gmmse {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Speech: return "speech";
        case ModelKind::Noise: return "noise";
        case ModelKind::Mixture: return "mixture";
    }
    return "speech";
}

std::string to_string(NormalizationMode m) {
    return m == NormalizationMode::PerFrame ? "per-frame" : "global";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "speech") return ModelKind::Speech;
    if (s == "noise") return ModelKind::Noise;
    if (s == "mixture") return ModelKind::Mixture;
    throw DataError("unknown model kind: " + s);
}

NormalizationMode normalization_from_string(const std::string& s) {
    if (s == "per-frame") return NormalizationMode::PerFrame;
    if (s == "global") return NormalizationMode::Global;
    throw DataError("unknown normalization mode: " + s);
}

void validate(const GmmModel& m) {
    const int K = m.num_components();
    const int F = m.dim();
    if (K < 1) throw InvariantError("GmmModel: no components");
    if (m.means.rows != F || m.means.cols != K || m.variances.rows != F || m.variances.cols != K)
        throw InvariantError("GmmModel: inconsistent dimensions");
    if (m.fft_size > 0 && F != m.fft_size / 2 + 1)
        throw InvariantError("GmmModel: dim does not match fft_size/2+1");
    double wsum = 0.0;
    for (double w : m.weights) {
        if (!(w >= 0.0)) throw InvariantError("GmmModel: negative or NaN weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw InvariantError("GmmModel: weights do not sum to 1");
    for (double v : m.means.data)
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvariantError("GmmModel: invalid mean entry");
    for (double v : m.variances.data)
        if (!(v > 0.0) || !std::isfinite(v)) throw InvariantError("GmmModel: non-positive variance");
}

PsdSequence normalize_psd_frames(const PsdSequence& P, NormalizationMode mode, int* dropped) {
    const int F = P.num_bins(), T = P.num_frames();
    if (T == 0 || F == 0) throw DataError("normalize_psd_frames: empty input");
    if (dropped) *dropped = 0;

    PsdSequence out;
    if (mode == NormalizationMode::PerFrame) {
        std::vector<int> keep;
        keep.reserve(T);
        for (int t = 0; t < T; ++t) {
            double s = 0.0;
            const double* c = P.data.col(t);
            for (int f = 0; f < F; ++f) s += c[f];
            if (s > 0.0) keep.push_back(t);
        }
        if (dropped) *dropped = T - int(keep.size());
        if (keep.empty()) throw DataError("normalize_psd_frames: all frames are silent");
        out.data = RealMat(F, int(keep.size()));
        for (size_t j = 0; j < keep.size(); ++j) {
            const double* src = P.data.col(keep[j]);
            double s = 0.0;
            for (int f = 0; f < F; ++f) s += src[f];
            double* dst = out.data.col(int(j));
            for (int f = 0; f < F; ++f) dst[f] = src[f] / s;
        }
    } else {
        double total = 0.0;
        for (double v : P.data.data) total += v;
        const double mean_energy = total / T;
        if (mean_energy <= 0.0) throw DataError("normalize_psd_frames: zero corpus energy");
        out.data = RealMat(F, T);
        for (size_t i = 0; i < P.data.data.size(); ++i) out.data.data[i] = P.data.data[i] / mean_energy;
    }
    return out;
}

namespace {

double sq_dist(const double* a, const double* b, int n) {
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

int count_distinct_frames(const PsdSequence& P) {
    const int F = P.num_bins(), T = P.num_frames();
    std::set<std::vector<double>> seen;
    for (int t = 0; t < T; ++t) {
        const double* c = P.data.col(t);
        seen.insert(std::vector<double>(c, c + F));
        if (int(seen.size()) >= T) break;
    }
    return int(seen.size());
}

// k-means++ seeds followed by one assignment/update pass
void kmeans_init(const PsdSequence& P, int K, std::mt19937& rng, RealMat& means,
                 RealMat& variances, std::vector<double>& weights, double var_floor) {
    const int F = P.num_bins(), T = P.num_frames();
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<int> seed_idx;
    seed_idx.push_back(int(unif(rng) * T) % T);
    std::vector<double> d2(T);
    for (int t = 0; t < T; ++t) d2[t] = sq_dist(P.data.col(t), P.data.col(seed_idx[0]), F);

    while (int(seed_idx.size()) < K) {
        double total = 0.0;
        for (double d : d2) total += d;
        int pick;
        if (total <= 0.0) {
            pick = int(unif(rng) * T) % T;
        } else {
            // inverse-CDF sample proportional to squared distance
            const double r = unif(rng) * total;
            double cum = 0.0;
            pick = T - 1;
            for (int t = 0; t < T; ++t) {
                cum += d2[t];
                if (cum >= r) {
                    pick = t;
                    break;
                }
            }
        }
        seed_idx.push_back(pick);
        for (int t = 0; t < T; ++t)
            d2[t] = std::min(d2[t], sq_dist(P.data.col(t), P.data.col(pick), F));
    }

    means = RealMat(F, K);
    for (int k = 0; k < K; ++k) {
        const double* src = P.data.col(seed_idx[k]);
        double* dst = means.col(k);
        for (int f = 0; f < F; ++f) dst[f] = src[f];
    }

    // one refinement pass: assign, then recompute means/variances per cluster
    std::vector<int> assign(T);
    for (int t = 0; t < T; ++t) {
        int best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (int k = 0; k < K; ++k) {
            const double d = sq_dist(P.data.col(t), means.col(k), F);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        assign[t] = best;
    }

    RealMat sum(F, K), sum2(F, K);
    std::vector<int> counts(K, 0);
    for (int t = 0; t < T; ++t) {
        const int k = assign[t];
        ++counts[k];
        const double* x = P.data.col(t);
        double* s = sum.col(k);
        double* s2 = sum2.col(k);
        for (int f = 0; f < F; ++f) {
            s[f] += x[f];
            s2[f] += x[f] * x[f];
        }
    }

    variances = RealMat(F, K);
    weights.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
        weights[k] = counts[k] > 0 ? double(counts[k]) / T : 1.0 / T;
        if (counts[k] > 0) {
            double* mu = means.col(k);
            double* var = variances.col(k);
            const double* s = sum.col(k);
            const double* s2 = sum2.col(k);
            for (int f = 0; f < F; ++f) {
                mu[f] = s[f] / counts[k];
                var[f] = std::max(s2[f] / counts[k] - mu[f] * mu[f], var_floor);
            }
        } else {
            double* var = variances.col(k);
            for (int f = 0; f < F; ++f) var[f] = var_floor;
        }
    }
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (double& w : weights) w /= wsum;
}

struct ComponentCache {
    // log C_k - 0.5 * sum_f log(2 pi var_kf), and elementwise inverse variances
    std::vector<double> log_norm;
    RealMat inv_var;
};

ComponentCache build_cache(const GmmModel& m) {
    const int K = m.num_components(), F = m.dim();
    ComponentCache c;
    c.log_norm.resize(K);
    c.inv_var = RealMat(F, K);
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        const double* var = m.variances.col(k);
        double* iv = c.inv_var.col(k);
        for (int f = 0; f < F; ++f) {
            s += std::log(2.0 * kPi * var[f]);
            iv[f] = 1.0 / var[f];
        }
        const double logw = m.weights[k] > 0.0 ? std::log(m.weights[k])
                                               : -std::numeric_limits<double>::infinity();
        c.log_norm[k] = logw - 0.5 * s;
    }
    return c;
}

// responsibilities and log-sum-exp for one frame
double estep_one_frame(const GmmModel& m, const ComponentCache& c, const double* x,
                       double* resp_col) {
    const int K = m.num_components(), F = m.dim();
    double max_lp = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
        const double* mu = m.means.col(k);
        const double* iv = c.inv_var.col(k);
        double quad = 0.0;
        for (int f = 0; f < F; ++f) {
            const double d = x[f] - mu[f];
            quad += d * d * iv[f];
        }
        const double lp = c.log_norm[k] - 0.5 * quad;
        resp_col[k] = lp;
        if (lp > max_lp) max_lp = lp;
    }
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += std::exp(resp_col[k] - max_lp);
    const double lse = max_lp + std::log(sum);
    for (int k = 0; k < K; ++k) resp_col[k] = std::exp(resp_col[k] - lse);
    return lse;
}

double estep_impl(const GmmModel& m, const PsdSequence& P, RealMat& resp, bool parallel) {
    const int K = m.num_components(), T = P.num_frames();
    if (P.num_bins() != m.dim()) throw InvariantError("em_estep: dimension mismatch");
    resp = RealMat(K, T);
    const ComponentCache cache = build_cache(m);
    std::vector<double> frame_ll(T);

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < T; ++t)
            frame_ll[t] = estep_one_frame(m, cache, P.data.col(t), resp.col(t));
    } else {
        for (int t = 0; t < T; ++t)
            frame_ll[t] = estep_one_frame(m, cache, P.data.col(t), resp.col(t));
    }

    double ll = 0.0;
    for (int t = 0; t < T; ++t) ll += frame_ll[t];  // fixed order
    return ll;
}

void accumulate_impl(const PsdSequence& P, const RealMat& resp, std::vector<double>& mass,
                     RealMat& sum_x, RealMat& sum_x2, bool parallel) {
    const int F = P.num_bins(), T = P.num_frames(), K = resp.rows;
    mass.assign(K, 0.0);
    for (int t = 0; t < T; ++t) {
        const double* r = resp.col(t);
        for (int k = 0; k < K; ++k) mass[k] += r[k];
    }
    sum_x = RealMat(F, K);
    sum_x2 = RealMat(F, K);
    auto accumulate_component = [&](int k) {
        double* sx = sum_x.col(k);
        double* sx2 = sum_x2.col(k);
        for (int t = 0; t < T; ++t) {
            const double r = resp(k, t);
            const double* x = P.data.col(t);
            for (int f = 0; f < F; ++f) {
                sx[f] += r * x[f];
                sx2[f] += r * x[f] * x[f];
            }
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < K; ++k) accumulate_component(k);
    } else {
        for (int k = 0; k < K; ++k) accumulate_component(k);
    }
}

}  // namespace

namespace detail {

double em_estep(const GmmModel& m, const PsdSequence& P, RealMat& resp) {
    return estep_impl(m, P, resp, true);
}
double em_estep_serial(const GmmModel& m, const PsdSequence& P, RealMat& resp) {
    return estep_impl(m, P, resp, false);
}
void em_accumulate(const PsdSequence& P, const RealMat& resp, std::vector<double>& mass,
                   RealMat& sum_x, RealMat& sum_x2) {
    accumulate_impl(P, resp, mass, sum_x, sum_x2, true);
}
void em_accumulate_serial(const PsdSequence& P, const RealMat& resp, std::vector<double>& mass,
                          RealMat& sum_x, RealMat& sum_x2) {
    accumulate_impl(P, resp, mass, sum_x, sum_x2, false);
}

}  // namespace detail

GmmModel fit_gmm(const PsdSequence& P, const TrainingOptions& opts, TrainingReport* report) {
    const int F = P.num_bins(), T = P.num_frames();
    if (opts.num_components < 1) throw std::invalid_argument("fit_gmm: num_components >= 1");
    if (opts.tolerance <= 0.0) throw std::invalid_argument("fit_gmm: tolerance > 0");
    if (opts.variance_floor <= 0.0) throw std::invalid_argument("fit_gmm: variance_floor > 0");
    if (T < opts.num_components) throw DataError("fit_gmm: fewer frames than components");

    int K = opts.num_components;
    const int distinct = count_distinct_frames(P);
    if (distinct < K) {
        std::fprintf(stderr, "fit_gmm: %d distinct frames < %d components, reducing to %d\n",
                     distinct, K, distinct);
        K = distinct;
    }

    std::mt19937 rng(opts.seed);
    GmmModel m;
    m.kind = ModelKind::Speech;
    m.normalization = NormalizationMode::PerFrame;
    kmeans_init(P, K, rng, m.means, m.variances, m.weights, opts.variance_floor);

    TrainingReport local_report;
    TrainingReport& rep = report ? *report : local_report;
    rep.loglik_history.clear();
    rep.converged = false;
    rep.effective_components = K;

    RealMat resp;
    double prev_ll = -std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const double ll = detail::em_estep(m, P, resp);
        if (!std::isfinite(ll)) throw InvariantError("fit_gmm: non-finite log-likelihood");
        rep.loglik_history.push_back(ll);

        if (iter > 0) {
            const double rel = std::abs(ll - prev_ll) / std::max(std::abs(prev_ll), 1e-30);
            if (rel < opts.tolerance) {
                rep.converged = true;
                ++iter;
                break;
            }
        }
        prev_ll = ll;

        std::vector<double> mass;
        RealMat sum_x, sum_x2;
        detail::em_accumulate(P, resp, mass, sum_x, sum_x2);

        for (int k = 0; k < K; ++k) {
            if (mass[k] < 1e-10 * T) {
                // empty-component rescue: re-seed from the highest-variance
                // component's farthest frame
                int big = 0;
                double big_var = -1.0;
                for (int j = 0; j < K; ++j) {
                    double tv = 0.0;
                    const double* var = m.variances.col(j);
                    for (int f = 0; f < F; ++f) tv += var[f];
                    if (tv > big_var) {
                        big_var = tv;
                        big = j;
                    }
                }
                int far_t = 0;
                double far_d = -1.0;
                for (int t = 0; t < T; ++t) {
                    const double d = sq_dist(P.data.col(t), m.means.col(big), F);
                    if (d > far_d) {
                        far_d = d;
                        far_t = t;
                    }
                }
                const double* x = P.data.col(far_t);
                double* mu = m.means.col(k);
                double* var = m.variances.col(k);
                const double* bvar = m.variances.col(big);
                for (int f = 0; f < F; ++f) {
                    mu[f] = x[f];
                    var[f] = std::max(bvar[f], opts.variance_floor);
                }
                m.weights[k] = m.weights[big] / 2.0;
                m.weights[big] /= 2.0;
                continue;
            }
            m.weights[k] = mass[k] / T;
            double* mu = m.means.col(k);
            double* var = m.variances.col(k);
            const double* sx = sum_x.col(k);
            const double* sx2 = sum_x2.col(k);
            for (int f = 0; f < F; ++f) {
                mu[f] = sx[f] / mass[k];
                var[f] = std::max(sx2[f] / mass[k] - mu[f] * mu[f], opts.variance_floor);
            }
        }
        double wsum = 0.0;
        for (double w : m.weights) wsum += w;
        for (double& w : m.weights) w /= wsum;
    }
    rep.iterations = iter;
    validate(m);
    return m;
}

double log_density(const GmmModel& m, const double* frame, int dim) {
    if (dim != m.dim()) throw std::invalid_argument("log_density: dimension mismatch");
    const ComponentCache cache = build_cache(m);
    std::vector<double> scratch(m.num_components());
    return estep_one_frame(m, cache, frame, scratch.data());
}

double log_density(const GmmModel& m, const std::vector<double>& frame) {
    return log_density(m, frame.data(), int(frame.size()));
}

namespace {
constexpr int kModelVersion = 1;
}

void save_model(const GmmModel& m, const std::string& path) {
    validate(m);
    const int K = m.num_components(), F = m.dim();
    nlohmann::json j;
    j["version"] = kModelVersion;
    j["kind"] = to_string(m.kind);
    j["sample_rate"] = m.sample_rate;
    j["fft_size"] = m.fft_size;
    j["normalization"] = to_string(m.normalization);
    j["weights"] = m.weights;
    auto col_to_vec = [F](const RealMat& mat, int k) {
        return std::vector<double>(mat.col(k), mat.col(k) + F);
    };
    nlohmann::json means = nlohmann::json::array(), vars = nlohmann::json::array();
    for (int k = 0; k < K; ++k) {
        means.push_back(col_to_vec(m.means, k));
        vars.push_back(col_to_vec(m.variances, k));
    }
    j["means"] = std::move(means);
    j["variances"] = std::move(vars);

    std::ofstream f(path);
    if (!f) throw DataError("cannot write model file: " + path);
    f << j.dump(2) << "\n";
}

GmmModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed model file " + path + ": " + e.what());
    }
    try {
        const int version = j.at("version").get<int>();
        if (version != kModelVersion)
            throw DataError("model version mismatch in " + path + ": got " +
                            std::to_string(version) + ", expected " + std::to_string(kModelVersion));
        GmmModel m;
        m.kind = model_kind_from_string(j.at("kind").get<std::string>());
        m.sample_rate = j.at("sample_rate").get<int>();
        m.fft_size = j.at("fft_size").get<int>();
        m.normalization = normalization_from_string(j.at("normalization").get<std::string>());
        m.weights = j.at("weights").get<std::vector<double>>();
        const auto means = j.at("means").get<std::vector<std::vector<double>>>();
        const auto vars = j.at("variances").get<std::vector<std::vector<double>>>();
        const int K = int(m.weights.size());
        if (int(means.size()) != K || int(vars.size()) != K || K == 0 || means[0].empty())
            throw DataError("model file " + path + ": inconsistent shapes");
        const int F = int(means[0].size());
        m.means = RealMat(F, K);
        m.variances = RealMat(F, K);
        for (int k = 0; k < K; ++k) {
            if (int(means[k].size()) != F || int(vars[k].size()) != F)
                throw DataError("model file " + path + ": ragged component vectors");
            std::copy(means[k].begin(), means[k].end(), m.means.col(k));
            std::copy(vars[k].begin(), vars[k].end(), m.variances.col(k));
        }
        try {
            validate(m);
        } catch (const InvariantError& e) {
            throw DataError("model file " + path + " fails validation: " + e.what());
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file " + path + " missing fields: " + e.what());
    }
}

RealMat mean_matrix(const GmmModel& m) { return m.means; }

RealMat select_columns(const RealMat& m, const std::vector<int>& indices) {
    RealMat out(m.rows, int(indices.size()));
    for (size_t j = 0; j < indices.size(); ++j) {
        const int k = indices[j];
        if (k < 0 || k >= m.cols) throw std::invalid_argument("select_columns: index out of range");
        std::copy(m.col(k), m.col(k) + m.rows, out.col(int(j)));
    }
    return out;
}

}  // namespace gmmse
