#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "gmmse/enhancer.hpp"
#include "test_util.hpp"

using namespace gmmse;

namespace {

// noise model whose ranking keys (weight * mean column sum) are exactly `keys`
GmmModel model_with_keys(const std::vector<double>& keys) {
    const int K = int(keys.size());
    GmmModel m;
    m.kind = ModelKind::Noise;
    m.weights.assign(K, 1.0 / K);
    m.means = RealMat(2, K);
    m.variances = RealMat(2, K);
    for (int k = 0; k < K; ++k) {
        const double colsum = keys[k] / m.weights[k];
        m.means(0, k) = colsum / 2.0;
        m.means(1, k) = colsum / 2.0;
        m.variances(0, k) = m.variances(1, k) = 1e-3;
    }
    m.sample_rate = 8000;
    m.fft_size = 0;
    return m;
}

GmmModel model_from_columns(const std::vector<std::vector<double>>& cols, ModelKind kind,
                            int fft_size) {
    const int K = int(cols.size());
    const int F = int(cols[0].size());
    GmmModel m;
    m.kind = kind;
    m.weights.assign(K, 1.0 / K);
    m.means = RealMat(F, K);
    m.variances = RealMat(F, K);
    for (int k = 0; k < K; ++k)
        for (int f = 0; f < F; ++f) {
            m.means(f, k) = cols[k][f];
            m.variances(f, k) = 1e-3;
        }
    m.sample_rate = 8000;
    m.fft_size = fft_size;
    return m;
}

RealMat random_prototypes(int F, int K, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    RealMat U(F, K);
    for (double& v : U.data) v = u(rng);
    return U;
}

// least squares through the normal equations, solved by Gaussian elimination
// with partial pivoting -- an oracle sharing nothing with the SVD path
std::vector<double> normal_equations_solve(const RealMat& U, const std::vector<double>& phi) {
    const int F = U.rows, K = U.cols;
    std::vector<std::vector<double>> A(K, std::vector<double>(K + 1, 0.0));
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
            double s = 0.0;
            for (int f = 0; f < F; ++f) s += U(f, i) * U(f, j);
            A[i][j] = s;
        }
        double b = 0.0;
        for (int f = 0; f < F; ++f) b += U(f, i) * phi[f];
        A[i][K] = b;
    }
    for (int c = 0; c < K; ++c) {
        int pivot = c;
        for (int r = c + 1; r < K; ++r)
            if (std::abs(A[r][c]) > std::abs(A[pivot][c])) pivot = r;
        std::swap(A[c], A[pivot]);
        for (int r = c + 1; r < K; ++r) {
            const double m = A[r][c] / A[c][c];
            for (int j = c; j <= K; ++j) A[r][j] -= m * A[c][j];
        }
    }
    std::vector<double> x(K);
    for (int c = K - 1; c >= 0; --c) {
        double s = A[c][K];
        for (int j = c + 1; j < K; ++j) s -= A[c][j] * x[j];
        x[c] = s / A[c][c];
    }
    return x;
}

RealMat stack(const RealMat& a, const RealMat& b) {
    RealMat out(a.rows, a.cols + b.cols);
    for (int k = 0; k < a.cols; ++k) std::copy(a.col(k), a.col(k) + a.rows, out.col(k));
    for (int k = 0; k < b.cols; ++k) std::copy(b.col(k), b.col(k) + b.rows, out.col(a.cols + k));
    return out;
}

// hand-built spectral frames over a tiny 8-point fft grid (5 bins)
SpectralFrames tiny_frames(const std::vector<std::vector<std::complex<double>>>& cols) {
    SpectralFrames S;
    S.config.window_length = 8;
    S.config.hop = 4;
    S.config.fft_size = 8;
    S.sample_rate = 8000;
    const int T = int(cols.size());
    S.original_length = size_t(T - 1) * 4 + 8;
    S.data = CplxMat(5, T);
    for (int t = 0; t < T; ++t)
        for (int f = 0; f < 5; ++f) S.data(f, t) = cols[t][f];
    return S;
}

EnhancerConfig basic_cfg(double beta, double gamma) {
    EnhancerConfig cfg;
    cfg.beta = beta;
    cfg.gamma = gamma;
    cfg.num_stages = 1;
    return cfg;
}

}  // namespace

TEST_CASE("stage planning splits by cumulative ranked energy") {
    EnhancerConfig cfg;
    cfg.num_stages = 2;
    cfg.stage_energy_fraction = 0.5;

    // keys 0.5, 0.3, 0.2: first stage takes just the dominant component
    const StagePlan p1 = plan_stages(model_with_keys({0.5, 0.3, 0.2}), cfg);
    REQUIRE(p1.num_stages() == 2);
    CHECK(p1.partitions[0] == std::vector<int>{0});
    CHECK(p1.partitions[1] == std::vector<int>{1, 2});
    CHECK(p1.ranking_keys[0] == doctest::Approx(0.5).epsilon(1e-12));

    // four equal keys: half of the components per stage
    const StagePlan p2 = plan_stages(model_with_keys({0.25, 0.25, 0.25, 0.25}), cfg);
    CHECK(p2.partitions[0] == std::vector<int>{0, 1});
    CHECK(p2.partitions[1] == std::vector<int>{2, 3});

    // ranking, not component order, decides the split
    const StagePlan p3 = plan_stages(model_with_keys({0.2, 0.5, 0.3}), cfg);
    CHECK(p3.partitions[0] == std::vector<int>{1});
    CHECK(p3.partitions[1] == std::vector<int>{0, 2});

    // recursive split over the remainder for three stages
    cfg.num_stages = 3;
    const StagePlan p4 = plan_stages(model_with_keys({0.4, 0.3, 0.2, 0.1}), cfg);
    CHECK(p4.partitions[0] == std::vector<int>{0, 1});
    CHECK(p4.partitions[1] == std::vector<int>{2});
    CHECK(p4.partitions[2] == std::vector<int>{3});
}

TEST_CASE("single-stage plan holds every component") {
    EnhancerConfig cfg;
    cfg.num_stages = 1;
    const StagePlan p = plan_stages(model_with_keys({0.1, 0.6, 0.3}), cfg);
    REQUIRE(p.num_stages() == 1);
    CHECK(p.partitions[0] == std::vector<int>{0, 1, 2});
}

TEST_CASE("more stages than components is rejected") {
    EnhancerConfig cfg;
    cfg.num_stages = 4;
    CHECK_THROWS_AS(plan_stages(model_with_keys({0.5, 0.5}), cfg), InvariantError);
}

TEST_CASE("enhancer config bounds are enforced") {
    EnhancerConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    auto broken = [](auto mutate) {
        EnhancerConfig c;
        mutate(c);
        CHECK_THROWS_AS(validate(c), InvariantError);
    };
    broken([](EnhancerConfig& c) { c.beta = -0.5; });
    broken([](EnhancerConfig& c) { c.gamma = 0.0; });
    broken([](EnhancerConfig& c) { c.num_stages = 0; });
    broken([](EnhancerConfig& c) { c.stage_energy_fraction = 0.0; });
    broken([](EnhancerConfig& c) { c.stage_energy_fraction = 1.5; });
    broken([](EnhancerConfig& c) { c.gain_floor = 1.0; });
    broken([](EnhancerConfig& c) { c.smoothing = 1.0; });
}

TEST_CASE("wiener gain closed-form values") {
    const std::vector<double> s = {1.0}, v = {1.0}, zero = {0.0};
    CHECK(std::abs(parametric_wiener_gain(s, v, basic_cfg(1.0, 1.0))[0] - 0.5) < 1e-15);
    CHECK(std::abs(parametric_wiener_gain(s, v, basic_cfg(2.0, 1.0))[0] - 1.0 / 3.0) < 1e-15);
    CHECK(std::abs(parametric_wiener_gain(s, zero, basic_cfg(1.0, 1.0))[0] - 1.0) < 1e-15);
    CHECK(std::abs(parametric_wiener_gain(s, v, basic_cfg(1.0, 2.0))[0] - 0.25) < 1e-15);
}

TEST_CASE("unit beta and gamma reduce to the plain wiener ratio bitwise") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> s(64), v(64);
    for (int i = 0; i < 64; ++i) {
        s[i] = u(rng);
        v[i] = u(rng);
    }
    const auto g = parametric_wiener_gain(s, v, basic_cfg(1.0, 1.0));
    for (int i = 0; i < 64; ++i) CHECK(g[i] == s[i] / (s[i] + v[i]));
}

TEST_CASE("gain stays within bounds and falls with noise") {
    EnhancerConfig cfg = basic_cfg(2.0, 1.5);
    cfg.gain_floor = 0.1;
    std::mt19937 rng(73);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> s = {u(rng)};
        const double v1 = u(rng);
        const double g1 = parametric_wiener_gain(s, {v1}, cfg)[0];
        const double g2 = parametric_wiener_gain(s, {v1 + u(rng)}, cfg)[0];
        CHECK(g1 >= cfg.gain_floor);
        CHECK(g1 <= 1.0);
        CHECK(g2 <= g1 + 1e-15);
    }
}

TEST_CASE("gain degenerate cases") {
    EnhancerConfig cfg = basic_cfg(1.5, 1.0);
    cfg.gain_floor = 0.05;
    // both psds zero: denominator vanishes, floor applies
    CHECK(parametric_wiener_gain({0.0}, {0.0}, cfg)[0] == 0.05);
    // beta zero: unit gain even at 0/0
    CHECK(parametric_wiener_gain({0.0}, {0.0}, basic_cfg(0.0, 1.0))[0] == 1.0);
    CHECK(parametric_wiener_gain({0.3}, {5.0}, basic_cfg(0.0, 3.0))[0] == 1.0);
}

TEST_CASE("raw coefficient solve matches the normal-equations oracle") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const RealMat U_s = random_prototypes(32, 3, 1000 + trial);
        const RealMat U_v = random_prototypes(32, 3, 2000 + trial);
        const CoefficientSolver solver(U_s, U_v);
        std::vector<double> phi(32);
        for (double& p : phi) p = u(rng);
        const auto raw = solver.solve_raw(phi.data(), 32);
        const auto want = normal_equations_solve(stack(U_s, U_v), phi);
        REQUIRE(raw.size() == want.size());
        for (size_t k = 0; k < raw.size(); ++k)
            CHECK(raw[k] == doctest::Approx(want[k]).epsilon(1e-8));
    }
}

TEST_CASE("consistent nonnegative mixtures are recovered exactly") {
    std::mt19937 rng(79);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    const RealMat U_s = random_prototypes(32, 3, 81);
    const RealMat U_v = random_prototypes(32, 3, 82);
    const CoefficientSolver solver(U_s, U_v);
    std::vector<double> alpha(6);
    for (double& a : alpha) a = u(rng);
    std::vector<double> phi(32, 0.0);
    const RealMat U = stack(U_s, U_v);
    for (int k = 0; k < 6; ++k)
        for (int f = 0; f < 32; ++f) phi[f] += alpha[k] * U(f, k);
    const CoefficientVector got = solver.solve(phi.data(), 32);
    for (int k = 0; k < 3; ++k) {
        CHECK(got.speech[k] == doctest::Approx(alpha[k]).epsilon(1e-6));
        CHECK(got.noise[k] == doctest::Approx(alpha[3 + k]).epsilon(1e-6));
    }
}

TEST_CASE("rectification zeroes negatives and rescales to the frame power") {
    // consistent 2x2 system with a negative exact solution
    RealMat U_s(2, 1), U_v(2, 1);
    U_s(0, 0) = 0.7;
    U_s(1, 0) = 0.3;
    U_v(0, 0) = 0.2;
    U_v(1, 0) = 0.8;
    const std::vector<double> phi = {1.9, 0.1};  // exactly 3*u_s - 1*u_v

    const CoefficientSolver solver(U_s, U_v);
    const auto raw = solver.solve_raw(phi.data(), 2);
    CHECK(raw[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(raw[1] == doctest::Approx(-1.0).epsilon(1e-10));

    const CoefficientVector c = solver.solve(phi.data(), 2);
    CHECK(c.speech[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(c.noise[0] == 0.0);

    // reconstructed total power equals the frame total
    const auto psds = reconstruct_psds(c, U_s, U_v);
    double total = 0.0;
    for (int f = 0; f < 2; ++f) total += psds.first[f] + psds.second[f];
    CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("rectified solutions preserve frame power across random instances") {
    std::mt19937 rng(83);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mixed_sign_seen = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const RealMat U_s = random_prototypes(16, 3, 3000 + trial);
        const RealMat U_v = random_prototypes(16, 3, 4000 + trial);
        const CoefficientSolver solver(U_s, U_v);
        std::vector<double> phi(16);
        double target = 0.0;
        for (double& p : phi) {
            p = u(rng);
            target += p;
        }
        const auto raw = solver.solve_raw(phi.data(), 16);
        if (std::any_of(raw.begin(), raw.end(), [](double a) { return a < 0.0; }))
            ++mixed_sign_seen;

        const CoefficientVector c = solver.solve(phi.data(), 16);
        validate(c);
        const auto psds = reconstruct_psds(c, U_s, U_v);
        double total = 0.0;
        for (int f = 0; f < 16; ++f) total += psds.first[f] + psds.second[f];
        const bool all_zero = std::all_of(c.speech.begin(), c.speech.end(),
                                          [](double a) { return a == 0.0; }) &&
                              std::all_of(c.noise.begin(), c.noise.end(),
                                          [](double a) { return a == 0.0; });
        if (!all_zero) CHECK(total == doctest::Approx(target).epsilon(1e-9));
    }
    CHECK(mixed_sign_seen > 0);  // the property must actually be exercised
}

TEST_CASE("zero frames solve to zero coefficients") {
    const RealMat U_s = random_prototypes(8, 2, 91);
    const RealMat U_v = random_prototypes(8, 2, 92);
    const std::vector<double> phi(8, 0.0);
    const CoefficientVector c = solve_coefficients(phi, U_s, U_v);
    for (double a : c.speech) CHECK(a == 0.0);
    for (double a : c.noise) CHECK(a == 0.0);
}

TEST_CASE("psd reconstruction is the weighted prototype sum") {
    const RealMat U_s = random_prototypes(6, 2, 95);
    const RealMat U_v = random_prototypes(6, 3, 96);

    CoefficientVector basis;
    basis.speech = {1.0, 0.0};
    basis.noise = {0.0, 0.0, 0.0};
    const auto unit = reconstruct_psds(basis, U_s, U_v);
    for (int f = 0; f < 6; ++f) {
        CHECK(unit.first[f] == U_s(f, 0));
        CHECK(unit.second[f] == 0.0);
    }

    CoefficientVector c;
    c.speech = {0.4, 1.2};
    c.noise = {0.1, 0.0, 2.5};
    const auto got = reconstruct_psds(c, U_s, U_v);
    for (int f = 0; f < 6; ++f) {
        double s = 0.0, v = 0.0;
        for (int k = 0; k < 2; ++k) s += c.speech[k] * U_s(f, k);
        for (int k = 0; k < 3; ++k) v += c.noise[k] * U_v(f, k);
        CHECK(got.first[f] == doctest::Approx(s).epsilon(1e-12));
        CHECK(got.second[f] == doctest::Approx(v).epsilon(1e-12));
    }

    CoefficientVector bad;
    bad.speech = {1.0};
    bad.noise = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(reconstruct_psds(bad, U_s, U_v), std::invalid_argument);
}

TEST_CASE("stage filtering keeps prototype-speech frames and floors prototype-noise frames") {
    // disjoint spectral support: speech lives in bins 0-1, noise in bins 3-4
    const GmmModel speech = model_from_columns({{0.5, 0.5, 0.0, 0.0, 0.0}}, ModelKind::Speech, 8);
    const GmmModel noise = model_from_columns({{0.0, 0.0, 0.0, 0.5, 0.5}}, ModelKind::Noise, 8);

    EnhancerConfig cfg = basic_cfg(2.0, 1.0);
    cfg.gain_floor = 0.1;

    const SpectralFrames speech_only = tiny_frames({{{0.8, 0.1}, {0.2, -0.5}, 0.0, 0.0, 0.0}});
    const SpectralFrames got_s = enhance_stage(speech_only, speech, noise, {0}, cfg);
    for (int f = 0; f < 5; ++f)
        CHECK(std::abs(got_s.data(f, 0) - speech_only.data(f, 0)) <=
              1e-12 * std::abs(speech_only.data(f, 0)) + 1e-15);

    const SpectralFrames noise_only = tiny_frames({{0.0, 0.0, 0.0, {0.6, -0.2}, {0.1, 0.9}}});
    const SpectralFrames got_v = enhance_stage(noise_only, speech, noise, {0}, cfg);
    for (int f = 3; f < 5; ++f)
        CHECK(std::abs(got_v.data(f, 0) - cfg.gain_floor * noise_only.data(f, 0)) <=
              1e-12 * std::abs(noise_only.data(f, 0)) + 1e-15);
}

TEST_CASE("stage output is the gain mask times the input, phase untouched") {
    const GmmModel speech = model_from_columns({{0.5, 0.5, 0.1, 0.05, 0.05},
                                                {0.1, 0.2, 0.5, 0.3, 0.1}},
                                               ModelKind::Speech, 8);
    const GmmModel noise = model_from_columns({{0.3, 0.3, 0.3, 0.3, 0.3},
                                               {0.05, 0.1, 0.2, 0.4, 0.6}},
                                              ModelKind::Noise, 8);
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<std::complex<double>>> cols(7);
    for (auto& c : cols) {
        c.resize(5);
        for (auto& z : c) z = {u(rng), u(rng)};
    }
    const SpectralFrames M = tiny_frames(cols);

    EnhancerConfig cfg = basic_cfg(1.3, 1.7);
    StageDiagnostics diag;
    const SpectralFrames out = enhance_stage(M, speech, noise, {0, 1}, cfg, &diag);

    for (int t = 0; t < 7; ++t)
        for (int f = 0; f < 5; ++f) {
            const double g = diag.gain.values(f, t);
            CHECK(g >= 0.0);
            CHECK(g <= 1.0);
            CHECK(out.data(f, t) == g * M.data(f, t));
            // gain is consistent with the reconstructed psd pair
            const auto expect = parametric_wiener_gain({diag.speech_psd(f, t)},
                                                       {diag.noise_psd(f, t)}, cfg);
            CHECK(g == expect[0]);
        }

    // per-frame energy never grows for beta >= 1, gamma >= 1, zero floor
    for (int t = 0; t < 7; ++t) {
        double before = 0.0, after = 0.0;
        for (int f = 0; f < 5; ++f) {
            before += std::norm(M.data(f, t));
            after += std::norm(out.data(f, t));
        }
        CHECK(after <= before + 1e-15);
    }
}

TEST_CASE("all-zero frames pass through with unit gain") {
    const GmmModel speech = model_from_columns({{0.5, 0.5, 0.1, 0.05, 0.05}},
                                               ModelKind::Speech, 8);
    const GmmModel noise = model_from_columns({{0.05, 0.1, 0.2, 0.4, 0.6}},
                                              ModelKind::Noise, 8);
    SpectralFrames M = tiny_frames({{{0.3, 0.1}, 0.2, 0.1, 0.4, 0.2},
                                    {0.0, 0.0, 0.0, 0.0, 0.0}});
    StageDiagnostics diag;
    const SpectralFrames out = enhance_stage(M, speech, noise, {0}, basic_cfg(2.0, 1.0), &diag);
    for (int f = 0; f < 5; ++f) {
        CHECK(out.data(f, 1) == std::complex<double>(0.0, 0.0));
        CHECK(diag.gain.values(f, 1) == 1.0);
    }
}

TEST_CASE("mismatched models are rejected") {
    const GmmModel speech = model_from_columns({{0.5, 0.5, 0.1, 0.05, 0.05}},
                                               ModelKind::Speech, 8);
    GmmModel noise = model_from_columns({{0.05, 0.1, 0.2, 0.4, 0.6}}, ModelKind::Noise, 8);
    const SpectralFrames M = tiny_frames({{0.1, 0.2, 0.3, 0.2, 0.1}});

    GmmModel wrong_dim = model_with_keys({0.5, 0.5});  // dim 2, not 5
    CHECK_THROWS_AS(enhance_stage(M, speech, wrong_dim, {0}, basic_cfg(2.0, 1.0)),
                    InvariantError);

    GmmModel wrong_rate = noise;
    wrong_rate.sample_rate = 16000;
    CHECK_THROWS_AS(enhance_stage(M, speech, wrong_rate, {0}, basic_cfg(2.0, 1.0)),
                    InvariantError);

    CHECK_THROWS_AS(enhance_stage(M, speech, noise, {}, basic_cfg(2.0, 1.0)), InvariantError);
}

TEST_CASE("multi-stage chain composes single stages") {
    const GmmModel speech = model_from_columns({{0.5, 0.3, 0.1, 0.05, 0.05},
                                                {0.1, 0.2, 0.5, 0.3, 0.1}},
                                               ModelKind::Speech, 8);
    const GmmModel noise = model_from_columns({{0.6, 0.3, 0.15, 0.1, 0.05},
                                               {0.05, 0.1, 0.2, 0.4, 0.6},
                                               {0.2, 0.2, 0.2, 0.2, 0.2}},
                                              ModelKind::Noise, 8);
    std::mt19937 rng(103);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<std::complex<double>>> cols(9);
    for (auto& c : cols) {
        c.resize(5);
        for (auto& z : c) z = {u(rng), u(rng)};
    }
    const SpectralFrames M = tiny_frames(cols);

    EnhancerConfig cfg;
    cfg.beta = 2.0;
    cfg.gamma = 1.0;
    cfg.num_stages = 2;

    const EnhanceResult res = enhance(M, speech, noise, cfg);
    REQUIRE(res.stage_outputs.size() == 2);

    const SpectralFrames s1 = enhance_stage(M, speech, noise, res.plan.partitions[0], cfg);
    const SpectralFrames s2 = enhance_stage(s1, speech, noise, res.plan.partitions[1], cfg);
    for (size_t i = 0; i < s2.data.data.size(); ++i) {
        CHECK(res.stage_outputs[0].data.data[i] == s1.data.data[i]);
        CHECK(res.output.data.data[i] == s2.data.data[i]);
    }

    // one stage in the chain equals the single stage applied to everything
    cfg.num_stages = 1;
    const EnhanceResult one = enhance(M, speech, noise, cfg);
    const SpectralFrames all = enhance_stage(M, speech, noise, {0, 1, 2}, cfg);
    for (size_t i = 0; i < all.data.data.size(); ++i)
        CHECK(one.output.data.data[i] == all.data.data[i]);

    // diagnostics arrive when requested
    cfg.num_stages = 2;
    EnhanceOptions opts;
    opts.collect_diagnostics = true;
    const EnhanceResult with_diag = enhance(M, speech, noise, cfg, opts);
    REQUIRE(with_diag.diagnostics.size() == 2);
    CHECK(with_diag.diagnostics[0].gain.values.cols == 9);
    CHECK(with_diag.diagnostics[1].gain.values.rows == 5);
}

TEST_CASE("parallel stage filtering is bit-identical to the serial reference") {
    const GmmModel speech = model_from_columns({{0.5, 0.3, 0.1, 0.05, 0.05},
                                                {0.1, 0.2, 0.5, 0.3, 0.1}},
                                               ModelKind::Speech, 8);
    const GmmModel noise = model_from_columns({{0.6, 0.3, 0.15, 0.1, 0.05},
                                               {0.05, 0.1, 0.2, 0.4, 0.6}},
                                              ModelKind::Noise, 8);
    std::mt19937 rng(107);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<std::complex<double>>> cols(64);
    for (auto& c : cols) {
        c.resize(5);
        for (auto& z : c) z = {u(rng), u(rng)};
    }
    const SpectralFrames M = tiny_frames(cols);
    const EnhancerConfig cfg = basic_cfg(2.0, 1.0);
    const SpectralFrames a = enhance_stage(M, speech, noise, {0, 1}, cfg);
    const SpectralFrames b = enhance_stage_serial(M, speech, noise, {0, 1}, cfg);
    for (size_t i = 0; i < a.data.data.size(); ++i) CHECK(a.data.data[i] == b.data.data[i]);
}
