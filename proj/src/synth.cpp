#include "sdfm/synth.hpp"

#include "sdfm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sdfm::synth {

namespace {

// Keystream layout: one seed, fixed stream ids per draw purpose.
constexpr std::uint64_t kStreamNoise = 0;
constexpr std::uint64_t kStreamLoadings = 1;
constexpr std::uint64_t kStreamFactors = 2;
constexpr std::uint64_t kStreamMeanfieldCoeffs = 0;
constexpr std::uint64_t kStreamMeanfieldY = 1;
constexpr std::uint64_t kStreamMeanfieldZ = 2;

std::vector<std::string> default_ids(int n) {
    std::vector<std::string> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = "s" + std::to_string(i + 1);
    return ids;
}

Matrix draw_normal_matrix(std::uint64_t seed, std::uint64_t stream, int rows,
                          int cols) {
    rng::NormalStream normals(seed, stream);
    Matrix m(rows, cols);
    // Row-major draw order, part of the reproducibility protocol.
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = normals.next();
    return m;
}

// AR(1) panel with row coefficients b[i], innovation std sqrt(1-b[i]^2),
// initialized from the stationary unit-variance law.
Matrix stationary_ar1(const std::vector<double>& b, int T, std::uint64_t seed,
                      std::uint64_t stream) {
    const int n = static_cast<int>(b.size());
    Matrix z = draw_normal_matrix(seed, stream, n, T);
    Matrix y(n, T);
    for (int i = 0; i < n; ++i) {
        const double scale = std::sqrt(1.0 - b[i] * b[i]);
        y(i, 0) = z(i, 0);
        for (int t = 1; t < T; ++t)
            y(i, t) = b[i] * y(i, t - 1) + scale * z(i, t);
    }
    return y;
}

}  // namespace

double SyntheticConfig::theta() const {
    return inv_snr * static_cast<double>(std::max(p_true, 1));
}

void SyntheticConfig::validate() const {
    if (N < 2 || T < 2) throw error("generator requires N >= 2 and T >= 2");
    if (p_true < 0) throw error("generator requires p_true >= 0");
    if (p_true >= std::min(N, T))
        throw error("generator requires p_true < min(N, T)");
    if (!(inv_snr > 0.0)) throw error("generator requires inv_snr > 0");
    if (!(std::abs(rho) < 1.0)) throw error("generator requires |rho| < 1");
    if (!(std::abs(beta) <= 1.0)) throw error("generator requires |beta| <= 1");
    if (J < 0 || J >= N) throw error("generator requires 0 <= J < N");
    if (!(sigma_weak > 0.0)) throw error("generator requires sigma_weak > 0");
    if (weak_count < 0 || weak_count > p_true)
        throw error("generator requires 0 <= weak_count <= p_true");
}

GeneratedPanel generate(const SyntheticConfig& config) {
    config.validate();
    const int n = config.N, t = config.T, p = config.p_true;
    const int burn =
        10 * static_cast<int>(std::ceil(1.0 / (1.0 - config.rho)));
    const int total = t + burn;

    const Matrix v =
        draw_normal_matrix(config.seed, kStreamNoise, n, total);

    // Same-time neighbor mixing with prefix sums per column; rows at the
    // panel edge keep their clamped, smaller neighborhoods.
    Matrix mixed(n, total);
    if (config.beta == 0.0 || config.J == 0) {
        mixed = v;
    } else {
        std::vector<double> prefix(n + 1);
        for (int s = 0; s < total; ++s) {
            prefix[0] = 0.0;
            for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v(i, s);
            for (int i = 0; i < n; ++i) {
                const int lo = std::max(i - config.J, 0);
                const int hi = std::min(i + config.J, n - 1);
                const double window = prefix[hi + 1] - prefix[lo];
                mixed(i, s) = v(i, s) + config.beta * (window - v(i, s));
            }
        }
    }

    Matrix e(n, total);
    for (int i = 0; i < n; ++i) {
        e(i, 0) = mixed(i, 0);
        for (int s = 1; s < total; ++s)
            e(i, s) = config.rho * e(i, s - 1) + mixed(i, s);
    }

    Matrix u(n, t);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(i - config.J, 0);
        const int hi = std::min(i + config.J, n - 1);
        const int neighbors = (hi - lo + 1) - 1;
        const double scale =
            std::sqrt((1.0 - config.rho * config.rho) /
                      (1.0 + neighbors * config.beta * config.beta));
        u.row(i) = scale * e.row(i).tail(t);
    }

    GeneratedPanel out;
    out.truth.p_true = p;
    out.truth.residual_noise = u;
    const double noise_scale = std::sqrt(config.theta());
    if (p > 0) {
        out.truth.loadings =
            draw_normal_matrix(config.seed, kStreamLoadings, n, p);
        Matrix f = draw_normal_matrix(config.seed, kStreamFactors, p, t);
        for (int j = p - config.weak_count; j < p; ++j)
            f.row(j) *= config.sigma_weak;
        out.truth.factors = f;
        out.panel.values = out.truth.loadings * f + noise_scale * u;
    } else {
        out.truth.loadings = Matrix::Zero(n, 0);
        out.truth.factors = Matrix::Zero(0, t);
        out.panel.values = noise_scale * u;
    }
    out.panel.series_ids = default_ids(n);
    out.panel.normalized = false;
    return out;
}

std::pair<spectra::ReturnPanel, spectra::ReturnPanel> generate_meanfield_pair(
    int N, int T, double b_low, double b_high, double b_bar,
    std::uint64_t seed) {
    if (N < 2 || T < 2) throw error("generator requires N >= 2 and T >= 2");
    if (!(0.0 <= b_low && b_low <= b_high && b_high < 1.0))
        throw error("meanfield requires 0 <= b_low <= b_high < 1");
    if (!(std::abs(b_bar) < 1.0)) throw error("meanfield requires |b_bar| < 1");

    std::vector<double> coeffs(N);
    rng::UniformStream uniforms(seed, kStreamMeanfieldCoeffs);
    for (int i = 0; i < N; ++i)
        coeffs[i] = b_low + (b_high - b_low) * uniforms.next();

    spectra::ReturnPanel y;
    y.values = stationary_ar1(coeffs, T, seed, kStreamMeanfieldY);
    y.series_ids = default_ids(N);

    spectra::ReturnPanel z;
    z.values = stationary_ar1(std::vector<double>(N, b_bar), T, seed,
                              kStreamMeanfieldZ);
    z.series_ids = default_ids(N);
    return {std::move(y), std::move(z)};
}

}  // namespace sdfm::synth
