#pragma once

#include "sdfm/common.hpp"
#include "sdfm/spectra.hpp"

#include <cstdint>
#include <utility>

namespace sdfm::synth {

// Panel generator settings. The noise scale is theta = inv_snr * p_true
// (inv_snr * 1 when p_true = 0 so the noise-only case stays generable).
struct SyntheticConfig {
    int N = 0;
    int T = 0;
    int p_true = 0;
    double inv_snr = 1.0;
    double rho = 0.0;    // AR(1) coefficient of the residual recursion
    double beta = 0.0;   // same-time neighbor weight
    int J = 0;           // neighbor range; rows clamp at the panel edges
    double sigma_weak = 1.0;  // std of the weak factor rows (1 = strong)
    int weak_count = 0;       // how many trailing factor rows are weak
    std::uint64_t seed = 0;

    double theta() const;
    void validate() const;
};

// What the generator actually drew: X = loadings * factors + sqrt(theta) * U.
struct GroundTruth {
    int p_true = 0;
    Matrix loadings;  // N x p
    Matrix factors;   // p x T
    Matrix residual_noise;  // U, unit variance per element
};

struct GeneratedPanel {
    spectra::ReturnPanel panel;
    GroundTruth truth;
};

// Draws v, L, F i.i.d. standard normal (trailing weak_count factor rows get
// std sigma_weak), builds e_it = rho * e_{i,t-1} + v_it + beta * sum of v_ht
// over h in [i-J, i-1] u [i+1, i+J] clamped to [1, N], discards a burn-in of
// 10 * ceil(1/(1-rho)) samples, and scales each row by
// sqrt((1-rho^2) / (1 + n_i beta^2)) where n_i is that row's neighbor count,
// so var(U_it) = 1 for every row including the clamped edge rows.
GeneratedPanel generate(const SyntheticConfig& config);

// Claim-1 demonstration pair: Y rows are AR(1) with b_i ~ Uniform[low, high]
// and innovation variance 1 - b_i^2; Z rows share the single coefficient
// b_bar. Both start from their exact stationary law, so every entry has unit
// variance.
std::pair<spectra::ReturnPanel, spectra::ReturnPanel> generate_meanfield_pair(
    int N, int T, double b_low, double b_high, double b_bar,
    std::uint64_t seed);

}  // namespace sdfm::synth
