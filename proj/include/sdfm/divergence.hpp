#pragma once

#include "sdfm/common.hpp"
#include "sdfm/spectra.hpp"

namespace sdfm::divergence {

// Strictly positive masses after zero-bin regularization:
// P~_i = alpha * P_i for P_i > 0, epsilon for P_i = 0, with
// alpha = 1 - (#zeros) * epsilon so the total stays 1.
struct RegularizedDensity {
    Vector masses;
    double epsilon_used = 0.0;
    double alpha = 1.0;
};

// Rejects epsilon * (#zero bins) >= 0.01 and all-zero densities.
RegularizedDensity regularize(const spectra::SpectralDensity& density,
                              double epsilon = 1e-8);

// Kullback-Leibler divergence sum p_i ln(p_i / q_i), natural log. Requires
// equal bin counts (grids must already agree).
double kl(const RegularizedDensity& p, const RegularizedDensity& q);

// Jensen-Shannon divergence on a shared grid: both inputs are regularized,
// then mixed, so js(p, q) == js(q, p) exactly and 0 <= js <= ln 2.
double js(const spectra::SpectralDensity& p, const spectra::SpectralDensity& q,
          double epsilon = 1e-8);

}  // namespace sdfm::divergence
