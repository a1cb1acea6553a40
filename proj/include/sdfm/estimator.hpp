#pragma once

#include "sdfm/common.hpp"
#include "sdfm/spectra.hpp"

namespace sdfm::estimator {

// Exhaustive search domain: p in 0..p_max, b in {0, b_step, ..., b_max}.
struct SearchGrid {
    int p_max = 20;
    double b_max = 0.95;
    double b_step = 0.01;

    std::vector<double> b_values() const;
    void validate() const;
};

// Knobs shared by estimate and divergence_at. A surface computed in parallel
// is bit-identical to the sequential one (cells are independent).
struct EstimatorConfig {
    int bins = 100;
    double epsilon = 1e-3;      // Sokhotsky broadening for model densities
    double js_epsilon = 1e-8;   // zero-bin regularization
    bool c_excludes_removed = false;  // aspect ratio (N-p)/T instead of N/T
    bool coarse_to_fine = false;      // b scanned at 10x step, then refined
    int threads = 1;
};

// Argmin over the divergence surface. Unvisited cells (coarse-to-fine mode
// only) hold +infinity. Ties break to the smallest p, then the smallest b.
struct EstimationResult {
    int p_hat = 0;
    double b_hat = 0.0;
    Matrix divergence_surface;  // (p_max+1) x |b_values|
    double min_divergence = 0.0;
    double explained_variance_at_p_hat = 0.0;
    double variance_per_factor = 0.0;
};

// For each p: residual of the top-p components with rows re-standardized,
// eigenvalues histogrammed on 100 bins over [0, 1.1 * max eigenvalue] with
// the p zero modes dropped; for each b: the model density on that same grid;
// each cell is the Jensen-Shannon divergence of the pair.
EstimationResult estimate(const spectra::ReturnPanel& panel,
                          const SearchGrid& grid,
                          const EstimatorConfig& config = {});

// One cell of the surface; equals the corresponding estimate() entry
// bit-for-bit under the same config.
double divergence_at(const spectra::ReturnPanel& panel, int p, double b,
                     const EstimatorConfig& config = {});

}  // namespace sdfm::estimator
