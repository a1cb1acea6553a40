#pragma once

#include "sdfm/common.hpp"

#include <string>
#include <vector>

namespace sdfm::spectra {

// N x T data panel, one series per row. `normalized` asserts every row has
// sample mean 0 and sample variance 1 (1/T convention).
struct ReturnPanel {
    Matrix values;
    std::vector<std::string> series_ids;
    bool normalized = false;

    Index n() const { return values.rows(); }
    Index t() const { return values.cols(); }
};

// Panel split into top-p principal components and their residual.
// residuals + loadings * factors reproduces the input panel; loadings columns
// are orthonormal; explained_variance holds the top-p covariance eigenvalues
// in descending order.
struct ResidualSet {
    Matrix residuals;
    int p = 0;
    Matrix loadings;  // N x p
    Matrix factors;   // p x T
    Vector explained_variance;
};

// Histogram density on a shared grid: K+1 ascending edges, K masses summing
// to 1.
struct SpectralDensity {
    Vector bin_edges;
    Vector masses;

    Index bins() const { return masses.size(); }
};

// Demeans and scales every row to unit sample variance. Panels already
// flagged normalized pass through unchanged. Rows with zero variance are
// rejected with the offending series id.
ReturnPanel normalize_panel(const ReturnPanel& panel);

// C = (1/T) U U^T for a normalized panel.
Matrix covariance(const ReturnPanel& panel);

// Removes the top-p principal components of the N x N covariance.
// Requires 0 <= p < min(N, T) and a normalized panel; p = 0 returns the panel
// as its own residual.
ResidualSet pca_residuals(const ReturnPanel& panel, int p);

// Histograms eigenvalues after dropping the `drop_smallest` smallest (the
// numerically-zero modes created by component removal). Mass beyond the last
// edge accumulates in the final bin; masses normalize to sum 1.
SpectralDensity empirical_density(std::vector<double> eigenvalues,
                                  const Vector& bin_edges, int drop_smallest);

// K+1 edges of K uniform bins on [lo, hi].
Vector uniform_edges(double lo, double hi, int bins);

// Eigenvalues of a symmetric matrix in descending order, clamped at zero
// from below within -1e-8.
Vector symmetric_eigenvalues_desc(const Matrix& m);

}  // namespace sdfm::spectra
