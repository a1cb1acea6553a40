#include "sdfm/spectra.hpp"

#include <algorithm>
#include <cmath>

namespace sdfm::spectra {

namespace {

void require_panel_shape(const ReturnPanel& panel) {
    if (panel.n() < 2 || panel.t() < 2)
        throw error("panel requires N >= 2 and T >= 2");
    if (!panel.series_ids.empty() &&
        static_cast<Index>(panel.series_ids.size()) != panel.n())
        throw error("series_ids length does not match row count");
}

std::string series_label(const ReturnPanel& panel, Index row) {
    if (static_cast<Index>(panel.series_ids.size()) > row)
        return panel.series_ids[static_cast<std::size_t>(row)];
    return "row " + std::to_string(row);
}

}  // namespace

ReturnPanel normalize_panel(const ReturnPanel& panel) {
    require_panel_shape(panel);
    if (panel.normalized) return panel;
    const Index n = panel.n(), t = panel.t();
    ReturnPanel out = panel;
    for (Index i = 0; i < n; ++i) {
        const double mean = panel.values.row(i).mean();
        Eigen::RowVectorXd centered =
            panel.values.row(i).array() - mean;
        const double var = centered.squaredNorm() / static_cast<double>(t);
        if (var < 1e-20)
            throw error("constant series cannot be normalized: " +
                        series_label(panel, i));
        out.values.row(i) = centered / std::sqrt(var);
    }
    out.normalized = true;
    return out;
}

Matrix covariance(const ReturnPanel& panel) {
    require_panel_shape(panel);
    if (!panel.normalized) throw error("covariance requires a normalized panel");
    return (panel.values * panel.values.transpose()) /
           static_cast<double>(panel.t());
}

Vector symmetric_eigenvalues_desc(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m,
                                                 Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw error("eigenvalue decomposition failed");
    Vector asc = solver.eigenvalues();
    Vector desc(asc.size());
    for (Index i = 0; i < asc.size(); ++i) {
        double v = asc[asc.size() - 1 - i];
        if (v < -1e-8) throw error("matrix is not positive semidefinite");
        desc[i] = std::max(v, 0.0);
    }
    return desc;
}

ResidualSet pca_residuals(const ReturnPanel& panel, int p) {
    require_panel_shape(panel);
    if (!panel.normalized)
        throw error("pca_residuals requires a normalized panel");
    const Index n = panel.n(), t = panel.t();
    if (p < 0 || p >= std::min(n, t))
        throw error("component count out of range: p = " + std::to_string(p) +
                    " with min(N, T) = " +
                    std::to_string(std::min(n, t)));

    ResidualSet out;
    out.p = p;
    if (p == 0) {
        out.residuals = panel.values;
        out.loadings = Matrix::Zero(n, 0);
        out.factors = Matrix::Zero(0, t);
        out.explained_variance = Vector::Zero(0);
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance(panel));
    if (solver.info() != Eigen::Success)
        throw error("eigenvalue decomposition failed");

    // SelfAdjointEigenSolver sorts ascending; the top-p live in the last
    // p columns.
    out.loadings = Matrix(n, p);
    out.explained_variance = Vector(p);
    for (int j = 0; j < p; ++j) {
        out.loadings.col(j) = solver.eigenvectors().col(n - 1 - j);
        out.explained_variance[j] =
            std::max(solver.eigenvalues()[n - 1 - j], 0.0);
    }
    out.factors = out.loadings.transpose() * panel.values;
    out.residuals = panel.values - out.loadings * out.factors;
    return out;
}

Vector uniform_edges(double lo, double hi, int bins) {
    if (bins < 1) throw error("grid requires at least one bin");
    if (!(hi > lo)) throw error("grid upper edge must exceed lower edge");
    Vector edges(bins + 1);
    const double width = (hi - lo) / bins;
    for (int k = 0; k <= bins; ++k) edges[k] = lo + width * k;
    edges[bins] = hi;
    return edges;
}

SpectralDensity empirical_density(std::vector<double> eigenvalues,
                                  const Vector& bin_edges, int drop_smallest) {
    const Index k = bin_edges.size() - 1;
    if (k < 1) throw error("empirical_density requires at least one bin");
    for (Index i = 0; i < k; ++i)
        if (!(bin_edges[i] < bin_edges[i + 1]))
            throw error("bin edges must be strictly increasing");
    if (drop_smallest < 0) throw error("drop_smallest out of range");

    std::sort(eigenvalues.begin(), eigenvalues.end());
    if (static_cast<std::size_t>(drop_smallest) >= eigenvalues.size())
        throw error("no eigenvalues remain after dropping the zero modes");

    SpectralDensity out;
    out.bin_edges = bin_edges;
    out.masses = Vector::Zero(k);
    std::size_t kept = 0;
    for (std::size_t i = drop_smallest; i < eigenvalues.size(); ++i) {
        double lambda = eigenvalues[i];
        if (lambda < -1e-8)
            throw error("negative eigenvalue beyond tolerance");
        lambda = std::max(lambda, bin_edges[0]);
        // Right-open bins except the last, which absorbs everything beyond
        // the final edge.
        const double* begin = bin_edges.data();
        const double* end = begin + bin_edges.size();
        Index bin = std::upper_bound(begin, end, lambda) - begin - 1;
        bin = std::clamp<Index>(bin, 0, k - 1);
        out.masses[bin] += 1.0;
        ++kept;
    }
    out.masses /= static_cast<double>(kept);
    return out;
}

}  // namespace sdfm::spectra
