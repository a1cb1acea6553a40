#include "sdfm/estimator.hpp"

#include "sdfm/divergence.hpp"
#include "sdfm/frv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace sdfm::estimator {

namespace {

// Empirical density of the p-level residual spectrum: rows re-standardized
// after component removal, grid 0..1.1*lambda_max, the p zero modes dropped.
spectra::SpectralDensity residual_density(const spectra::ReturnPanel& panel,
                                          int p,
                                          const EstimatorConfig& config) {
    const spectra::ResidualSet rs = spectra::pca_residuals(panel, p);
    Matrix u = rs.residuals;
    const double t = static_cast<double>(u.cols());
    for (Index i = 0; i < u.rows(); ++i) {
        const double sd = std::sqrt(u.row(i).squaredNorm() / t);
        if (sd > 1e-15) u.row(i) /= sd;
    }
    const Matrix c = (u * u.transpose()) / t;
    const Vector lambda = spectra::symmetric_eigenvalues_desc(c);
    if (!(lambda[0] > 0.0))
        throw error("residual spectrum is empty at p = " + std::to_string(p));
    const Vector edges =
        spectra::uniform_edges(0.0, 1.1 * lambda[0], config.bins);
    return spectra::empirical_density(
        std::vector<double>(lambda.data(), lambda.data() + lambda.size()),
        edges, p);
}

double aspect_ratio(const spectra::ReturnPanel& panel, int p,
                    const EstimatorConfig& config) {
    const double n = static_cast<double>(panel.n());
    const double t = static_cast<double>(panel.t());
    return config.c_excludes_removed ? (n - p) / t : n / t;
}

double cell_divergence(const spectra::SpectralDensity& empirical, double b,
                       double c, const EstimatorConfig& config) {
    const frv::ModelParams params(b, c);
    const spectra::SpectralDensity model =
        frv::model_density(params, empirical.bin_edges, config.epsilon);
    return divergence::js(empirical, model, config.js_epsilon);
}

void run_cells(const std::vector<std::pair<int, int>>& cells,
               const std::vector<spectra::SpectralDensity>& empirical,
               const std::vector<double>& c_at_p,
               const std::vector<double>& b_values,
               const EstimatorConfig& config, Matrix& surface) {
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto [p, j] = cells[i];
            surface(p, j) = cell_divergence(empirical[p], b_values[j],
                                            c_at_p[p], config);
        }
    };
    const int threads = std::max(1, config.threads);
    if (threads == 1 || cells.size() < 2) {
        work(0, cells.size());
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (cells.size() + threads - 1) / threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int w = 0; w < threads; ++w) {
        const std::size_t begin = std::min(cells.size(), w * chunk);
        const std::size_t end = std::min(cells.size(), begin + chunk);
        if (begin == end) continue;
        pool.emplace_back([&, begin, end] {
            try {
                work(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<double> SearchGrid::b_values() const {
    validate();
    std::vector<double> values;
    for (int i = 0;; ++i) {
        const double b = i * b_step;
        if (b > b_max + 1e-12) break;
        values.push_back(b);
    }
    return values;
}

void SearchGrid::validate() const {
    if (p_max < 0) throw error("search grid requires p_max >= 0");
    if (!(b_step > 0.0)) throw error("search grid requires b_step > 0");
    if (!(b_max >= 0.0 && b_max < 1.0))
        throw error("search grid requires 0 <= b_max < 1");
}

EstimationResult estimate(const spectra::ReturnPanel& panel,
                          const SearchGrid& grid,
                          const EstimatorConfig& config) {
    grid.validate();
    if (!panel.normalized) throw error("estimate requires a normalized panel");
    if (grid.p_max >= std::min(panel.n(), panel.t()))
        throw error("panel too small for p_max = " +
                    std::to_string(grid.p_max));
    if (config.bins < 2) throw error("estimate requires at least two bins");

    const std::vector<double> b_values = grid.b_values();
    const int np = grid.p_max + 1;
    const int nb = static_cast<int>(b_values.size());

    std::vector<spectra::SpectralDensity> empirical(np);
    std::vector<double> c_at_p(np);
    for (int p = 0; p < np; ++p) {
        empirical[p] = residual_density(panel, p, config);
        c_at_p[p] = aspect_ratio(panel, p, config);
    }

    EstimationResult out;
    out.divergence_surface =
        Matrix::Constant(np, nb, std::numeric_limits<double>::infinity());

    std::vector<std::pair<int, int>> cells;
    if (config.coarse_to_fine && nb > 1) {
        // Scan every 10th b, then fill the +-10 neighborhood of each p's
        // coarse argmin at full resolution.
        std::vector<char> wanted(static_cast<std::size_t>(np) * nb, 0);
        for (int p = 0; p < np; ++p)
            for (int j = 0; j < nb; j += 10)
                wanted[static_cast<std::size_t>(p) * nb + j] = 1;
        std::vector<std::pair<int, int>> coarse;
        for (int p = 0; p < np; ++p)
            for (int j = 0; j < nb; ++j)
                if (wanted[static_cast<std::size_t>(p) * nb + j])
                    coarse.emplace_back(p, j);
        run_cells(coarse, empirical, c_at_p, b_values, config,
                  out.divergence_surface);
        for (int p = 0; p < np; ++p) {
            int best_j = 0;
            for (int j = 0; j < nb; j += 10)
                if (out.divergence_surface(p, j) <
                    out.divergence_surface(p, best_j))
                    best_j = j;
            for (int j = std::max(0, best_j - 10);
                 j <= std::min(nb - 1, best_j + 10); ++j)
                if (!wanted[static_cast<std::size_t>(p) * nb + j]) {
                    wanted[static_cast<std::size_t>(p) * nb + j] = 1;
                    cells.emplace_back(p, j);
                }
        }
    } else {
        for (int p = 0; p < np; ++p)
            for (int j = 0; j < nb; ++j) cells.emplace_back(p, j);
    }
    run_cells(cells, empirical, c_at_p, b_values, config,
              out.divergence_surface);

    // First strict minimum in (p asc, b asc) order: ties already break to
    // the smallest p, then the smallest b.
    out.min_divergence = std::numeric_limits<double>::infinity();
    for (int p = 0; p < np; ++p)
        for (int j = 0; j < nb; ++j)
            if (out.divergence_surface(p, j) < out.min_divergence) {
                out.min_divergence = out.divergence_surface(p, j);
                out.p_hat = p;
                out.b_hat = b_values[j];
            }

    const Vector lambda =
        spectra::symmetric_eigenvalues_desc(spectra::covariance(panel));
    const double total = lambda.sum();
    double explained = 0.0;
    for (int k = 0; k < out.p_hat; ++k) explained += lambda[k];
    out.explained_variance_at_p_hat = total > 0.0 ? explained / total : 0.0;
    out.variance_per_factor =
        out.explained_variance_at_p_hat / std::max(out.p_hat, 1);
    return out;
}

double divergence_at(const spectra::ReturnPanel& panel, int p, double b,
                     const EstimatorConfig& config) {
    if (!panel.normalized)
        throw error("divergence_at requires a normalized panel");
    const spectra::SpectralDensity empirical =
        residual_density(panel, p, config);
    return cell_divergence(empirical, b, aspect_ratio(panel, p, config),
                           config);
}

}  // namespace sdfm::estimator
