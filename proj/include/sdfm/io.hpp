#pragma once

#include "sdfm/common.hpp"
#include "sdfm/estimator.hpp"
#include "sdfm/harness.hpp"
#include "sdfm/spectra.hpp"

#include <string>
#include <vector>

namespace sdfm::io {

enum class InputKind { Price, Return };
enum class MissingPolicy { DropSeries, DropDates };

struct LoadOptions {
    InputKind kind = InputKind::Price;
    MissingPolicy missing = MissingPolicy::DropSeries;
};

// CSV with one date column and one header row of series ids. Prices become
// simple returns per column; the panel is transposed to N x T. Missing cells
// drop the series or the date per options; unparseable cells report their
// row and column. `dates` (optional) receives the date labels of the
// returned columns.
spectra::ReturnPanel load_prices_to_returns(
    const std::string& path, const LoadOptions& options = {},
    std::vector<std::string>* dates = nullptr);

// One row per evaluated window; a false `ok` marks a recorded failure (gap),
// whose numeric fields are zero.
struct WindowSeries {
    std::vector<std::string> dates;  // label of each window's last column
    std::vector<int> p_hat;
    std::vector<double> b_hat;
    std::vector<double> explained_variance;
    std::vector<double> variance_per_factor;
    std::vector<double> b_ind;
    std::vector<bool> ok;
    std::vector<std::string> messages;

    std::size_t size() const { return p_hat.size(); }
};

// Normalizes each length-`window` sub-panel, estimates it, and records the
// diagnostics plus the mean absolute per-residual AR(1) coefficient. Window
// positions advance by `step`; failures become gaps, not errors. Labels come
// from `dates` when provided (panel columns), otherwise from column indices.
WindowSeries rolling_estimate(const spectra::ReturnPanel& panel, int window,
                              int step, const estimator::SearchGrid& grid,
                              const estimator::EstimatorConfig& config = {},
                              const std::vector<std::string>& dates = {},
                              int threads = 1);

struct Ar1Fit {
    Vector coefficients;
    double b_ind = 0.0;  // mean |coefficient|
    std::vector<int> flagged_rows;  // zero-variance rows, coefficient 0
};

// Least-squares lag-1 coefficient per residual row (no intercept);
// b_ind = (1/N) sum |b_i|.
Ar1Fit ar1_per_residual(const spectra::ResidualSet& residuals);

// CSV columns bin_left, bin_right, rho_real, rho_model, rho_mp with
// 12-significant-digit formatting; all three densities must share the grid.
void export_densities(const spectra::SpectralDensity& real,
                      const spectra::SpectralDensity& model,
                      const spectra::SpectralDensity& mp,
                      const std::string& path);

// Serialization shared by the command-line tool. All writers are
// deterministic: identical inputs produce identical bytes.
std::string format_significant(double value);  // %.12g
std::string estimation_to_json(const estimator::EstimationResult& result,
                               const estimator::SearchGrid& grid,
                               bool include_surface);
std::string window_series_to_csv(const WindowSeries& series);
std::string report_to_csv(const harness::ExperimentReport& report,
                          bool include_runtime);
std::string report_to_json(const harness::ExperimentReport& report,
                           bool include_runtime);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sdfm::io
