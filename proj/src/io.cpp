#include "sdfm/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace sdfm::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (const char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    cells.push_back(cell);
    return cells;
}

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" ||
           cell == "nan" || cell == "null";
}

}  // namespace

spectra::ReturnPanel load_prices_to_returns(const std::string& path,
                                            const LoadOptions& options,
                                            std::vector<std::string>* dates) {
    std::ifstream in(path);
    if (!in) throw error("cannot open input file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw error("empty input file: " + path);
    std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2)
        throw error("input needs a date column and at least one series: " +
                    path);
    const std::size_t series_count = header.size() - 1;

    std::vector<std::string> row_dates;
    std::vector<std::vector<double>> rows;  // per date, per series
    std::vector<std::vector<bool>> present;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (trimmed(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw error("row " + std::to_string(line_number) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
        row_dates.push_back(trimmed(cells[0]));
        std::vector<double> values(series_count, 0.0);
        std::vector<bool> have(series_count, false);
        for (std::size_t j = 0; j < series_count; ++j) {
            const std::string cell = trimmed(cells[j + 1]);
            if (is_missing(cell)) continue;
            double value = 0.0;
            const char* begin = cell.data();
            const char* end = begin + cell.size();
            const auto parsed = std::from_chars(begin, end, value);
            if (parsed.ec != std::errc{} || parsed.ptr != end)
                throw error("unparseable cell at row " +
                            std::to_string(line_number) + ", column " +
                            trimmed(header[j + 1]));
            values[j] = value;
            have[j] = true;
        }
        rows.push_back(std::move(values));
        present.push_back(std::move(have));
    }

    std::vector<bool> keep_series(series_count, true);
    std::vector<bool> keep_date(rows.size(), true);
    if (options.missing == MissingPolicy::DropSeries) {
        for (std::size_t j = 0; j < series_count; ++j)
            for (std::size_t r = 0; r < rows.size(); ++r)
                if (!present[r][j]) {
                    keep_series[j] = false;
                    break;
                }
    } else {
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t j = 0; j < series_count; ++j)
                if (!present[r][j]) {
                    keep_date[r] = false;
                    break;
                }
    }

    std::vector<std::size_t> series_index;
    for (std::size_t j = 0; j < series_count; ++j)
        if (keep_series[j]) series_index.push_back(j);
    std::vector<std::size_t> date_index;
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (keep_date[r]) date_index.push_back(r);

    if (series_index.empty())
        throw error("no usable series after the missing-data policy");

    const std::size_t n = series_index.size();
    const bool prices = options.kind == InputKind::Price;
    const std::size_t t =
        prices ? (date_index.empty() ? 0 : date_index.size() - 1)
               : date_index.size();
    if (t < 2) throw error("fewer than 2 usable dates");

    spectra::ReturnPanel panel;
    panel.values = Matrix(n, t);
    panel.series_ids.reserve(n);
    for (const std::size_t j : series_index)
        panel.series_ids.push_back(trimmed(header[j + 1]));

    if (dates) dates->clear();
    for (std::size_t k = 0; k < t; ++k) {
        const std::size_t r_now = date_index[prices ? k + 1 : k];
        if (dates) dates->push_back(row_dates[r_now]);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = series_index[i];
            if (prices) {
                const double before = rows[date_index[k]][j];
                const double now = rows[r_now][j];
                if (before == 0.0)
                    throw error("zero price at row " +
                                std::to_string(date_index[k] + 2) +
                                ", column " + panel.series_ids[i]);
                panel.values(i, k) = (now - before) / before;
            } else {
                panel.values(i, k) = rows[r_now][j];
            }
        }
    }
    return panel;
}

Ar1Fit ar1_per_residual(const spectra::ResidualSet& residuals) {
    const Matrix& u = residuals.residuals;
    if (u.cols() < 3) throw error("AR(1) fit requires T >= 3");
    Ar1Fit out;
    out.coefficients = Vector::Zero(u.rows());
    for (Index i = 0; i < u.rows(); ++i) {
        double num = 0.0, den = 0.0;
        for (Index s = 1; s < u.cols(); ++s) {
            num += u(i, s) * u(i, s - 1);
            den += u(i, s - 1) * u(i, s - 1);
        }
        if (den < 1e-300) {
            out.flagged_rows.push_back(static_cast<int>(i));
            out.coefficients[i] = 0.0;
        } else {
            out.coefficients[i] = num / den;
        }
    }
    out.b_ind = out.coefficients.cwiseAbs().mean();
    return out;
}

WindowSeries rolling_estimate(const spectra::ReturnPanel& panel, int window,
                              int step, const estimator::SearchGrid& grid,
                              const estimator::EstimatorConfig& config,
                              const std::vector<std::string>& dates,
                              int threads) {
    if (window < 2 || window > panel.t())
        throw error("rolling window must satisfy 2 <= window <= T");
    if (step < 1) throw error("rolling step must be >= 1");
    if (!dates.empty() &&
        static_cast<Index>(dates.size()) != panel.t())
        throw error("dates length must match the panel T");

    const int count =
        static_cast<int>((panel.t() - window) / step) + 1;
    WindowSeries series;
    series.dates.resize(count);
    series.p_hat.assign(count, 0);
    series.b_hat.assign(count, 0.0);
    series.explained_variance.assign(count, 0.0);
    series.variance_per_factor.assign(count, 0.0);
    series.b_ind.assign(count, 0.0);
    series.ok.assign(count, false);
    series.messages.assign(count, "");

    auto evaluate = [&](int w) {
        const Index start = static_cast<Index>(w) * step;
        const Index last = start + window - 1;
        series.dates[w] = dates.empty()
                              ? "t" + std::to_string(last)
                              : dates[static_cast<std::size_t>(last)];
        try {
            spectra::ReturnPanel sub;
            sub.values = panel.values.middleCols(start, window);
            sub.series_ids = panel.series_ids;
            const spectra::ReturnPanel normalized =
                spectra::normalize_panel(sub);
            const estimator::EstimationResult result =
                estimator::estimate(normalized, grid, config);
            series.p_hat[w] = result.p_hat;
            series.b_hat[w] = result.b_hat;
            series.explained_variance[w] = result.explained_variance_at_p_hat;
            series.variance_per_factor[w] = result.variance_per_factor;
            series.b_ind[w] =
                ar1_per_residual(
                    spectra::pca_residuals(normalized, result.p_hat))
                    .b_ind;
            series.ok[w] = true;
        } catch (const std::exception& e) {
            series.messages[w] = e.what();
        }
    };

    const int workers = std::max(1, threads);
    if (workers == 1 || count == 1) {
        for (int w = 0; w < count; ++w) evaluate(w);
    } else {
        std::atomic<int> next{0};
        auto loop = [&] {
            for (;;) {
                const int w = next.fetch_add(1);
                if (w >= count) return;
                evaluate(w);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < std::min(workers, count); ++i)
            pool.emplace_back(loop);
        for (auto& th : pool) th.join();
    }
    return series;
}

std::string format_significant(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

void export_densities(const spectra::SpectralDensity& real,
                      const spectra::SpectralDensity& model,
                      const spectra::SpectralDensity& mp,
                      const std::string& path) {
    const Index k = real.bins();
    if (k < 1) throw error("export requires a non-empty grid");
    auto same_grid = [&](const spectra::SpectralDensity& other) {
        return other.bin_edges.size() == real.bin_edges.size() &&
               (other.bin_edges.array() == real.bin_edges.array()).all();
    };
    if (!same_grid(model) || !same_grid(mp))
        throw error("export requires densities on a shared grid");

    std::ostringstream out;
    out << "bin_left,bin_right,rho_real,rho_model,rho_mp\n";
    for (Index i = 0; i < k; ++i)
        out << format_significant(real.bin_edges[i]) << ','
            << format_significant(real.bin_edges[i + 1]) << ','
            << format_significant(real.masses[i]) << ','
            << format_significant(model.masses[i]) << ','
            << format_significant(mp.masses[i]) << '\n';
    write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open output file: " + path);
    out << content;
    if (!out) throw error("failed writing output file: " + path);
}

std::string estimation_to_json(const estimator::EstimationResult& result,
                               const estimator::SearchGrid& grid,
                               bool include_surface) {
    json j;
    j["p_hat"] = result.p_hat;
    j["b_hat"] = result.b_hat;
    j["min_divergence"] = result.min_divergence;
    j["explained_variance_at_p_hat"] = result.explained_variance_at_p_hat;
    j["variance_per_factor"] = result.variance_per_factor;
    j["p_max"] = grid.p_max;
    j["b_values"] = grid.b_values();
    if (include_surface) {
        json surface = json::array();
        for (Index p = 0; p < result.divergence_surface.rows(); ++p) {
            json row = json::array();
            for (Index b = 0; b < result.divergence_surface.cols(); ++b)
                row.push_back(result.divergence_surface(p, b));
            surface.push_back(std::move(row));
        }
        j["divergence_surface"] = std::move(surface);
    }
    return j.dump(2) + "\n";
}

std::string window_series_to_csv(const WindowSeries& series) {
    std::ostringstream out;
    out << "date,p_hat,b_hat,explained_variance,variance_per_factor,b_ind,"
           "ok,message\n";
    for (std::size_t w = 0; w < series.size(); ++w)
        out << series.dates[w] << ',' << series.p_hat[w] << ','
            << format_significant(series.b_hat[w]) << ','
            << format_significant(series.explained_variance[w]) << ','
            << format_significant(series.variance_per_factor[w]) << ','
            << format_significant(series.b_ind[w]) << ','
            << (series.ok[w] ? 1 : 0) << ',' << series.messages[w] << '\n';
    return out.str();
}

namespace {

json config_to_json(const synth::SyntheticConfig& config) {
    json j;
    j["N"] = config.N;
    j["T"] = config.T;
    j["p_true"] = config.p_true;
    j["inv_snr"] = config.inv_snr;
    j["rho"] = config.rho;
    j["beta"] = config.beta;
    j["J"] = config.J;
    j["sigma_weak"] = config.sigma_weak;
    j["weak_count"] = config.weak_count;
    return j;
}

}  // namespace

std::string report_to_csv(const harness::ExperimentReport& report,
                          bool include_runtime) {
    std::ostringstream out;
    out << "N,T,p_true,inv_snr,rho,beta,J,sigma_weak,weak_count,method,"
           "replications,failures,mean_p_hat,mean_b_hat,rmse_p";
    if (include_runtime) out << ",runtime_seconds";
    out << '\n';
    for (const auto& row : report.rows) {
        const auto& c = row.config;
        out << c.N << ',' << c.T << ',' << c.p_true << ','
            << format_significant(c.inv_snr) << ','
            << format_significant(c.rho) << ','
            << format_significant(c.beta) << ',' << c.J << ','
            << format_significant(c.sigma_weak) << ',' << c.weak_count << ','
            << harness::method_name(row.method) << ','
            << row.outcomes.size() << ',' << row.failures << ','
            << format_significant(row.mean_p_hat) << ','
            << format_significant(row.mean_b_hat) << ','
            << format_significant(row.rmse_p);
        if (include_runtime)
            out << ',' << format_significant(row.runtime_seconds);
        out << '\n';
    }
    return out.str();
}

std::string report_to_json(const harness::ExperimentReport& report,
                           bool include_runtime) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        json r;
        r["config"] = config_to_json(row.config);
        r["method"] = harness::method_name(row.method);
        r["mean_p_hat"] = row.mean_p_hat;
        r["mean_b_hat"] = row.mean_b_hat;
        r["rmse_p"] = row.rmse_p;
        r["failures"] = row.failures;
        if (include_runtime) r["runtime_seconds"] = row.runtime_seconds;
        json outcomes = json::array();
        for (const auto& outcome : row.outcomes) {
            json o;
            o["replication"] = outcome.replication;
            o["ok"] = outcome.ok;
            o["p_hat"] = outcome.p_hat;
            o["b_hat"] = outcome.b_hat;
            if (!outcome.message.empty()) o["message"] = outcome.message;
            outcomes.push_back(std::move(o));
        }
        r["outcomes"] = std::move(outcomes);
        rows.push_back(std::move(r));
    }
    json j;
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

}  // namespace sdfm::io
