#include "sdfm/harness.hpp"

#include "sdfm/divergence.hpp"
#include "sdfm/frv.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace sdfm::harness {

namespace {

struct CellOutcome {
    // One replication of one config, all methods on the same panel.
    std::vector<ReplicationOutcome> per_method;
    std::vector<double> seconds;
};

int default_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

CellOutcome run_replication(const synth::SyntheticConfig& config,
                            int replication, const ExperimentSpec& spec) {
    CellOutcome cell;
    cell.per_method.resize(spec.methods.size());
    cell.seconds.resize(spec.methods.size(), 0.0);

    synth::SyntheticConfig seeded = config;
    seeded.seed = spec.seed_base + static_cast<std::uint64_t>(replication);

    spectra::ReturnPanel normalized;
    std::string generation_failure;
    try {
        normalized = spectra::normalize_panel(synth::generate(seeded).panel);
    } catch (const std::exception& e) {
        generation_failure = e.what();
    }

    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
        ReplicationOutcome& outcome = cell.per_method[m];
        outcome.replication = replication;
        if (!generation_failure.empty()) {
            outcome.ok = false;
            outcome.message = generation_failure;
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        try {
            switch (spec.methods[m]) {
                case Method::SD: {
                    const estimator::EstimationResult r = estimator::estimate(
                        normalized, spec.grid, spec.estimator_config);
                    outcome.p_hat = r.p_hat;
                    outcome.b_hat = r.b_hat;
                    break;
                }
                case Method::BIC3:
                    outcome.p_hat =
                        baselines::bic3(normalized, spec.k_max).p_hat;
                    break;
                case Method::ED:
                    outcome.p_hat = baselines::ed(normalized, spec.k_max).p_hat;
                    break;
                case Method::ER:
                    outcome.p_hat = baselines::er(normalized, spec.k_max).p_hat;
                    break;
            }
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.ok = false;
            outcome.message = e.what();
        }
        cell.seconds[m] = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    }
    return cell;
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::SD: return "SD";
        case Method::BIC3: return "BIC3";
        case Method::ED: return "ED";
        case Method::ER: return "ER";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "SD") return Method::SD;
    if (name == "BIC3") return Method::BIC3;
    if (name == "ED") return Method::ED;
    if (name == "ER") return Method::ER;
    throw error("unknown method: " + name);
}

void ExperimentSpec::validate() const {
    if (replications < 1) throw error("experiment requires replications >= 1");
    if (methods.empty()) throw error("experiment requires at least one method");
    if (config_grid.empty()) throw error("experiment requires a config grid");
    for (const auto& config : config_grid) config.validate();
}

void refold_row(ReportRow& row) {
    double sum_p = 0.0, sum_b = 0.0, sum_sq = 0.0;
    int successes = 0;
    row.failures = 0;
    for (const auto& outcome : row.outcomes) {
        if (!outcome.ok) {
            ++row.failures;
            continue;
        }
        ++successes;
        sum_p += outcome.p_hat;
        sum_b += outcome.b_hat;
        const double err = outcome.p_hat - row.config.p_true;
        sum_sq += err * err;
    }
    if (successes > 0) {
        row.mean_p_hat = sum_p / successes;
        row.mean_b_hat = sum_b / successes;
        row.rmse_p = std::sqrt(sum_sq / successes);
    } else {
        row.mean_p_hat = row.mean_b_hat = row.rmse_p = 0.0;
    }
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const int configs = static_cast<int>(spec.config_grid.size());
    const int reps = spec.replications;

    // Tasks are (config, replication) pairs; every task evaluates all
    // methods on one generated panel. Results land in a preallocated slot,
    // so aggregation order never depends on scheduling.
    std::vector<CellOutcome> outcomes(
        static_cast<std::size_t>(configs) * reps);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= outcomes.size()) return;
            const int config_index = static_cast<int>(task) / reps;
            const int replication = static_cast<int>(task) % reps;
            outcomes[task] = run_replication(spec.config_grid[config_index],
                                             replication, spec);
        }
    };
    const int threads =
        std::min<int>(default_threads(spec.threads),
                      static_cast<int>(outcomes.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ExperimentReport report;
    for (int ci = 0; ci < configs; ++ci) {
        for (std::size_t m = 0; m < spec.methods.size(); ++m) {
            ReportRow row;
            row.config = spec.config_grid[ci];
            row.method = spec.methods[m];
            for (int r = 0; r < reps; ++r) {
                const CellOutcome& cell =
                    outcomes[static_cast<std::size_t>(ci) * reps + r];
                row.outcomes.push_back(cell.per_method[m]);
                row.runtime_seconds += cell.seconds[m];
            }
            refold_row(row);
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

ExperimentReport run_weak_factor_sweep(
    const synth::SyntheticConfig& base, const std::vector<double>& sigma_values,
    const std::vector<int>& weak_counts, const std::vector<Method>& methods,
    int replications, std::uint64_t seed_base,
    const estimator::SearchGrid& grid,
    const estimator::EstimatorConfig& estimator_config, int k_max,
    int threads) {
    if (base.p_true != 4)
        throw error("weak-factor sweep requires p_true = 4");
    ExperimentSpec spec;
    for (const int count : weak_counts)
        for (const double sigma : sigma_values) {
            synth::SyntheticConfig config = base;
            config.sigma_weak = sigma;
            config.weak_count = count;
            spec.config_grid.push_back(config);
        }
    spec.replications = replications;
    spec.methods = methods;
    spec.seed_base = seed_base;
    spec.grid = grid;
    spec.estimator_config = estimator_config;
    spec.k_max = k_max;
    spec.threads = threads;
    return run_experiment(spec);
}

std::vector<std::pair<double, double>> run_meanfield_demo(
    int N, int T, const std::vector<double>& candidates, std::uint64_t seed) {
    std::vector<std::pair<double, double>> out;
    for (const double b_bar : candidates) {
        if (!(b_bar >= 0.0 && b_bar < 1.0))
            throw error("meanfield candidates must lie in [0, 1)");
        const auto [y, z] = synth::generate_meanfield_pair(
            N, T, 0.0, std::nextafter(1.0, 0.0), b_bar, seed);
        const double t = static_cast<double>(T);
        const Vector ly = spectra::symmetric_eigenvalues_desc(
            (y.values * y.values.transpose()) / t);
        const Vector lz = spectra::symmetric_eigenvalues_desc(
            (z.values * z.values.transpose()) / t);
        const double top = 1.1 * std::max(ly[0], lz[0]);
        const Vector edges = spectra::uniform_edges(0.0, top, 100);
        const auto dy = spectra::empirical_density(
            std::vector<double>(ly.data(), ly.data() + ly.size()), edges, 0);
        const auto dz = spectra::empirical_density(
            std::vector<double>(lz.data(), lz.data() + lz.size()), edges, 0);
        out.emplace_back(b_bar, divergence::js(dy, dz));
    }
    return out;
}

}  // namespace sdfm::harness
