#pragma once

#include "sdfm/baselines.hpp"
#include "sdfm/common.hpp"
#include "sdfm/estimator.hpp"
#include "sdfm/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sdfm::harness {

enum class Method { SD, BIC3, ED, ER };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct ExperimentSpec {
    std::vector<synth::SyntheticConfig> config_grid;
    int replications = 50;
    std::vector<Method> methods = {Method::SD};
    std::uint64_t seed_base = 0;
    estimator::SearchGrid grid;
    estimator::EstimatorConfig estimator_config;
    int k_max = 20;   // baseline search depth, shared with p_max by default
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct ReplicationOutcome {
    int replication = 0;
    bool ok = false;
    int p_hat = 0;
    double b_hat = 0.0;  // SD only; 0 otherwise
    std::string message;
};

struct ReportRow {
    synth::SyntheticConfig config;
    Method method = Method::SD;
    double mean_p_hat = 0.0;
    double mean_b_hat = 0.0;  // SD only
    double rmse_p = 0.0;
    double runtime_seconds = 0.0;
    int failures = 0;
    std::vector<ReplicationOutcome> outcomes;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
};

// Recomputes a row's aggregates from its stored outcomes (the report is a
// pure fold of the replication records).
void refold_row(ReportRow& row);

// Per config x method: replication r generates with seed seed_base + r,
// normalizes, and estimates. Failures are recorded per replication, never
// fatal. Deterministic for a fixed spec; method order and thread count do
// not affect any outcome.
ExperimentReport run_experiment(const ExperimentSpec& spec);

// Weak-factor sweep over sigma_weak x weak_count on a base config with
// p_true = 4.
ExperimentReport run_weak_factor_sweep(const synth::SyntheticConfig& base,
                                       const std::vector<double>& sigma_values,
                                       const std::vector<int>& weak_counts,
                                       const std::vector<Method>& methods,
                                       int replications,
                                       std::uint64_t seed_base,
                                       const estimator::SearchGrid& grid,
                                       const estimator::EstimatorConfig&
                                           estimator_config,
                                       int k_max = 20, int threads = 0);

// JS distance between the heterogeneous-coefficient spectrum (b_i ~ U[0,1])
// and the homogeneous b_bar spectrum, per candidate.
std::vector<std::pair<double, double>> run_meanfield_demo(
    int N, int T, const std::vector<double>& candidates, std::uint64_t seed);

}  // namespace sdfm::harness
