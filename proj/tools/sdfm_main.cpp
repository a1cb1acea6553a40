// Command-line frontend: estimate | roll | mc | weak | meanfield | density.
// Exit code 0 on success; failures print a machine-readable JSON object on
// stderr and exit nonzero. SDFM_THREADS sets the default worker count.

#include "sdfm/divergence.hpp"
#include "sdfm/estimator.hpp"
#include "sdfm/frv.hpp"
#include "sdfm/harness.hpp"
#include "sdfm/io.hpp"
#include "sdfm/spectra.hpp"
#include "sdfm/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using nlohmann::json;

int env_default_threads() {
    if (const char* raw = std::getenv("SDFM_THREADS")) {
        const int parsed = std::atoi(raw);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    return out;
}

std::vector<std::pair<double, double>> parse_pair_list(const std::string& csv) {
    // "0:0,0.5:0,0.5:0.5" -> {(0,0), (0.5,0), (0.5,0.5)}
    std::vector<std::pair<double, double>> out;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw sdfm::error("expected rho:beta pairs, got: " + item);
        out.emplace_back(std::stod(item.substr(0, colon)),
                         std::stod(item.substr(colon + 1)));
    }
    return out;
}

std::vector<sdfm::harness::Method> parse_methods(const std::string& csv) {
    std::vector<sdfm::harness::Method> out;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ','))
        if (!item.empty()) out.push_back(sdfm::harness::method_from_name(item));
    return out;
}

struct EstimatorFlags {
    int p_max = 20;
    double b_max = 0.95;
    double b_step = 0.01;
    int bins = 100;
    double epsilon = 1e-3;
    double js_epsilon = 1e-8;
    bool c_excludes_removed = false;
    bool coarse_to_fine = false;

    void attach(CLI::App* app) {
        app->add_option("--p-max", p_max, "largest component count searched");
        app->add_option("--b-max", b_max, "largest AR coefficient searched");
        app->add_option("--b-step", b_step, "AR coefficient grid step");
        app->add_option("--bins", bins, "histogram bin count");
        app->add_option("--epsilon", epsilon,
                        "imaginary offset for the model density");
        app->add_option("--js-epsilon", js_epsilon,
                        "zero-bin regularization for divergences");
        app->add_flag("--c-excludes-removed", c_excludes_removed,
                      "use aspect ratio (N-p)/T instead of N/T");
        app->add_flag("--coarse-to-fine", coarse_to_fine,
                      "scan b at 10x step, then refine near the argmin");
    }
    sdfm::estimator::SearchGrid grid() const {
        sdfm::estimator::SearchGrid g;
        g.p_max = p_max;
        g.b_max = b_max;
        g.b_step = b_step;
        return g;
    }
    sdfm::estimator::EstimatorConfig config(int threads) const {
        sdfm::estimator::EstimatorConfig c;
        c.bins = bins;
        c.epsilon = epsilon;
        c.js_epsilon = js_epsilon;
        c.c_excludes_removed = c_excludes_removed;
        c.coarse_to_fine = coarse_to_fine;
        c.threads = threads;
        return c;
    }
};

sdfm::io::LoadOptions load_options(const std::string& input_kind,
                                   const std::string& missing) {
    sdfm::io::LoadOptions options;
    if (input_kind == "price")
        options.kind = sdfm::io::InputKind::Price;
    else if (input_kind == "return")
        options.kind = sdfm::io::InputKind::Return;
    else
        throw sdfm::error("--input-kind must be price or return");
    if (missing == "drop-series")
        options.missing = sdfm::io::MissingPolicy::DropSeries;
    else if (missing == "drop-dates")
        options.missing = sdfm::io::MissingPolicy::DropDates;
    else
        throw sdfm::error("--missing must be drop-series or drop-dates");
    return options;
}

// Densities at the estimate's argmin, for plot overlays.
void export_fit_densities(const sdfm::spectra::ReturnPanel& normalized,
                          const sdfm::estimator::EstimationResult& result,
                          const sdfm::estimator::EstimatorConfig& config,
                          const std::string& path) {
    using namespace sdfm;
    const spectra::ResidualSet rs =
        spectra::pca_residuals(normalized, result.p_hat);
    Matrix u = rs.residuals;
    const double t = static_cast<double>(u.cols());
    for (Index i = 0; i < u.rows(); ++i) {
        const double sd = std::sqrt(u.row(i).squaredNorm() / t);
        if (sd > 1e-15) u.row(i) /= sd;
    }
    const Vector lambda =
        spectra::symmetric_eigenvalues_desc((u * u.transpose()) / t);
    const Vector edges =
        spectra::uniform_edges(0.0, 1.1 * lambda[0], config.bins);
    const auto real = spectra::empirical_density(
        std::vector<double>(lambda.data(), lambda.data() + lambda.size()),
        edges, result.p_hat);
    const double n = static_cast<double>(normalized.n());
    const double c_used = config.c_excludes_removed
                              ? (n - result.p_hat) / t
                              : n / t;
    const auto model = frv::model_density(
        frv::ModelParams(result.b_hat, c_used), edges, config.epsilon);
    const auto mp = frv::mp_density(c_used, edges);
    io::export_densities(real, model, mp, path);
}

int run(int argc, char** argv) {
    CLI::App app{"Factor-count and residual-autocorrelation estimation from "
                 "eigenvalue spectra"};
    app.require_subcommand(1);
    int threads = env_default_threads();
    app.add_option("--threads", threads,
                   "worker threads (default: SDFM_THREADS or all cores)");

    // ---- estimate ----
    auto* cmd_estimate = app.add_subcommand(
        "estimate", "estimate factor count and AR coefficient from a CSV");
    std::string est_input, est_output, est_density_path;
    std::string est_kind = "price", est_missing = "drop-series";
    bool est_surface = false;
    EstimatorFlags est_flags;
    cmd_estimate->add_option("--input", est_input, "input CSV")->required();
    cmd_estimate->add_option("--input-kind", est_kind, "price|return");
    cmd_estimate->add_option("--missing", est_missing,
                             "drop-series|drop-dates");
    cmd_estimate->add_option("--output", est_output,
                             "result JSON path (default: stdout)");
    cmd_estimate->add_flag("--surface", est_surface,
                           "include the divergence surface in the JSON");
    cmd_estimate->add_option("--density", est_density_path,
                             "also export density overlays to this CSV");
    est_flags.attach(cmd_estimate);

    // ---- roll ----
    auto* cmd_roll = app.add_subcommand(
        "roll", "rolling-window estimates over a return history");
    std::string roll_input, roll_output;
    std::string roll_kind = "price", roll_missing = "drop-series";
    int roll_window = 378, roll_step = 1;
    EstimatorFlags roll_flags;
    cmd_roll->add_option("--input", roll_input, "input CSV")->required();
    cmd_roll->add_option("--input-kind", roll_kind, "price|return");
    cmd_roll->add_option("--missing", roll_missing, "drop-series|drop-dates");
    cmd_roll->add_option("--window", roll_window, "window length in dates");
    cmd_roll->add_option("--step", roll_step, "window advance");
    cmd_roll->add_option("--output", roll_output,
                         "series CSV path (default: stdout)");
    roll_flags.attach(cmd_roll);

    // ---- mc ----
    auto* cmd_mc = app.add_subcommand(
        "mc", "Monte Carlo replication study on synthetic panels");
    std::string mc_n = "200", mc_t, mc_snr = "0.10,0.25,0.50";
    std::string mc_rho_beta = "0:0,0.5:0,0.5:0.5";
    std::string mc_methods = "SD";
    int mc_p_true = 4, mc_j = -1, mc_replications = 50, mc_k_max = 20;
    std::uint64_t mc_seed_base = 0;
    bool mc_full = false, mc_timings = false;
    std::string mc_output, mc_json_output;
    EstimatorFlags mc_flags;
    cmd_mc->add_option("--n", mc_n, "panel sizes N, comma separated");
    cmd_mc->add_option("--t", mc_t, "panel lengths T (default: T = N)");
    cmd_mc->add_option("--inv-snr", mc_snr, "noise levels, comma separated");
    cmd_mc->add_option("--rho-beta", mc_rho_beta,
                       "correlation pairs rho:beta, comma separated");
    cmd_mc->add_option("--p-true", mc_p_true, "true factor count");
    cmd_mc->add_option("--j", mc_j, "neighbor range (default: N/10)");
    cmd_mc->add_option("--replications", mc_replications, "replications");
    cmd_mc->add_option("--methods", mc_methods, "subset of SD,BIC3,ED,ER");
    cmd_mc->add_option("--seed-base", mc_seed_base,
                       "replication r uses seed seed-base + r");
    cmd_mc->add_option("--k-max", mc_k_max, "baseline search depth");
    cmd_mc->add_flag("--full", mc_full,
                     "run the full N x noise x correlation grid");
    cmd_mc->add_flag("--timings", mc_timings,
                     "include wall-clock columns (breaks byte-identical "
                     "re-runs)");
    cmd_mc->add_option("--output", mc_output, "report CSV path");
    cmd_mc->add_option("--json", mc_json_output,
                       "report JSON path (includes per-replication records)");
    mc_flags.attach(cmd_mc);

    // ---- weak ----
    auto* cmd_weak = app.add_subcommand(
        "weak", "weak-factor sweep against the baseline estimators");
    int weak_n = 200, weak_t = 200, weak_j = -1, weak_replications = 50;
    int weak_k_max = 20;
    double weak_snr = 0.25, weak_rho = 0.5, weak_beta = 0.5;
    std::string weak_sigmas = "0.1,0.2,0.3,0.5,1.0", weak_counts = "3,4";
    std::string weak_methods = "SD,BIC3,ED,ER";
    std::uint64_t weak_seed_base = 0;
    bool weak_timings = false;
    std::string weak_output, weak_json_output;
    EstimatorFlags weak_flags;
    cmd_weak->add_option("--n", weak_n, "panel size N");
    cmd_weak->add_option("--t", weak_t, "panel length T");
    cmd_weak->add_option("--inv-snr", weak_snr, "noise level");
    cmd_weak->add_option("--rho", weak_rho, "residual AR coefficient");
    cmd_weak->add_option("--beta", weak_beta, "neighbor weight");
    cmd_weak->add_option("--j", weak_j, "neighbor range (default: N/10)");
    cmd_weak->add_option("--sigma-weak", weak_sigmas,
                         "weak-factor stds, comma separated");
    cmd_weak->add_option("--weak-count", weak_counts,
                         "weak-factor counts, comma separated");
    cmd_weak->add_option("--replications", weak_replications, "replications");
    cmd_weak->add_option("--methods", weak_methods, "subset of SD,BIC3,ED,ER");
    cmd_weak->add_option("--seed-base", weak_seed_base, "seed base");
    cmd_weak->add_option("--k-max", weak_k_max, "baseline search depth");
    cmd_weak->add_flag("--timings", weak_timings, "include runtime columns");
    cmd_weak->add_option("--output", weak_output, "report CSV path");
    cmd_weak->add_option("--json", weak_json_output, "report JSON path");
    weak_flags.attach(cmd_weak);

    // ---- meanfield ----
    auto* cmd_meanfield = app.add_subcommand(
        "meanfield",
        "distance between heterogeneous and homogeneous AR spectra");
    int mf_n = 300, mf_t = 600;
    std::string mf_candidates = "0.35,0.50,0.65";
    std::uint64_t mf_seed = 0;
    std::string mf_output;
    cmd_meanfield->add_option("--n", mf_n, "panel size N");
    cmd_meanfield->add_option("--t", mf_t, "panel length T");
    cmd_meanfield->add_option("--candidates", mf_candidates,
                              "candidate coefficients, comma separated");
    cmd_meanfield->add_option("--seed", mf_seed, "generator seed");
    cmd_meanfield->add_option("--output", mf_output,
                              "CSV path (default: stdout)");

    // ---- density ----
    auto* cmd_density = app.add_subcommand(
        "density", "model and reference densities on a uniform grid");
    double den_b = 0.0, den_c = 0.5, den_epsilon = 1e-3, den_max = 0.0;
    int den_bins = 100;
    std::string den_output;
    cmd_density->add_option("--b", den_b, "AR coefficient")->required();
    cmd_density->add_option("--c", den_c, "aspect ratio N/T")->required();
    cmd_density->add_option("--bins", den_bins, "bin count");
    cmd_density->add_option("--epsilon", den_epsilon, "imaginary offset");
    cmd_density->add_option("--grid-max", den_max,
                            "upper grid edge (default: scaled MP edge)");
    cmd_density->add_option("--output", den_output,
                            "CSV path (default: stdout)");

    CLI11_PARSE(app, argc, argv);
    using namespace sdfm;

    if (cmd_estimate->parsed()) {
        const auto options = load_options(est_kind, est_missing);
        const spectra::ReturnPanel raw =
            io::load_prices_to_returns(est_input, options);
        const spectra::ReturnPanel normalized = spectra::normalize_panel(raw);
        const auto config = est_flags.config(threads);
        const auto result =
            estimator::estimate(normalized, est_flags.grid(), config);
        const std::string payload =
            io::estimation_to_json(result, est_flags.grid(), est_surface);
        if (est_output.empty())
            std::cout << payload;
        else
            io::write_text_file(est_output, payload);
        if (!est_density_path.empty())
            export_fit_densities(normalized, result, config,
                                 est_density_path);
        return 0;
    }

    if (cmd_roll->parsed()) {
        const auto options = load_options(roll_kind, roll_missing);
        std::vector<std::string> dates;
        const spectra::ReturnPanel panel =
            io::load_prices_to_returns(roll_input, options, &dates);
        const auto series = io::rolling_estimate(
            panel, roll_window, roll_step, roll_flags.grid(),
            roll_flags.config(1), dates, threads);
        const std::string payload = io::window_series_to_csv(series);
        if (roll_output.empty())
            std::cout << payload;
        else
            io::write_text_file(roll_output, payload);
        return 0;
    }

    if (cmd_mc->parsed()) {
        harness::ExperimentSpec spec;
        const std::vector<int> ns = parse_int_list(mc_n);
        const std::vector<int> ts =
            mc_t.empty() ? std::vector<int>{} : parse_int_list(mc_t);
        std::vector<double> snrs = parse_double_list(mc_snr);
        std::vector<std::pair<double, double>> pairs =
            parse_pair_list(mc_rho_beta);
        if (mc_full) {
            snrs = {0.10, 0.25, 0.50, 0.75, 1.00, 1.50, 2.00, 3.00};
            pairs = {{0.0, 0.0}, {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}};
        }
        for (std::size_t i = 0; i < ns.size(); ++i)
            for (const double snr : snrs)
                for (const auto& [rho, beta] : pairs) {
                    synth::SyntheticConfig config;
                    config.N = ns[i];
                    config.T = i < ts.size() ? ts[i] : ns[i];
                    config.p_true = mc_p_true;
                    config.inv_snr = snr;
                    config.rho = rho;
                    config.beta = beta;
                    config.J = mc_j >= 0 ? mc_j : ns[i] / 10;
                    spec.config_grid.push_back(config);
                }
        spec.replications = mc_replications;
        spec.methods = parse_methods(mc_methods);
        spec.seed_base = mc_seed_base;
        spec.grid = mc_flags.grid();
        spec.estimator_config = mc_flags.config(1);
        spec.k_max = mc_k_max;
        spec.threads = threads;
        const auto report = harness::run_experiment(spec);
        const std::string csv = io::report_to_csv(report, mc_timings);
        if (mc_output.empty())
            std::cout << csv;
        else
            io::write_text_file(mc_output, csv);
        if (!mc_json_output.empty())
            io::write_text_file(mc_json_output,
                                io::report_to_json(report, mc_timings));
        return 0;
    }

    if (cmd_weak->parsed()) {
        synth::SyntheticConfig base;
        base.N = weak_n;
        base.T = weak_t;
        base.p_true = 4;
        base.inv_snr = weak_snr;
        base.rho = weak_rho;
        base.beta = weak_beta;
        base.J = weak_j >= 0 ? weak_j : weak_n / 10;
        const auto report = harness::run_weak_factor_sweep(
            base, parse_double_list(weak_sigmas), parse_int_list(weak_counts),
            parse_methods(weak_methods), weak_replications, weak_seed_base,
            weak_flags.grid(), weak_flags.config(1), weak_k_max, threads);
        const std::string csv = io::report_to_csv(report, weak_timings);
        if (weak_output.empty())
            std::cout << csv;
        else
            io::write_text_file(weak_output, csv);
        if (!weak_json_output.empty())
            io::write_text_file(weak_json_output,
                                io::report_to_json(report, weak_timings));
        return 0;
    }

    if (cmd_meanfield->parsed()) {
        const auto values = harness::run_meanfield_demo(
            mf_n, mf_t, parse_double_list(mf_candidates), mf_seed);
        std::ostringstream out;
        out << "b_bar,js\n";
        for (const auto& [b_bar, value] : values)
            out << io::format_significant(b_bar) << ','
                << io::format_significant(value) << '\n';
        if (mf_output.empty())
            std::cout << out.str();
        else
            io::write_text_file(mf_output, out.str());
        return 0;
    }

    if (cmd_density->parsed()) {
        const frv::ModelParams params(den_b, den_c);
        double top = den_max;
        if (!(top > 0.0)) {
            const double stretch =
                (1.0 + std::abs(den_b)) / (1.0 - std::abs(den_b));
            top = 1.1 * frv::mp_upper_edge(den_c) * stretch;
        }
        const Vector edges = spectra::uniform_edges(0.0, top, den_bins);
        const auto model = frv::model_density(params, edges, den_epsilon);
        const auto mp = frv::mp_density(den_c, edges);
        std::ostringstream out;
        out << "bin_left,bin_right,rho_model,rho_mp\n";
        for (Index i = 0; i < model.bins(); ++i)
            out << io::format_significant(edges[i]) << ','
                << io::format_significant(edges[i + 1]) << ','
                << io::format_significant(model.masses[i]) << ','
                << io::format_significant(mp.masses[i]) << '\n';
        if (den_output.empty())
            std::cout << out.str();
        else
            io::write_text_file(den_output, out.str());
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = e.what();
        std::cerr << err.dump() << std::endl;
        return 1;
    }
}
