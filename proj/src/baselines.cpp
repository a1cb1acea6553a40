#include "sdfm/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace sdfm::baselines {

namespace {

Vector panel_eigenvalues(const spectra::ReturnPanel& panel) {
    const Matrix c = (panel.values * panel.values.transpose()) /
                     static_cast<double>(panel.t());
    return spectra::symmetric_eigenvalues_desc(c);
}

}  // namespace

BaselineReport bic3(const spectra::ReturnPanel& panel, int k_max) {
    if (k_max < 0 || k_max >= std::min(panel.n(), panel.t()))
        throw error("bic3 requires 0 <= k_max < min(N, T)");
    const Vector lambda = panel_eigenvalues(panel);
    const double n = static_cast<double>(panel.n());
    const double t = static_cast<double>(panel.t());
    const double total = lambda.sum();

    // V(k) = mean squared residual = (sum of dropped eigenvalues) / N.
    std::vector<double> v(k_max + 1);
    double removed = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        v[k] = (total - removed) / n;
        if (k < lambda.size()) removed += lambda[k];
    }
    const double sigma2 = v[k_max];
    const double log_nt = std::log(n * t);

    BaselineReport out;
    out.method = Method::BIC3;
    out.criterion_values.resize(k_max + 1);
    for (int k = 0; k <= k_max; ++k)
        out.criterion_values[k] =
            v[k] + k * sigma2 * ((n + t - k) * log_nt) / (n * t);
    out.p_hat = 0;
    for (int k = 1; k <= k_max; ++k)
        if (out.criterion_values[k] < out.criterion_values[out.p_hat])
            out.p_hat = k;
    return out;
}

BaselineReport ed(const spectra::ReturnPanel& panel, int k_max) {
    if (k_max < 1) throw error("ed requires k_max >= 1");
    if (k_max + 5 >= panel.n())
        throw error("ed requires k_max + 5 < N");
    const Vector lambda = panel_eigenvalues(panel);

    BaselineReport out;
    out.method = Method::ED;
    out.criterion_values.resize(k_max);
    for (int k = 1; k <= k_max; ++k)
        out.criterion_values[k - 1] = lambda[k - 1] - lambda[k];

    auto threshold_at = [&](int k_ref) {
        // OLS slope of lambda_j on (j-1)^(2/3), j = k_ref+1 .. k_ref+5.
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (int j = k_ref + 1; j <= k_ref + 5; ++j) {
            const double x = std::pow(static_cast<double>(j - 1), 2.0 / 3.0);
            const double y = lambda[j - 1];
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double denom = 5.0 * sxx - sx * sx;
        const double slope = denom != 0.0 ? (5.0 * sxy - sx * sy) / denom : 0.0;
        return 2.0 * std::abs(slope);
    };
    auto pick = [&](double delta) {
        for (int k = k_max; k >= 1; --k) {
            const double gap = lambda[k - 1] - lambda[k];
            if (gap >= delta && gap > 0.0) return k;
        }
        return 0;
    };

    int current = k_max;
    for (int round = 0; round < 10; ++round) {
        const int next = pick(threshold_at(current));
        if (next == current) {
            out.p_hat = current;
            return out;
        }
        current = next;
    }
    out.p_hat = current;
    out.flagged = true;
    out.note = "threshold calibration did not reach a fixed point";
    return out;
}

BaselineReport er(const spectra::ReturnPanel& panel, int k_max) {
    if (k_max < 1) throw error("er requires k_max >= 1");
    if (k_max + 1 > panel.n()) throw error("er requires k_max + 1 <= N");
    const Vector lambda = panel_eigenvalues(panel);

    BaselineReport out;
    out.method = Method::ER;
    int usable = k_max;
    for (int k = 1; k <= k_max + 1; ++k)
        if (!(lambda[k - 1] > 0.0)) {
            usable = std::min(usable, k - 2);
            out.flagged = true;
            out.note = "zero eigenvalue inside the ratio range";
            break;
        }
    if (usable < 1) throw error("er found no usable eigenvalue ratios");

    out.criterion_values.resize(usable);
    for (int k = 1; k <= usable; ++k)
        out.criterion_values[k - 1] = lambda[k - 1] / lambda[k];
    out.p_hat = 1;
    for (int k = 2; k <= usable; ++k)
        if (out.criterion_values[k - 1] > out.criterion_values[out.p_hat - 1])
            out.p_hat = k;
    return out;
}

}  // namespace sdfm::baselines
