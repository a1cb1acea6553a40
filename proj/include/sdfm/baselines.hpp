#pragma once

#include "sdfm/common.hpp"
#include "sdfm/spectra.hpp"

#include <string>
#include <vector>

namespace sdfm::baselines {

enum class Method { BIC3, ED, ER };

struct BaselineReport {
    Method method = Method::BIC3;
    int p_hat = 0;
    // BIC3: criterion over k = 0..k_max. ED: eigenvalue differences over
    // k = 1..k_max. ER: adjacent ratios over k = 1..k_max.
    std::vector<double> criterion_values;
    bool flagged = false;  // ED non-convergence / ER degenerate tail
    std::string note;
};

// Information criterion: p_hat = argmin_k V(k) + k * sigma2 * penalty(k)
// with V(k) the mean squared residual after removing k components,
// sigma2 = V(k_max), penalty(k) = (N+T-k) ln(NT) / (NT).
BaselineReport bic3(const spectra::ReturnPanel& panel, int k_max = 20);

// Eigenvalue differences with iterated threshold calibration: regress
// lambda_j on (j-1)^(2/3) for j = k+1..k+5, delta = 2|slope|, pick the
// largest k whose gap reaches delta; repeat to a fixed point (<= 10 rounds).
BaselineReport ed(const spectra::ReturnPanel& panel, int k_max = 20);

// Eigenvalue ratio: p_hat = argmax_{1<=k<=k_max} lambda_k / lambda_{k+1}.
BaselineReport er(const spectra::ReturnPanel& panel, int k_max = 20);

}  // namespace sdfm::baselines
