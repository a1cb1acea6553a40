#pragma once

#include "sdfm/common.hpp"
#include "sdfm/spectra.hpp"

#include <optional>

namespace sdfm::frv {

// Parameters of the limiting AR(1) residual spectrum: |b| < 1, aspect ratio
// c = N/T in (0, 1]; a_sq = 1 - b^2 exactly.
struct ModelParams {
    double b;
    double c;
    double a_sq;

    ModelParams(double b_, double c_);
};

// One evaluation of the moment generating function M(z) and Green's function
// G(z) = (M(z) + 1)/z at z = lambda + i*epsilon. `selected` satisfies the
// quartic within |poly(M)| / |lead| < 1e-8 and yields
// density = -(1/pi) Im G >= -1e-9.
struct GreenEvaluation {
    Complex z;
    std::array<Complex, 4> roots;
    Complex selected;
    Complex green;
    double density = 0.0;
};

// Coefficients, descending degree, of
//   a^4 c^2 M^4 + 2 a^2 c (-(1+b^2) z + a^2 c) M^3
//   + ((1-b^2)^2 z^2 - 2 a^2 c (1+b^2) z + (c^2-1) a^4) M^2
//   - 2 a^4 M - a^4.
std::array<Complex, 5> quartic_coefficients(const ModelParams& params,
                                            Complex z);

// Solves the quartic at z (Im z > 0 required) and picks the physical branch:
// admissible roots have Im M <= 1e-9 (M is a Stieltjes-type transform of a
// positive measure, so the physical branch keeps Im M < 0 in the upper half
// plane) and density >= -1e-9. With `previous` supplied the admissible root
// nearest to it is chosen (continuity tracking); otherwise the admissible
// root with the largest -Im M. No admissible root raises branch_error with
// all four candidates.
GreenEvaluation solve_moment_equation(const ModelParams& params, Complex z,
                                      std::optional<Complex> previous = {});

// Density evaluated at bin midpoints with z = mid + i*epsilon, tracking the
// branch left to right; masses are midpoint value x bin width with negatives
// in [-1e-9, 0) clipped to zero, then renormalized to total mass 1.
spectra::SpectralDensity model_density(const ModelParams& params,
                                       const Vector& bin_edges,
                                       double epsilon = 1e-3);

// Closed-form Marchenko-Pastur density for unit variance and ratio c,
// sampled at bin midpoints and normalized the same way as model_density.
spectra::SpectralDensity mp_density(double c, const Vector& bin_edges);

// Support edges (1 -+ sqrt(c))^2 of the MP law.
double mp_lower_edge(double c);
double mp_upper_edge(double c);

// Pointwise MP density value.
double mp_value(double c, double lambda);

}  // namespace sdfm::frv
