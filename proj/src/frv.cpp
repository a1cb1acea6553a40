#include "sdfm/frv.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace sdfm::frv {

namespace {

constexpr double kBranchImTol = 1e-9;
constexpr double kDensityTol = 1e-9;

std::array<Complex, 4> quartic_roots(const std::array<Complex, 5>& coeff) {
    // Companion matrix of the monic polynomial, then one Newton step to
    // polish each eigenvalue against the original coefficients.
    const Complex lead = coeff[0];
    Eigen::Matrix4cd companion = Eigen::Matrix4cd::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(3, 2) = 1.0;
    for (int i = 0; i < 4; ++i) companion(i, 3) = -coeff[4 - i] / lead;
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> solver(companion, false);

    std::array<Complex, 4> roots;
    for (int i = 0; i < 4; ++i) {
        Complex m = solver.eigenvalues()[i];
        Complex value = coeff[0];
        Complex derivative = 0.0;
        for (int j = 1; j < 5; ++j) {
            derivative = derivative * m + value;
            value = value * m + coeff[j];
        }
        if (std::abs(derivative) > 0.0) {
            Complex step = value / derivative;
            if (std::isfinite(step.real()) && std::isfinite(step.imag()))
                m -= step;
        }
        roots[i] = m;
    }
    return roots;
}

double density_of(Complex m, Complex z) {
    return -std::imag((m + 1.0) / z) / M_PI;
}

}  // namespace

ModelParams::ModelParams(double b_, double c_) : b(b_), c(c_) {
    if (!(std::abs(b) < 1.0))
        throw error("AR(1) coefficient requires |b| < 1");
    if (!(c > 0.0))
        throw error("aspect ratio requires c > 0");
    if (c > 1.0)
        throw error("aspect ratio c > 1 (more series than observations) is "
                    "not supported");
    a_sq = 1.0 - b * b;
}

std::array<Complex, 5> quartic_coefficients(const ModelParams& params,
                                            Complex z) {
    const double a2 = params.a_sq;
    const double a4 = a2 * a2;
    const double b2 = params.b * params.b;
    const double c = params.c;
    return {
        Complex(a4 * c * c),
        2.0 * a2 * c * (-(1.0 + b2) * z + a2 * c),
        a4 * z * z - 2.0 * a2 * c * (1.0 + b2) * z + (c * c - 1.0) * a4,
        Complex(-2.0 * a4),
        Complex(-a4),
    };
}

GreenEvaluation solve_moment_equation(const ModelParams& params, Complex z,
                                      std::optional<Complex> previous) {
    if (!(z.imag() > 0.0))
        throw error("moment equation requires Im z > 0");
    GreenEvaluation out;
    out.z = z;
    out.roots = quartic_roots(quartic_coefficients(params, z));

    int chosen = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    double best_distance = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        const Complex m = out.roots[i];
        if (!(m.imag() <= kBranchImTol)) continue;
        if (!(density_of(m, z) >= -kDensityTol)) continue;
        if (previous) {
            const double distance = std::abs(m - *previous);
            if (distance < best_distance) {
                best_distance = distance;
                chosen = i;
            }
        } else {
            const double score = -m.imag();
            if (score > best_score) {
                best_score = score;
                chosen = i;
            }
        }
    }
    if (chosen < 0) throw branch_error(z, out.roots);

    out.selected = out.roots[chosen];
    out.green = (out.selected + 1.0) / z;
    out.density = -out.green.imag() / M_PI;
    return out;
}

spectra::SpectralDensity model_density(const ModelParams& params,
                                       const Vector& bin_edges,
                                       double epsilon) {
    if (!(epsilon > 0.0)) throw error("model_density requires epsilon > 0");
    const Index k = bin_edges.size() - 1;
    if (k < 1) throw error("model_density requires at least one bin");
    for (Index i = 0; i < k; ++i)
        if (!(bin_edges[i] < bin_edges[i + 1]))
            throw error("bin edges must be strictly increasing");

    spectra::SpectralDensity out;
    out.bin_edges = bin_edges;
    out.masses = Vector::Zero(k);
    std::optional<Complex> previous;
    for (Index i = 0; i < k; ++i) {
        const double mid = 0.5 * (bin_edges[i] + bin_edges[i + 1]);
        const double width = bin_edges[i + 1] - bin_edges[i];
        GreenEvaluation eval;
        try {
            eval = solve_moment_equation(params, Complex(mid, epsilon),
                                         previous);
        } catch (const branch_error&) {
            std::ostringstream msg;
            msg << "branch selection failed at lambda = " << mid;
            throw error(msg.str());
        }
        previous = eval.selected;
        double density = eval.density;
        if (density < 0.0) density = 0.0;  // admissible roots sit >= -1e-9
        out.masses[i] = density * width;
    }
    const double total = out.masses.sum();
    if (!(total > 0.0)) throw error("model density carries no mass on grid");
    out.masses /= total;
    return out;
}

double mp_lower_edge(double c) {
    const double s = std::sqrt(c);
    return (1.0 - s) * (1.0 - s);
}

double mp_upper_edge(double c) {
    const double s = std::sqrt(c);
    return (1.0 + s) * (1.0 + s);
}

double mp_value(double c, double lambda) {
    const double lo = mp_lower_edge(c), hi = mp_upper_edge(c);
    if (lambda <= lo || lambda >= hi) return 0.0;
    return std::sqrt((hi - lambda) * (lambda - lo)) /
           (2.0 * M_PI * c * lambda);
}

spectra::SpectralDensity mp_density(double c, const Vector& bin_edges) {
    if (!(c > 0.0 && c <= 1.0))
        throw error("MP density requires 0 < c <= 1");
    const Index k = bin_edges.size() - 1;
    if (k < 1) throw error("mp_density requires at least one bin");

    spectra::SpectralDensity out;
    out.bin_edges = bin_edges;
    out.masses = Vector::Zero(k);
    for (Index i = 0; i < k; ++i) {
        const double mid = 0.5 * (bin_edges[i] + bin_edges[i + 1]);
        const double width = bin_edges[i + 1] - bin_edges[i];
        out.masses[i] = mp_value(c, mid) * width;
    }
    const double total = out.masses.sum();
    if (!(total > 0.0)) throw error("grid does not intersect the MP support");
    out.masses /= total;
    return out;
}

}  // namespace sdfm::frv

namespace sdfm {

branch_error::branch_error(Complex z_, const std::array<Complex, 4>& roots_)
    : error("no admissible branch for the moment equation"),
      z(z_),
      roots(roots_) {}

}  // namespace sdfm
