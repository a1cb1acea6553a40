#include "sdfm/divergence.hpp"

#include <cmath>

namespace sdfm::divergence {

RegularizedDensity regularize(const spectra::SpectralDensity& density,
                              double epsilon) {
    if (!(epsilon > 0.0)) throw error("regularize requires epsilon > 0");
    const Index k = density.bins();
    if (k < 1) throw error("regularize requires at least one bin");

    Index zeros = 0;
    for (Index i = 0; i < k; ++i) {
        const double m = density.masses[i];
        if (m < 0.0) throw error("density mass must be nonnegative");
        if (m == 0.0) ++zeros;
    }
    if (zeros == k) throw error("all-zero density cannot be regularized");
    if (epsilon * static_cast<double>(zeros) >= 0.01)
        throw error("epsilon too large for the zero-bin count");

    RegularizedDensity out;
    out.epsilon_used = epsilon;
    out.alpha = 1.0 - static_cast<double>(zeros) * epsilon;
    out.masses = Vector(k);
    for (Index i = 0; i < k; ++i)
        out.masses[i] =
            density.masses[i] > 0.0 ? out.alpha * density.masses[i] : epsilon;
    return out;
}

double kl(const RegularizedDensity& p, const RegularizedDensity& q) {
    if (p.masses.size() != q.masses.size())
        throw error("divergence requires equal bin counts");
    double sum = 0.0;
    for (Index i = 0; i < p.masses.size(); ++i)
        sum += p.masses[i] * std::log(p.masses[i] / q.masses[i]);
    return sum;
}

double js(const spectra::SpectralDensity& p, const spectra::SpectralDensity& q,
          double epsilon) {
    if (p.bin_edges.size() != q.bin_edges.size() ||
        (p.bin_edges.array() != q.bin_edges.array()).any())
        throw error("divergence requires a shared grid");
    const RegularizedDensity rp = regularize(p, epsilon);
    const RegularizedDensity rq = regularize(q, epsilon);
    RegularizedDensity mix;
    mix.epsilon_used = epsilon;
    mix.masses = 0.5 * (rp.masses + rq.masses);
    return 0.5 * kl(rp, mix) + 0.5 * kl(rq, mix);
}

}  // namespace sdfm::divergence
