#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdfm/divergence.hpp"
#include "sdfm/frv.hpp"
#include "sdfm/spectra.hpp"
#include "sdfm/synth.hpp"

#include <cmath>
#include <vector>

using namespace sdfm;

namespace {

double pooled_variance(const Matrix& m) {
    const double mean = m.mean();
    return (m.array() - mean).square().sum() /
           static_cast<double>(m.size());
}

double row_lag1_autocorr(const Matrix& m, Index i) {
    const Index t = m.cols();
    double num = 0.0, den = 0.0;
    for (Index s = 1; s < t; ++s) num += m(i, s) * m(i, s - 1);
    for (Index s = 0; s < t; ++s) den += m(i, s) * m(i, s);
    return num / den;
}

double row_correlation(const Matrix& m, Index i, Index j) {
    const Vector a = m.row(i).transpose().array() - m.row(i).mean();
    const Vector b = m.row(j).transpose().array() - m.row(j).mean();
    return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

// Raw covariance spectrum histogrammed on a shared grid, as the mean-field
// comparison uses it.
double spectral_js(const Matrix& y, const Matrix& z) {
    const double t = static_cast<double>(y.cols());
    const Vector ly =
        spectra::symmetric_eigenvalues_desc(y * y.transpose() / t);
    const Vector lz =
        spectra::symmetric_eigenvalues_desc(z * z.transpose() / t);
    const double top = 1.1 * std::max(ly[0], lz[0]);
    const Vector edges = spectra::uniform_edges(0.0, top, 100);
    const auto dy = spectra::empirical_density(
        std::vector<double>(ly.data(), ly.data() + ly.size()), edges, 0);
    const auto dz = spectra::empirical_density(
        std::vector<double>(lz.data(), lz.data() + lz.size()), edges, 0);
    return divergence::js(dy, dz);
}

}  // namespace

TEST_CASE("the noise scale follows the factor count") {
    synth::SyntheticConfig config;
    config.inv_snr = 0.25;
    config.p_true = 4;
    CHECK(config.theta() == 1.0);
    config.p_true = 0;  // noise-only panels keep a finite scale
    CHECK(config.theta() == 0.25);
}

TEST_CASE("configuration validation") {
    synth::SyntheticConfig config;
    config.N = 50;
    config.T = 100;
    config.p_true = 2;
    CHECK_NOTHROW(config.validate());

    auto broken = config;
    broken.N = 1;
    CHECK_THROWS_AS(broken.validate(), error);
    broken = config;
    broken.p_true = -1;
    CHECK_THROWS_AS(broken.validate(), error);
    broken = config;
    broken.p_true = 50;
    CHECK_THROWS_AS(broken.validate(), error);
    broken = config;
    broken.inv_snr = 0.0;
    CHECK_THROWS_AS(broken.validate(), error);
    broken = config;
    broken.rho = 1.0;
    CHECK_THROWS_AS(broken.validate(), error);
    broken = config;
    broken.beta = 1.5;
    CHECK_THROWS_AS(broken.validate(), error);
    broken = config;
    broken.J = 50;
    CHECK_THROWS_AS(broken.validate(), error);
    broken = config;
    broken.J = -1;
    CHECK_THROWS_AS(broken.validate(), error);
    broken = config;
    broken.sigma_weak = 0.0;
    CHECK_THROWS_AS(broken.validate(), error);
    broken = config;
    broken.weak_count = 3;  // > p_true
    CHECK_THROWS_AS(broken.validate(), error);
}

TEST_CASE("independent noise has unit variance") {
    synth::SyntheticConfig config;
    config.N = 200;
    config.T = 500;
    config.p_true = 0;
    config.seed = 1;
    const auto generated = synth::generate(config);
    CHECK(pooled_variance(generated.truth.residual_noise) ==
          doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("autocorrelated rows match the AR(1) oracle") {
    synth::SyntheticConfig config;
    config.N = 100;
    config.T = 2000;
    config.p_true = 0;
    config.rho = 0.5;
    config.seed = 2;
    const auto generated = synth::generate(config);
    const Matrix& u = generated.truth.residual_noise;
    for (Index i = 0; i < u.rows(); ++i)
        CHECK(row_lag1_autocorr(u, i) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("a factorless panel is exactly scaled noise") {
    synth::SyntheticConfig config;
    config.N = 40;
    config.T = 60;
    config.p_true = 0;
    config.inv_snr = 0.25;
    config.seed = 3;
    const auto generated = synth::generate(config);
    const Matrix expected =
        std::sqrt(config.theta()) * generated.truth.residual_noise;
    CHECK((generated.panel.values.array() == expected.array()).all());
    CHECK(generated.truth.loadings.cols() == 0);
    CHECK(generated.truth.factors.rows() == 0);
}

TEST_CASE("residual variance stays within 2% across correlation settings") {
    const double settings[4][2] = {
        {0.0, 0.0}, {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}};
    for (const auto& [rho, beta] : settings) {
        synth::SyntheticConfig config;
        config.N = 200;
        config.T = 500;
        config.p_true = 0;
        config.rho = rho;
        config.beta = beta;
        config.J = config.N / 10;
        config.seed = 4;
        const auto generated = synth::generate(config);
        CHECK(pooled_variance(generated.truth.residual_noise) ==
              doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("clamped edge rows keep unit variance") {
    synth::SyntheticConfig config;
    config.N = 50;
    config.T = 20000;
    config.p_true = 0;
    config.beta = 0.5;
    config.J = 5;
    config.seed = 5;
    const auto generated = synth::generate(config);
    const Matrix& u = generated.truth.residual_noise;
    for (const Index row : {Index{0}, Index{2}, Index{25}, Index{49}}) {
        const double var =
            u.row(row).squaredNorm() / static_cast<double>(u.cols());
        CHECK(var == doctest::Approx(1.0).epsilon(0.04));
    }
}

TEST_CASE("generation is seed deterministic") {
    synth::SyntheticConfig config;
    config.N = 30;
    config.T = 50;
    config.p_true = 3;
    config.rho = 0.4;
    config.beta = 0.3;
    config.J = 3;
    config.seed = 6;
    const auto a = synth::generate(config);
    const auto b = synth::generate(config);
    CHECK((a.panel.values.array() == b.panel.values.array()).all());
    CHECK((a.truth.loadings.array() == b.truth.loadings.array()).all());
    CHECK((a.truth.factors.array() == b.truth.factors.array()).all());

    config.seed = 7;
    const auto c = synth::generate(config);
    CHECK((a.panel.values.array() != c.panel.values.array()).any());
}

TEST_CASE("neighbor mixing correlates nearby rows only") {
    synth::SyntheticConfig config;
    config.N = 200;
    config.T = 5000;
    config.p_true = 0;
    config.beta = 0.5;
    config.J = 20;
    config.seed = 8;
    const auto generated = synth::generate(config);
    const Matrix& u = generated.truth.residual_noise;

    double adjacent = 0.0;
    int adjacent_count = 0;
    for (Index i = 0; i + 1 < u.rows(); ++i) {
        adjacent += row_correlation(u, i, i + 1);
        ++adjacent_count;
    }
    adjacent /= adjacent_count;

    double far = 0.0;
    int far_count = 0;
    for (Index i = 0; i + 41 < u.rows(); i += 3) {
        far += row_correlation(u, i, i + 41);  // beyond 2J = 40
        ++far_count;
    }
    far /= far_count;

    CHECK(adjacent > 0.0);
    CHECK(adjacent - far >= 0.1);
}

TEST_CASE("weak factor rows are scaled down") {
    synth::SyntheticConfig config;
    config.N = 100;
    config.T = 5000;
    config.p_true = 4;
    config.sigma_weak = 0.3;
    config.weak_count = 2;
    config.seed = 9;
    const auto generated = synth::generate(config);
    const Matrix& f = generated.truth.factors;
    REQUIRE(f.rows() == 4);
    for (int j = 0; j < 2; ++j) {
        const double sd =
            std::sqrt(f.row(j).squaredNorm() / static_cast<double>(f.cols()));
        CHECK(sd == doctest::Approx(1.0).epsilon(0.05));
    }
    for (int j = 2; j < 4; ++j) {
        const double sd =
            std::sqrt(f.row(j).squaredNorm() / static_cast<double>(f.cols()));
        CHECK(sd == doctest::Approx(0.3).epsilon(0.05));
    }
}

TEST_CASE("mean-field pairs with one coefficient share a law") {
    const auto [y, z] =
        synth::generate_meanfield_pair(300, 600, 0.5, 0.5, 0.5, 10);
    CHECK(pooled_variance(y.values) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(pooled_variance(z.values) == doctest::Approx(1.0).epsilon(0.02));
    // The panels are independent draws, so two 300-eigenvalue histograms on
    // 100 bins carry a finite-sample divergence floor near 0.035 even when
    // the laws coincide.
    CHECK(spectral_js(y.values, z.values) < 0.05);
}

TEST_CASE("a zero mean-field coefficient gives white noise") {
    const auto [y, z] =
        synth::generate_meanfield_pair(300, 600, 0.0, 1.0 - 1e-12, 0.0, 11);
    const double t = static_cast<double>(z.values.cols());
    const Vector eig = spectra::symmetric_eigenvalues_desc(
        z.values * z.values.transpose() / t);
    const Vector edges = spectra::uniform_edges(0.0, 1.1 * eig[0], 100);
    const auto empirical = spectra::empirical_density(
        std::vector<double>(eig.data(), eig.data() + eig.size()), edges, 0);
    const auto mp = frv::mp_density(0.5, edges);
    CHECK(divergence::js(empirical, mp) < 0.05);
}

TEST_CASE("mean-field validation") {
    CHECK_THROWS_AS(synth::generate_meanfield_pair(10, 20, 0.5, 0.4, 0.3, 1),
                    error);
    CHECK_THROWS_AS(synth::generate_meanfield_pair(10, 20, -0.1, 0.5, 0.3, 1),
                    error);
    CHECK_THROWS_AS(synth::generate_meanfield_pair(10, 20, 0.0, 1.0, 0.3, 1),
                    error);
    CHECK_THROWS_AS(synth::generate_meanfield_pair(10, 20, 0.0, 0.5, 1.0, 1),
                    error);
    CHECK_THROWS_AS(synth::generate_meanfield_pair(1, 20, 0.0, 0.5, 0.3, 1),
                    error);
}
