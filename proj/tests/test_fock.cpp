#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "qkd/errors.hpp"
#include "qkd/fock.hpp"
#include "qkd/oracle.hpp"
#include "qkd/protocol.hpp"

using namespace qkd;
using fock::Complex;
using fock::TruncationConfig;

namespace {

std::vector<Complex> four_states(double amplitude) {
    std::vector<Complex> amps;
    for (int m = 0; m < 4; ++m) {
        amps.push_back(std::polar(amplitude, protocol::theta(m)));
    }
    return amps;
}

} // namespace

TEST_CASE("coherent state: vacuum amplitude") {
    auto v = fock::coherent_state(0.0, {8, 1e-10});
    CHECK(std::abs(v(0) - 1.0) < 1e-15);
    for (int n = 1; n < 8; ++n) {
        CHECK(std::abs(v(n)) == 0.0);
    }
}

TEST_CASE("coherent state: mean photon number by direct sum") {
    auto v = fock::coherent_state(0.5, {32, 1e-10});
    double mean_n = 0.0;
    for (int n = 0; n < 32; ++n) {
        mean_n += n * std::norm(v(n));
    }
    CHECK(std::abs(mean_n - 0.25) < 1e-10);
    CHECK(std::abs(v.squaredNorm() - 1.0) < 1e-10);
}

TEST_CASE("coherent state: truncation overflow") {
    // Poisson(4) keeps under 60% of its weight below n = 4.
    CHECK(fock::coherent_tail_norm(2.0, 4) > 0.4);
    CHECK_THROWS_AS(fock::coherent_state(2.0, {4, 0.3}), truncation_error);
    try {
        fock::coherent_state(2.0, {4, 1e-10});
        FAIL("expected truncation_error");
    } catch (const truncation_error& e) {
        CHECK(e.suggested_dim() >= 16);
        CHECK(fock::coherent_tail_norm(2.0, e.suggested_dim()) <= 1e-10);
    }
}

TEST_CASE("ladder algebra is exact") {
    TruncationConfig trunc{16, 1e-10};
    auto a = fock::annihilation(trunc);
    for (int n = 0; n + 1 < 16; ++n) {
        CHECK(a(n, n + 1).real() == std::sqrt(static_cast<double>(n + 1)));
        CHECK(a(n, n + 1).imag() == 0.0);
    }
}

TEST_CASE("quadrature operators") {
    SUBCASE("dim 2 x matrix") {
        auto q = fock::quadrature_operators({2, 1e-10});
        CHECK(q.x(0, 0) == Complex(0.0));
        CHECK(q.x(0, 1) == Complex(1.0));
        CHECK(q.x(1, 0) == Complex(1.0));
        CHECK(q.x(1, 1) == Complex(0.0));
    }
    SUBCASE("vacuum variance is one shot-noise unit") {
        TruncationConfig trunc{16, 1e-10};
        auto q = fock::quadrature_operators(trunc);
        auto vac = fock::coherent_state(0.0, trunc);
        Complex xx = vac.dot(q.x * (q.x * vac));
        CHECK(std::abs(xx.real() - 1.0) < 1e-14);
    }
    SUBCASE("coherent displacement appears as 2 Re amp") {
        TruncationConfig trunc{32, 1e-10};
        auto q = fock::quadrature_operators(trunc);
        auto v = fock::coherent_state(0.5, trunc);
        CHECK(std::abs((v.dot(q.x * v)).real() - 1.0) < 1e-12);
        CHECK(std::abs((v.dot(q.p * v)).real()) < 1e-12);
    }
    SUBCASE("commutator 2i below the truncation edge") {
        TruncationConfig trunc{24, 1e-10};
        auto q = fock::quadrature_operators(trunc);
        fock::FockOperator comm = q.x * q.p - q.p * q.x;
        for (int i = 0; i < 23; ++i) {
            for (int j = 0; j < 23; ++j) {
                Complex expected = (i == j) ? Complex(0.0, 2.0) : Complex(0.0);
                CHECK(std::abs(comm(i, j) - expected) < 1e-12);
            }
        }
    }
}

TEST_CASE("density from coherent mixture") {
    TruncationConfig trunc{32, 1e-10};
    SUBCASE("single vacuum term") {
        auto rho = fock::density_from_coherent_mixture({0.0}, {1.0}, trunc);
        CHECK(std::abs(rho(0, 0).real() - 1.0) < 1e-15);
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-14);
    }
    SUBCASE("weights must sum to one") {
        CHECK_THROWS_AS(fock::density_from_coherent_mixture({0.1, 0.2}, {0.6, 0.3}, trunc),
                        std::invalid_argument);
    }
    SUBCASE("four-state eigenvalues match the closed-form spectrum") {
        auto rho = fock::density_from_coherent_mixture(
            four_states(0.5), {0.25, 0.25, 0.25, 0.25}, {64, 1e-10});
        auto sys = fock::hermitian_eigensystem(rho);
        auto spectrum = protocol::four_state_spectrum(0.5);
        std::array<double, 4> closed = spectrum.lambda;
        std::sort(closed.begin(), closed.end(), std::greater<>());
        for (int k = 0; k < 4; ++k) {
            CHECK(std::abs(sys.values(k) - closed[k]) < 1e-10);
        }
    }
    SUBCASE("density invariants: hermitian, PSD, unit trace") {
        auto rho = fock::density_from_coherent_mixture(
            four_states(1.0), {0.25, 0.25, 0.25, 0.25}, {64, 1e-10});
        CHECK(fock::max_asymmetry(rho) < 1e-12);
        CHECK(fock::min_eigenvalue(rho) > -1e-10);
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-10);
    }
}

TEST_CASE("two-mode covariance of product vacuum is the identity") {
    TruncationConfig trunc{8, 1e-10};
    fock::SchmidtState vac;
    vac.coeffs = {1.0};
    vac.a_vectors = {fock::coherent_state(0.0, trunc)};
    vac.b_vectors = {fock::coherent_state(0.0, trunc)};
    auto cov = fock::two_mode_covariance(vac, trunc);
    CHECK((cov.matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two-mode covariance of the coherent mixture matches the closed form") {
    TruncationConfig trunc{64, 1e-10};
    fock::ProductMixture mix;
    auto amps_a = four_states(1.0);
    auto amps_b = four_states(0.5);
    for (int m = 0; m < 4; ++m) {
        mix.weights.push_back(0.25);
        mix.a_vectors.push_back(fock::coherent_state(amps_a[m], trunc));
        mix.b_vectors.push_back(fock::coherent_state(amps_b[m], trunc));
    }
    auto cov = fock::two_mode_covariance(mix, trunc);
    const auto& g = cov.matrix();
    CHECK(std::abs(g(0, 0) - 3.0) < 1e-10);
    CHECK(std::abs(g(1, 1) - 3.0) < 1e-10);
    CHECK(std::abs(g(2, 2) - 1.5) < 1e-10);
    CHECK(std::abs(g(3, 3) - 1.5) < 1e-10);
    CHECK(std::abs(g(0, 2) - 1.0) < 1e-10);
    CHECK(std::abs(g(1, 3) - 1.0) < 1e-10);
    CHECK(std::abs(g(0, 1)) < 1e-10); // cross x-p terms vanish by symmetry
    CHECK(std::abs(g(0, 3)) < 1e-10);
    CHECK(cov.physicality_margin() > -1e-8);
}

TEST_CASE("purified four-state covariance matches the closed-form v and z") {
    TruncationConfig trunc{64, 1e-10};
    auto state = oracle::purification_from_eigensystem(0.5, trunc);
    auto cov = fock::two_mode_covariance(state, trunc);
    const auto& g = cov.matrix();
    double v = 1.0 + 2.0 * 0.25;
    double z = protocol::four_state_correlation(0.5);
    CHECK(std::abs(g(0, 0) - v) < 1e-8);
    CHECK(std::abs(g(2, 2) - v) < 1e-8);
    CHECK(std::abs(g(0, 2) - z) < 1e-8);
    CHECK(std::abs(g(1, 3) + z) < 1e-8); // sigma_z pattern
    CHECK(cov.physicality_margin() > -1e-8);
}

TEST_CASE("covariance entries are truncation-stable") {
    auto build = [](int dim) {
        TruncationConfig trunc{dim, 1e-8};
        fock::ProductMixture mix;
        auto amps_a = four_states(1.0);
        auto amps_b = four_states(0.9);
        for (int m = 0; m < 4; ++m) {
            mix.weights.push_back(0.25);
            mix.a_vectors.push_back(fock::coherent_state(amps_a[m], trunc));
            mix.b_vectors.push_back(fock::coherent_state(amps_b[m], trunc));
        }
        return fock::two_mode_covariance(mix, trunc).matrix();
    };
    Eigen::Matrix4d small = build(64);
    Eigen::Matrix4d large = build(128);
    CHECK((small - large).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("quadrature wavefunction reproduces the homodyne Gaussian") {
    TruncationConfig trunc{64, 1e-10};
    Complex amp(0.4, -0.3);
    auto state = fock::coherent_state(amp, trunc);
    for (double value : {-2.0, -0.5, 0.0, 0.8, 2.5}) {
        double mean_x = 2.0 * amp.real();
        double expected_x = std::exp(-0.5 * (value - mean_x) * (value - mean_x)) /
                            std::sqrt(2.0 * std::numbers::pi);
        CHECK(std::abs(fock::homodyne_density_x(state, value) - expected_x) < 1e-10);
        double mean_p = 2.0 * amp.imag();
        double expected_p = std::exp(-0.5 * (value - mean_p) * (value - mean_p)) /
                            std::sqrt(2.0 * std::numbers::pi);
        CHECK(std::abs(fock::homodyne_density_p(state, value) - expected_p) < 1e-10);
    }
}
