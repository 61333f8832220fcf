#include "qkd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qkd::oracle {

namespace {

using fock::FockVector;
using fock::TruncationConfig;

std::vector<fock::Complex> constellation(double amplitude) {
    std::vector<fock::Complex> amps;
    amps.reserve(4);
    for (int m = 0; m < 4; ++m) {
        amps.push_back(std::polar(amplitude, protocol::theta(m)));
    }
    return amps;
}

double max_abs(std::initializer_list<double> values) {
    double worst = 0.0;
    for (double v : values) {
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

} // namespace

double OracleReport::max_deviation() const {
    return max_abs({spectrum_dev, source_v_dev, source_z_dev, source_structure_dev,
                    mixed_entries_dev, mixed_structure_dev, coefficients_dev,
                    std::min(physicality_margin, 0.0)});
}

fock::SchmidtState purification_from_eigensystem(double alpha,
                                                 const TruncationConfig& trunc) {
    auto rho = fock::density_from_coherent_mixture(constellation(alpha),
                                                   {0.25, 0.25, 0.25, 0.25}, trunc);
    auto sys = fock::hermitian_eigensystem(rho);
    fock::SchmidtState state;
    for (int k = 0; k < 4; ++k) {
        double lambda = std::max(sys.values(k), 0.0);
        state.coeffs.push_back(std::sqrt(lambda));
        state.a_vectors.push_back(sys.vectors.col(k).conjugate());
        state.b_vectors.push_back(sys.vectors.col(k));
    }
    return state;
}

std::array<double, 4> coefficients_via_projectors(double x_a, double p_a, double beta,
                                                  const TruncationConfig& trunc) {
    // tr(M_p M_x rho(m) M_x' M_p') for the product of the two split modes,
    // i.e. the outcome densities of the truncated quadrature projectors.
    std::array<double, 4> weights{};
    double total = 0.0;
    for (int m = 0; m < 4; ++m) {
        fock::Complex split = std::polar(beta / std::numbers::sqrt2, protocol::theta(m));
        FockVector mode = fock::coherent_state(split, trunc);
        weights[m] = fock::homodyne_density_x(mode, x_a) * fock::homodyne_density_p(mode, p_a);
        total += weights[m];
    }
    for (double& w : weights) {
        w /= total;
    }
    return weights;
}

OracleReport run_checks(double alpha, double beta, const TruncationConfig& trunc) {
    trunc.validate();
    OracleReport rep;
    rep.alpha = alpha;
    rep.beta = beta;
    rep.dim = trunc.dim;

    // Closed-form spectrum against the dense eigendecomposition.
    auto rho = fock::density_from_coherent_mixture(constellation(alpha),
                                                   {0.25, 0.25, 0.25, 0.25}, trunc);
    auto sys = fock::hermitian_eigensystem(rho);
    auto spectrum = protocol::four_state_spectrum(alpha);
    std::array<double, 4> closed = spectrum.lambda;
    std::sort(closed.begin(), closed.end(), std::greater<>());
    for (int k = 0; k < 4; ++k) {
        rep.spectrum_dev = std::max(rep.spectrum_dev, std::abs(sys.values(k) - closed[k]));
    }
    // Everything beyond rank four is truncation noise.
    for (int k = 4; k < trunc.dim; ++k) {
        rep.spectrum_dev = std::max(rep.spectrum_dev, std::abs(sys.values(k)));
    }

    // Purification covariance against the closed-form (v, z).
    auto purification = purification_from_eigensystem(alpha, trunc);
    TwoModeCovariance source_cov = fock::two_mode_covariance(purification, trunc);
    rep.physicality_margin = source_cov.physicality_margin();
    EbCovariance closed_source = protocol::four_state_source_covariance(alpha);
    const Eigen::Matrix4d& g = source_cov.matrix();
    rep.source_v_dev = max_abs({g(0, 0) - closed_source.v_a, g(1, 1) - closed_source.v_a,
                                g(2, 2) - closed_source.v_b, g(3, 3) - closed_source.v_b});
    rep.source_z_dev = max_abs({g(0, 2) - closed_source.c, g(1, 3) + closed_source.c});
    rep.source_structure_dev = max_abs({g(0, 1), g(2, 3), g(0, 3), g(1, 2)});

    // Two-mode mixture covariance against the closed-form entries.
    fock::ProductMixture mixture;
    auto amps_a = constellation(beta);
    auto amps_b = constellation(alpha);
    for (int m = 0; m < 4; ++m) {
        mixture.weights.push_back(0.25);
        mixture.a_vectors.push_back(fock::coherent_state(amps_a[m], trunc));
        mixture.b_vectors.push_back(fock::coherent_state(amps_b[m], trunc));
    }
    TwoModeCovariance mixed_cov = fock::two_mode_covariance(mixture, trunc);
    rep.physicality_margin =
        std::min(rep.physicality_margin, mixed_cov.physicality_margin());
    EbCovariance closed_mixed = protocol::mixed_scheme_covariance(alpha, beta);
    const Eigen::Matrix4d& h = mixed_cov.matrix();
    rep.mixed_entries_dev =
        max_abs({h(0, 0) - closed_mixed.v_a, h(1, 1) - closed_mixed.v_a,
                 h(2, 2) - closed_mixed.v_b, h(3, 3) - closed_mixed.v_b,
                 h(0, 2) - closed_mixed.c, h(1, 3) - closed_mixed.c});
    rep.mixed_structure_dev = max_abs({h(0, 1), h(2, 3), h(0, 3), h(1, 2)});

    // Posterior coefficients: Gaussian formula against the projector route
    // over a grid of heterodyne outcomes covering the constellation.
    double spread = std::numbers::sqrt2 * beta + 2.0;
    for (int ix = -2; ix <= 2; ++ix) {
        for (int ip = -2; ip <= 2; ++ip) {
            double x_a = spread * ix / 2.0;
            double p_a = spread * ip / 2.0;
            auto formula = protocol::conditional_coefficients(x_a, p_a, beta);
            auto projected = coefficients_via_projectors(x_a, p_a, beta, trunc);
            for (int m = 0; m < 4; ++m) {
                rep.coefficients_dev =
                    std::max(rep.coefficients_dev, std::abs(formula[m] - projected[m]));
            }
        }
    }
    return rep;
}

} // namespace qkd::oracle
