#include "qkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qkd/errors.hpp"

namespace qkd::protocol {

double theta(int m) {
    return (2 * m + 1) * std::numbers::pi / 4.0;
}

void ModulationParams::validate() const {
    if (!std::isfinite(alpha) || alpha <= 0.0) {
        throw std::invalid_argument("alpha must be finite and > 0");
    }
    if (!std::isfinite(beta) || beta <= 0.0) {
        throw std::invalid_argument("beta must be finite and > 0");
    }
}

FourStateSpectrum four_state_spectrum(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("alpha must be finite and >= 0");
    }
    double a2 = alpha * alpha;
    double damp = std::exp(-a2);
    FourStateSpectrum s;
    s.lambda[0] = 0.5 * damp * (std::cosh(a2) + std::cos(a2));
    s.lambda[1] = 0.5 * damp * (std::sinh(a2) + std::sin(a2));
    s.lambda[2] = 0.5 * damp * (std::cosh(a2) - std::cos(a2));
    s.lambda[3] = 0.5 * damp * (std::sinh(a2) - std::sin(a2));
    for (double& l : s.lambda) {
        l = std::max(l, 0.0); // cancellation can leave a tiny negative at alpha -> 0
    }
    return s;
}

double four_state_correlation(double alpha) {
    FourStateSpectrum s = four_state_spectrum(alpha);
    double z = 0.0;
    for (int k = 0; k < 4; ++k) {
        double prev = s.lambda[(k + 3) % 4];
        if (s.lambda[k] <= 0.0) {
            continue; // vanishing eigenvalue carries no weight at alpha -> 0
        }
        z += std::pow(prev, 1.5) / std::sqrt(s.lambda[k]);
    }
    return 2.0 * alpha * alpha * z;
}

EbCovariance four_state_source_covariance(double alpha) {
    double v = 1.0 + 2.0 * alpha * alpha;
    double z = four_state_correlation(alpha);
    EbCovariance cov{v, v, z, CorrKind::SigmaZ};
    // Factored form (v+1)(v-1) avoids the cancellation in v^2 - 1 near the
    // vacuum; the slack covers the remaining representation error of v.
    double zmax = std::sqrt((v + 1.0) * (v - 1.0));
    if (z > zmax * (1.0 + 1e-9) + 1e-9) {
        std::ostringstream msg;
        msg << "four-state correlation " << z << " exceeds the physical bound "
            << zmax << " at alpha=" << alpha;
        throw physicality_error(msg.str());
    }
    return cov;
}

EbCovariance purified_source_covariance(double alpha) {
    double v = 1.0 + 2.0 * alpha * alpha;
    return EbCovariance{v, v, std::sqrt(v * v - 1.0), CorrKind::SigmaZ};
}

EbCovariance mixed_scheme_covariance(double alpha, double beta) {
    if (alpha < 0.0 || beta < 0.0) {
        throw std::invalid_argument("amplitudes must be >= 0");
    }
    return EbCovariance{1.0 + 2.0 * beta * beta, 1.0 + 2.0 * alpha * alpha,
                        2.0 * alpha * beta, CorrKind::Identity};
}

double heterodyne_mean_x(double beta, int m) {
    return std::numbers::sqrt2 * beta * std::cos(theta(m));
}

double heterodyne_mean_p(double beta, int m) {
    return std::numbers::sqrt2 * beta * std::sin(theta(m));
}

double signal_mean_x(double alpha, int m) {
    return 2.0 * alpha * std::cos(theta(m));
}

double signal_mean_p(double alpha, int m) {
    return 2.0 * alpha * std::sin(theta(m));
}

std::array<double, 4> conditional_coefficients(double x_a, double p_a, double beta) {
    if (!(beta > 0.0) || !std::isfinite(x_a) || !std::isfinite(p_a)) {
        throw std::invalid_argument("conditional coefficients need beta > 0 and finite outcomes");
    }
    // Unit-variance Gaussian likelihoods; only exponent differences matter.
    std::array<double, 4> logw{};
    for (int m = 0; m < 4; ++m) {
        double dx = x_a - heterodyne_mean_x(beta, m);
        double dp = p_a - heterodyne_mean_p(beta, m);
        logw[m] = -0.5 * (dx * dx + dp * dp);
    }
    double top = *std::max_element(logw.begin(), logw.end());
    std::array<double, 4> c{};
    double norm = 0.0;
    for (int m = 0; m < 4; ++m) {
        c[m] = std::exp(logw[m] - top);
        norm += c[m];
    }
    for (double& v : c) {
        v /= norm;
    }
    return c;
}

} // namespace qkd::protocol
