#include "qkd/security.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qkd/errors.hpp"

namespace qkd::security {

namespace {

double xlog2x(double x) {
    return x > 0.0 ? x * std::log2(x) : 0.0;
}

double clamp_nu(double nu, const char* where) {
    if (nu < 1.0 - 1e-8) {
        std::ostringstream msg;
        msg << where << ": symplectic eigenvalue " << nu << " below 1";
        throw physicality_error(msg.str());
    }
    return std::max(nu, 1.0);
}

} // namespace

void ReconciliationConfig::validate() const {
    if (!(beta_rec > 0.0) || beta_rec > 1.0) {
        throw std::invalid_argument("beta_rec must lie in (0, 1]");
    }
}

double binary_entropy(double e) {
    if (e < 0.0 || e > 1.0) {
        throw std::domain_error("binary entropy needs e in [0, 1]");
    }
    return -xlog2x(e) - xlog2x(1.0 - e);
}

double g_entropy(double nu) {
    if (nu < 1.0 - 1e-9) {
        std::ostringstream msg;
        msg << "g_entropy domain error: nu = " << nu;
        throw std::domain_error(msg.str());
    }
    nu = std::max(nu, 1.0);
    return xlog2x((nu + 1.0) / 2.0) - xlog2x((nu - 1.0) / 2.0);
}

std::pair<double, double> symplectic_eigenvalues(const TwoModeCovariance& cov) {
    double det_a = cov.a_block().determinant();
    double det_b = cov.b_block().determinant();
    double det_c = cov.c_block().determinant();
    double delta = det_a + det_b + 2.0 * det_c;
    double det_g = cov.matrix().determinant();
    double disc = delta * delta - 4.0 * det_g;
    disc = std::max(disc, 0.0);
    double root = std::sqrt(disc);
    double nu1 = std::sqrt(std::max((delta + root) / 2.0, 0.0));
    double nu2 = std::sqrt(std::max((delta - root) / 2.0, 0.0));
    return {clamp_nu(nu1, "symplectic_eigenvalues"),
            clamp_nu(nu2, "symplectic_eigenvalues")};
}

std::pair<double, double> symplectic_spectrum_via_omega(const TwoModeCovariance& cov) {
    Eigen::Matrix4d og = TwoModeCovariance::omega() * cov.matrix();
    Eigen::EigenSolver<Eigen::Matrix4d> es(og);
    std::array<double, 4> mags{};
    for (int i = 0; i < 4; ++i) {
        mags[i] = std::abs(es.eigenvalues()(i));
    }
    std::sort(mags.begin(), mags.end(), std::greater<>());
    // Eigenvalues of Omega*gamma come in +-i nu pairs.
    return {0.5 * (mags[0] + mags[1]), 0.5 * (mags[2] + mags[3])};
}

double conditioned_nu(const TwoModeCovariance& cov, Quadrature measured) {
    int q = (measured == Quadrature::X) ? 0 : 1;
    Eigen::Matrix2d a = cov.a_block();
    Eigen::Matrix2d c = cov.c_block();
    Eigen::Matrix2d b = cov.b_block();
    double pivot = b(q, q);
    if (!(pivot > 0.0)) {
        throw physicality_error("homodyne conditioning on a non-positive variance");
    }
    // A - C (X B X)^+ C^T with X selecting the measured quadrature.
    Eigen::Matrix2d cond = a -c.col(q) * c.col(q).transpose() / pivot;
    double det = cond.determinant();
    if (det < 0.0 && det > -1e-12) {
        det = 0.0;
    }
    if (det < 0.0) {
        throw physicality_error("conditioned covariance has negative determinant");
    }
    return clamp_nu(std::sqrt(det), "conditioned_nu");
}

double holevo_bE(const TwoModeCovariance& cov_after_channel, Quadrature measured) {
    cov_after_channel.require_physical();
    auto [nu1, nu2] = symplectic_eigenvalues(cov_after_channel);
    double nu3 = conditioned_nu(cov_after_channel, measured);
    double s = g_entropy(nu1) + g_entropy(nu2) - g_entropy(nu3);
    if (s < -1e-9) {
        std::ostringstream msg;
        msg << "Holevo bound came out negative (" << s << ")";
        throw physicality_error(msg.str());
    }
    return std::max(s, 0.0);
}

double bob_ber(double alpha, const channel::ChannelParams& ch) {
    ch.validate();
    double arg = std::sqrt(ch.eta) * alpha / std::sqrt(1.0 + ch.eta * ch.epsilon);
    return 0.5 * std::erfc(arg);
}

double alice_ber(double beta) {
    return 0.5 * std::erfc(beta / std::sqrt(2.0));
}

double analytic_ber(double alpha, double beta, const channel::ChannelParams& ch,
                    bool include_alice_error) {
    double e_b = bob_ber(alpha, ch);
    if (!include_alice_error) {
        return e_b;
    }
    double e_a = alice_ber(beta);
    return e_a + e_b - 2.0 * e_a * e_b;
}

KeyRateReport key_rate_from_covariance(const TwoModeCovariance& post_channel,
                                       double ber, const ReconciliationConfig& rec,
                                       bool half_sifting_factor) {
    rec.validate();
    KeyRateReport r;
    r.ber = ber;
    r.i_ab = 1.0 - binary_entropy(ber);
    auto [nu1, nu2] = symplectic_eigenvalues(post_channel);
    r.nu1 = nu1;
    r.nu2 = nu2;
    r.nu3 = conditioned_nu(post_channel, Quadrature::X);
    r.s_bE = holevo_bE(post_channel, Quadrature::X);
    r.k_rate = rec.beta_rec * r.i_ab - r.s_bE;
    if (half_sifting_factor) {
        r.k_rate *= 0.5;
    }
    return r;
}

KeyRateReport key_rate(const protocol::ModulationParams& mod,
                       const channel::ChannelParams& ch,
                       const ReconciliationConfig& rec,
                       const KeyRateOptions& opts) {
    mod.validate();
    ch.validate();
    EbCovariance source = (opts.scheme == Scheme::Improved)
                              ? protocol::purified_source_covariance(mod.alpha)
                              : protocol::mixed_scheme_covariance(mod.alpha, mod.beta);
    TwoModeCovariance post =
        channel::apply_to_covariance(source, ch).to_two_mode();
    double ber = analytic_ber(mod.alpha, mod.beta, ch, opts.include_alice_error);
    KeyRateReport r = key_rate_from_covariance(post, ber, rec, opts.half_sifting_factor);
    r.eta = ch.eta;
    r.epsilon = ch.epsilon;
    r.distance_km = channel::eta_to_distance(ch.eta, ch.loss_db_per_km);
    return r;
}

} // namespace qkd::security
