#ifndef QKD_SECURITY_HPP
#define QKD_SECURITY_HPP

#include <array>
#include <utility>

#include "qkd/channel.hpp"
#include "qkd/covariance.hpp"
#include "qkd/protocol.hpp"

namespace qkd::security {

struct ReconciliationConfig {
    double beta_rec = 0.8;

    void validate() const; // beta_rec in (0, 1]
};

enum class Scheme {
    Improved, // pure purified source; zero leak on the identity channel
    Mixed,    // separable two-mode mixture; negative rate even at eta = 1
};

enum class Quadrature { X, P };

struct KeyRateOptions {
    Scheme scheme = Scheme::Improved;
    bool include_alice_error = true; // fold Alice's discrimination error into the BER
    bool half_sifting_factor = false; // optional x1/2 on the final rate
};

/// Per-channel-point key-rate record.
struct KeyRateReport {
    double distance_km = 0.0;
    double eta = 1.0;
    double epsilon = 0.0;
    double ber = 0.0;    // bit error rate between the sifted strings
    double i_ab = 0.0;   // 1 - H2(ber), bits/symbol
    double s_bE = 0.0;   // Holevo bound on Eve's information about Bob
    double nu1 = 1.0;    // symplectic eigenvalues of the post-channel state
    double nu2 = 1.0;
    double nu3 = 1.0;    // of the homodyne-conditioned A block
    double k_rate = 0.0; // beta_rec * i_ab - s_bE (times 1/2 if sifted)
};

/// Binary entropy in bits; H2(0) = H2(1) = 0.
double binary_entropy(double e);

/// Von Neumann entropy of a thermal symplectic mode,
/// G(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2).
/// Values in [1 - 1e-9, 1) clamp to 1; below that is a domain error.
double g_entropy(double nu);

/// Closed-form symplectic eigenvalues (nu1 >= nu2 >= 1) from the invariants
/// Delta = det A + det B + 2 det C and D = det gamma.
std::pair<double, double> symplectic_eigenvalues(const TwoModeCovariance& cov);

/// Generic route: moduli of the eigenvalues of i*Omega*gamma.  Used as the
/// independent check on the closed form.
std::pair<double, double> symplectic_spectrum_via_omega(const TwoModeCovariance& cov);

/// Holevo bound S(b:E) = S(AB) - S(A|b) for a homodyne measurement of the
/// given quadrature on mode B.  Small negative round-off clamps to zero.
double holevo_bE(const TwoModeCovariance& cov_after_channel, Quadrature measured);

/// Conditional symplectic eigenvalue of the A block after Bob's homodyne.
double conditioned_nu(const TwoModeCovariance& cov, Quadrature measured);

/// Matched-quadrature sign error rates.  Bob: half erfc(sqrt(eta) alpha /
/// sqrt(1 + eta epsilon)); Alice: half erfc(beta / sqrt(2)); combined by XOR.
double bob_ber(double alpha, const channel::ChannelParams& ch);
double alice_ber(double beta);
double analytic_ber(double alpha, double beta, const channel::ChannelParams& ch,
                    bool include_alice_error = true);

/// Full asymptotic key-rate evaluation at one channel point.
KeyRateReport key_rate(const protocol::ModulationParams& mod,
                       const channel::ChannelParams& ch,
                       const ReconciliationConfig& rec,
                       const KeyRateOptions& opts = {});

/// Key rate from an explicit post-channel covariance matrix plus a BER;
/// shared by the analytic and the data-driven paths.
KeyRateReport key_rate_from_covariance(const TwoModeCovariance& post_channel,
                                       double ber, const ReconciliationConfig& rec,
                                       bool half_sifting_factor = false);

} // namespace qkd::security

#endif
