#ifndef QKD_PROTOCOL_HPP
#define QKD_PROTOCOL_HPP

#include <array>

#include "qkd/covariance.hpp"

namespace qkd::protocol {

// Four-state constellation: signal states |alpha e^{i theta_m}> with
// theta_m = (2m+1) pi/4, m in {0,1,2,3}; Alice's discrimination states use
// the same phases at amplitude beta.

/// Phase of the m-th constellation point.
double theta(int m);

struct ModulationParams {
    double alpha = 0.5; // signal amplitude toward Bob
    double beta = 20.0; // Alice-side discrimination amplitude

    void validate() const; // both finite and > 0
};

/// Eigenvalue spectrum of the equal four-state coherent mixture, closed form:
///   lam_0 = e^{-a^2} (cosh a^2 + cos a^2)/2,  lam_1 = e^{-a^2} (sinh a^2 + sin a^2)/2,
///   lam_2 = e^{-a^2} (cosh a^2 - cos a^2)/2,  lam_3 = e^{-a^2} (sinh a^2 - sin a^2)/2.
/// Index k collects the photon numbers congruent to k mod 4.
struct FourStateSpectrum {
    std::array<double, 4> lambda{};

    double sum() const { return lambda[0] + lambda[1] + lambda[2] + lambda[3]; }
};

FourStateSpectrum four_state_spectrum(double alpha);

/// Quadrature correlation of the rank-4 Schmidt purification of the
/// four-state mixture: z = 2 alpha^2 sum_k lam_{k-1}^{3/2} / lam_k^{1/2}
/// (indices mod 4).  Validated against the Fock-space covariance oracle.
double four_state_correlation(double alpha);

/// Source covariance of the four-state purification: v = 1 + 2 alpha^2 on
/// both diagonals, sigma_z correlation four_state_correlation(alpha).
/// Throws physicality_error if z exceeds sqrt(v^2-1); that indicates a bug.
EbCovariance four_state_source_covariance(double alpha);

/// Source covariance used for the improved-scheme Holevo bound: the pure
/// Gaussian purification of the signal marginal, v = 1 + 2 alpha^2 with the
/// maximal correlation sqrt(v^2 - 1).  Any purification of the same marginal
/// yields the same leak to an eavesdropper, so the Gaussian one is used.
EbCovariance purified_source_covariance(double alpha);

/// Covariance of the two-mode coherent mixture prepared in the
/// heterodyne-plus-signal scheme: V_A = 1 + 2 beta^2, V_B = 1 + 2 alpha^2,
/// identity-block correlation 2 alpha beta.
EbCovariance mixed_scheme_covariance(double alpha, double beta);

/// Heterodyne outcome means for preparation m after the 50:50 split:
/// x mean sqrt(2) beta cos(theta_m), p mean sqrt(2) beta sin(theta_m).
double heterodyne_mean_x(double beta, int m);
double heterodyne_mean_p(double beta, int m);

/// Signal-mode quadrature means for preparation m: 2 alpha cos/sin(theta_m).
double signal_mean_x(double alpha, int m);
double signal_mean_p(double alpha, int m);

/// Posterior probabilities of each preparation given Alice's heterodyne
/// outcome, normalized over m.  Evaluated in the log domain so that large
/// beta never underflows.
std::array<double, 4> conditional_coefficients(double x_a, double p_a, double beta);

} // namespace qkd::protocol

#endif
