#ifndef QKD_ORACLE_HPP
#define QKD_ORACLE_HPP

#include "qkd/fock.hpp"
#include "qkd/protocol.hpp"

namespace qkd::oracle {

/// Maximum absolute deviations between the closed-form protocol quantities
/// and their truncated-Fock-space evaluations.
struct OracleReport {
    double alpha = 0.0;
    double beta = 0.0;
    int dim = 0;

    double spectrum_dev = 0.0;       // four-state eigenvalues vs eigensolver
    double source_v_dev = 0.0;       // purification diagonal variance
    double source_z_dev = 0.0;       // purification correlation
    double source_structure_dev = 0.0; // off-pattern covariance entries
    double mixed_entries_dev = 0.0;  // two-mode mixture covariance entries
    double mixed_structure_dev = 0.0;
    double coefficients_dev = 0.0;   // posterior formula vs projector route
    double physicality_margin = 0.0; // worst gamma + i*Omega eigenvalue seen

    double max_deviation() const;
    bool pass(double tol = 1e-7) const { return max_deviation() <= tol; }
};

/// Runs every cross-check at one (alpha, beta) point.  Intended for the
/// closed-form validation regime (amplitudes of order one).
OracleReport run_checks(double alpha, double beta, const fock::TruncationConfig& trunc);

/// Schmidt purification of the four-state mixture built from the Fock-space
/// eigensystem (conjugated source-side vectors).
fock::SchmidtState purification_from_eigensystem(double alpha,
                                                 const fock::TruncationConfig& trunc);

/// Posterior preparation probabilities evaluated with truncated quadrature
/// projectors instead of the Gaussian formula.
std::array<double, 4> coefficients_via_projectors(double x_a, double p_a, double beta,
                                                  const fock::TruncationConfig& trunc);

} // namespace qkd::oracle

#endif
