#ifndef QKD_FOCK_HPP
#define QKD_FOCK_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qkd/covariance.hpp"

namespace qkd::fock {

using Complex = std::complex<double>;
using FockVector = Eigen::VectorXcd;
using FockOperator = Eigen::MatrixXcd;

/// Number-basis truncation: levels 0 .. dim-1 are kept, and any construction
/// losing more than tail_tolerance of squared norm is rejected.
struct TruncationConfig {
    int dim = 64;
    double tail_tolerance = 1e-10;

    void validate() const; // dim >= 2, tail_tolerance > 0
};

/// Coherent state |amp> with amplitudes e^{-|amp|^2/2} amp^n / sqrt(n!).
/// Throws truncation_error when the lost tail norm exceeds the tolerance.
FockVector coherent_state(Complex amplitude, const TruncationConfig& trunc);

/// Squared-norm weight of a coherent state beyond the kept levels.
double coherent_tail_norm(Complex amplitude, int dim);

/// Smallest power-of-two dimension (up to a cap) whose coherent tail fits the
/// tolerance; -1 if the cap is hit.
int suggest_dim(Complex amplitude, double tail_tolerance);

/// Annihilation operator, entries <n|a|n+1> = sqrt(n+1).
FockOperator annihilation(const TruncationConfig& trunc);

struct QuadraturePair {
    FockOperator x; // a + a'
    FockOperator p; // i(a' - a)
};

QuadraturePair quadrature_operators(const TruncationConfig& trunc);

/// rho = sum_i w_i |amp_i><amp_i|; weights must be nonnegative and sum to 1.
FockOperator density_from_coherent_mixture(const std::vector<Complex>& amps,
                                           const std::vector<double>& weights,
                                           const TruncationConfig& trunc);

/// Hermiticity / positivity / trace diagnostics for density operators.
double max_asymmetry(const FockOperator& op);
double min_eigenvalue(const FockOperator& op);

/// Position-basis amplitudes <n|x> for n = 0..dim-1, normalized so that
/// |<x|psi>|^2 integrates to 1 over dx (vacuum gives the N(0,1) density).
Eigen::VectorXd quadrature_wavefunction(double x, int dim);

/// |<x|state>|^2, the homodyne outcome density for the x quadrature.
double homodyne_density_x(const FockVector& state, double x);

/// |<p|state>|^2 using <n|p> = i^n psi_n(p).
double homodyne_density_p(const FockVector& state, double p);

/// Two-mode pure state in Schmidt form sum_k coeff_k |a_k>|b_k>, with each
/// family orthonormal.  Kept factorized; dim^2 objects are never built.
struct SchmidtState {
    std::vector<double> coeffs;
    std::vector<FockVector> a_vectors;
    std::vector<FockVector> b_vectors;
};

/// Two-mode mixture sum_m w_m |a_m><a_m| (x) |b_m><b_m|.
struct ProductMixture {
    std::vector<double> weights;
    std::vector<FockVector> a_vectors;
    std::vector<FockVector> b_vectors;
};

/// Covariance matrix per gamma_ij = <{r_i - d_i, r_j - d_j}>/2 with
/// r = (x_A, p_A, x_B, p_B); the displacement d is computed first.
TwoModeCovariance two_mode_covariance(const SchmidtState& state,
                                      const TruncationConfig& trunc);
TwoModeCovariance two_mode_covariance(const ProductMixture& state,
                                      const TruncationConfig& trunc);

/// Eigendecomposition of a Hermitian operator, eigenvalues descending.
struct EigenSystem {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors; // columns, matching values
};

EigenSystem hermitian_eigensystem(const FockOperator& op);

} // namespace qkd::fock

#endif
