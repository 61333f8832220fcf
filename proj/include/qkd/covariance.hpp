#ifndef QKD_COVARIANCE_HPP
#define QKD_COVARIANCE_HPP

#include <Eigen/Dense>

namespace qkd {

// Quadrature ordering is (x_A, p_A, x_B, p_B) throughout, in shot-noise
// units: vacuum variance 1, x = a + a', [x, p] = 2i.

/// Correlation-block shape of a two-mode covariance matrix.
enum class CorrKind {
    SigmaZ,   // C = c * diag(1, -1)
    Identity, // C = c * diag(1, 1)
};

/// Real symmetric 4x4 covariance matrix of a two-mode state.
class TwoModeCovariance {
public:
    TwoModeCovariance() : m_(Eigen::Matrix4d::Identity()) {}
    explicit TwoModeCovariance(const Eigen::Matrix4d& m);

    const Eigen::Matrix4d& matrix() const { return m_; }

    Eigen::Matrix2d a_block() const { return m_.topLeftCorner<2, 2>(); }
    Eigen::Matrix2d b_block() const { return m_.bottomRightCorner<2, 2>(); }
    Eigen::Matrix2d c_block() const { return m_.topRightCorner<2, 2>(); }

    /// Two-mode symplectic form with [r_i, r_j] = 2i * Omega_ij.
    static Eigen::Matrix4d omega();

    /// Smallest eigenvalue of the Hermitian form gamma + i*Omega.  A physical
    /// state has this >= 0 up to numerical noise.
    double physicality_margin() const;

    bool is_physical(double tol = 1e-8) const { return physicality_margin() > -tol; }

    /// Throws physicality_error if the bona fide condition fails beyond tol.
    void require_physical(double tol = 1e-8) const;

private:
    Eigen::Matrix4d m_;
};

/// Compact form of the symmetric two-mode covariance matrices this protocol
/// produces: diagonal mode blocks v_a*I, v_b*I and correlation c with the
/// given block shape.
struct EbCovariance {
    double v_a = 1.0;
    double v_b = 1.0;
    double c = 0.0;
    CorrKind corr = CorrKind::SigmaZ;

    TwoModeCovariance to_two_mode() const;

    /// Largest |c| compatible with physicality for these diagonals.
    double max_correlation() const;
};

} // namespace qkd

#endif
