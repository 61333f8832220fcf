#include "qkd/covariance.hpp"

#include <cmath>
#include <sstream>

#include "qkd/errors.hpp"

namespace qkd {

TwoModeCovariance::TwoModeCovariance(const Eigen::Matrix4d& m) {
    // Symmetrize: entries come from independently computed expectation
    // values, so enforce the exact symmetry the definition guarantees.
    m_ = 0.5 * (m + m.transpose());
}

Eigen::Matrix4d TwoModeCovariance::omega() {
    Eigen::Matrix4d w = Eigen::Matrix4d::Zero();
    w(0, 1) = 1.0;
    w(1, 0) = -1.0;
    w(2, 3) = 1.0;
    w(3, 2) = -1.0;
    return w;
}

double TwoModeCovariance::physicality_margin() const {
    Eigen::Matrix4cd h = m_.cast<std::complex<double>>();
    h += std::complex<double>(0.0, 1.0) * omega().cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void TwoModeCovariance::require_physical(double tol) const {
    double margin = physicality_margin();
    if (margin < -tol) {
        std::ostringstream msg;
        msg << "covariance matrix violates the uncertainty condition "
               "(min eig of gamma + i*Omega = "
            << margin << ")";
        throw physicality_error(msg.str());
    }
}

TwoModeCovariance EbCovariance::to_two_mode() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m(0, 0) = m(1, 1) = v_a;
    m(2, 2) = m(3, 3) = v_b;
    double sign_p = (corr == CorrKind::SigmaZ) ? -1.0 : 1.0;
    m(0, 2) = m(2, 0) = c;
    m(1, 3) = m(3, 1) = sign_p * c;
    return TwoModeCovariance(m);
}

double EbCovariance::max_correlation() const {
    // Physicality bound on c^2 for diagonal blocks v_a*I, v_b*I:
    //   sigma_z correlation: c^2 <= v_a*v_b - 1 - |v_a - v_b| = (max+1)(min-1)
    //   identity correlation: c^2 <= (v_a - 1)(v_b - 1)
    // Factored forms avoid cancellation near the vacuum.
    double lo = std::min(v_a, v_b);
    double hi = std::max(v_a, v_b);
    double bound = (corr == CorrKind::SigmaZ) ? (hi + 1.0) * (lo - 1.0)
                                              : (v_a - 1.0) * (v_b - 1.0);
    return bound > 0.0 ? std::sqrt(bound) : 0.0;
}

} // namespace qkd
