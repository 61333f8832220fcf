#include "qkd/fock.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qkd/errors.hpp"

namespace qkd::fock {

namespace {

constexpr int kSuggestDimCap = 1 << 14;

// Single-mode expectation <u|M|v> without forming intermediate copies.
Complex sandwich(const FockVector& u, const FockOperator& m, const FockVector& v) {
    return u.dot(m * v); // Eigen's dot conjugates the left argument
}

} // namespace

void TruncationConfig::validate() const {
    if (dim < 2) {
        throw std::invalid_argument("truncation dim must be >= 2");
    }
    if (!(tail_tolerance > 0.0)) {
        throw std::invalid_argument("tail_tolerance must be > 0");
    }
}

double coherent_tail_norm(Complex amplitude, int dim) {
    // Kept weight is a partial Poisson sum with mean |amp|^2.
    double mean = std::norm(amplitude);
    double term = std::exp(-mean); // n = 0
    double kept = term;
    for (int n = 1; n < dim; ++n) {
        term *= mean / n;
        kept += term;
    }
    return std::max(0.0, 1.0 - kept);
}

int suggest_dim(Complex amplitude, double tail_tolerance) {
    for (int dim = 2; dim <= kSuggestDimCap; dim *= 2) {
        if (coherent_tail_norm(amplitude, dim) <= tail_tolerance) {
            return dim;
        }
    }
    return -1;
}

FockVector coherent_state(Complex amplitude, const TruncationConfig& trunc) {
    trunc.validate();
    double tail = coherent_tail_norm(amplitude, trunc.dim);
    if (tail > trunc.tail_tolerance) {
        std::ostringstream msg;
        msg << "coherent state |amp|=" << std::abs(amplitude)
            << " loses tail norm " << tail << " at dim " << trunc.dim
            << " (tolerance " << trunc.tail_tolerance << ")";
        throw truncation_error(msg.str(), suggest_dim(amplitude, trunc.tail_tolerance));
    }
    FockVector v(trunc.dim);
    Complex c = std::exp(-0.5 * std::norm(amplitude));
    v(0) = c;
    for (int n = 1; n < trunc.dim; ++n) {
        c *= amplitude / std::sqrt(static_cast<double>(n));
        v(n) = c;
    }
    return v;
}

FockOperator annihilation(const TruncationConfig& trunc) {
    trunc.validate();
    FockOperator a = FockOperator::Zero(trunc.dim, trunc.dim);
    for (int n = 0; n + 1 < trunc.dim; ++n) {
        a(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
    }
    return a;
}

QuadraturePair quadrature_operators(const TruncationConfig& trunc) {
    FockOperator a = annihilation(trunc);
    FockOperator ad = a.adjoint();
    QuadraturePair q;
    q.x = a + ad;
    q.p = Complex(0.0, 1.0) * (ad - a);
    return q;
}

FockOperator density_from_coherent_mixture(const std::vector<Complex>& amps,
                                           const std::vector<double>& weights,
                                           const TruncationConfig& trunc) {
    if (amps.size() != weights.size() || amps.empty()) {
        throw std::invalid_argument("mixture needs matching, nonempty amplitude/weight lists");
    }
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) {
            throw std::invalid_argument("mixture weights must be nonnegative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "mixture weights sum to " << total << ", expected 1";
        throw std::invalid_argument(msg.str());
    }
    FockOperator rho = FockOperator::Zero(trunc.dim, trunc.dim);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        FockVector v = coherent_state(amps[i], trunc);
        rho += weights[i] * (v * v.adjoint());
    }
    return rho;
}

double max_asymmetry(const FockOperator& op) {
    return (op - op.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const FockOperator& op) {
    Eigen::SelfAdjointEigenSolver<FockOperator> es(op, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Eigen::VectorXd quadrature_wavefunction(double x, int dim) {
    // psi_{n+1}(x) = (x psi_n(x) - sqrt(n) psi_{n-1}(x)) / sqrt(n+1),
    // the recurrence x|n> = sqrt(n+1)|n+1> + sqrt(n)|n-1> in these units.
    Eigen::VectorXd psi(dim);
    psi(0) = std::pow(2.0 * std::numbers::pi, -0.25) * std::exp(-x * x / 4.0);
    if (dim > 1) {
        psi(1) = x * psi(0);
    }
    for (int n = 1; n + 1 < dim; ++n) {
        psi(n + 1) = (x * psi(n) - std::sqrt(static_cast<double>(n)) * psi(n - 1)) /
                     std::sqrt(static_cast<double>(n + 1));
    }
    return psi;
}

double homodyne_density_x(const FockVector& state, double x) {
    Eigen::VectorXd psi = quadrature_wavefunction(x, static_cast<int>(state.size()));
    Complex overlap = psi.cast<Complex>().dot(state);
    return std::norm(overlap);
}

double homodyne_density_p(const FockVector& state, double p) {
    Eigen::VectorXd psi = quadrature_wavefunction(p, static_cast<int>(state.size()));
    // <p|n> = conj(i^n) psi_n(p)
    Complex overlap = 0.0;
    Complex phase(1.0, 0.0);
    const Complex minus_i(0.0, -1.0);
    for (int n = 0; n < state.size(); ++n) {
        overlap += phase * psi(n) * state(n);
        phase *= minus_i;
    }
    return std::norm(overlap);
}

namespace {

// Means (d_x, d_p) and symmetrized second moments of one mode, expressed
// against the caller's quadrature operators.
struct ModeMoments {
    double dx = 0.0;
    double dp = 0.0;
    double xx = 0.0;
    double pp = 0.0;
    double xp = 0.0; // <{x,p}>/2
};

ModeMoments pure_moments(const FockVector& v, const QuadraturePair& q) {
    ModeMoments m;
    m.dx = std::real(sandwich(v, q.x, v));
    m.dp = std::real(sandwich(v, q.p, v));
    FockVector xv = q.x * v;
    FockVector pv = q.p * v;
    m.xx = std::real(xv.dot(xv));
    m.pp = std::real(pv.dot(pv));
    m.xp = std::real(xv.dot(pv));
    return m;
}

} // namespace

TwoModeCovariance two_mode_covariance(const SchmidtState& state,
                                      const TruncationConfig& trunc) {
    const std::size_t rank = state.coeffs.size();
    if (rank == 0 || state.a_vectors.size() != rank || state.b_vectors.size() != rank) {
        throw std::invalid_argument("Schmidt state needs matching coefficient/vector lists");
    }
    QuadraturePair q = quadrature_operators(trunc);

    // Reduced single-mode moments: rho_A = sum_k c_k^2 |a_k><a_k|.
    double dxa = 0.0, dpa = 0.0, dxb = 0.0, dpb = 0.0;
    double xx_a = 0.0, pp_a = 0.0, xp_a = 0.0;
    double xx_b = 0.0, pp_b = 0.0, xp_b = 0.0;
    for (std::size_t k = 0; k < rank; ++k) {
        double w = state.coeffs[k] * state.coeffs[k];
        ModeMoments ma = pure_moments(state.a_vectors[k], q);
        ModeMoments mb = pure_moments(state.b_vectors[k], q);
        dxa += w * ma.dx;
        dpa += w * ma.dp;
        dxb += w * mb.dx;
        dpb += w * mb.dp;
        xx_a += w * ma.xx;
        pp_a += w * ma.pp;
        xp_a += w * ma.xp;
        xx_b += w * mb.xx;
        pp_b += w * mb.pp;
        xp_b += w * mb.xp;
    }

    // Cross moments <Phi| r_i (x) r_j |Phi> via rank x rank transition
    // elements; the Schmidt form keeps this O(rank^2 dim^2).
    Eigen::MatrixXcd xa(rank, rank), pa(rank, rank), xb(rank, rank), pb(rank, rank);
    for (std::size_t k = 0; k < rank; ++k) {
        for (std::size_t l = 0; l < rank; ++l) {
            xa(l, k) = sandwich(state.a_vectors[l], q.x, state.a_vectors[k]);
            pa(l, k) = sandwich(state.a_vectors[l], q.p, state.a_vectors[k]);
            xb(l, k) = sandwich(state.b_vectors[l], q.x, state.b_vectors[k]);
            pb(l, k) = sandwich(state.b_vectors[l], q.p, state.b_vectors[k]);
        }
    }
    auto cross = [&](const Eigen::MatrixXcd& ma, const Eigen::MatrixXcd& mb) {
        Complex total = 0.0;
        for (std::size_t k = 0; k < rank; ++k) {
            for (std::size_t l = 0; l < rank; ++l) {
                total += state.coeffs[k] * state.coeffs[l] * ma(l, k) * mb(l, k);
            }
        }
        return std::real(total);
    };

    Eigen::Matrix4d g;
    g(0, 0) = xx_a - dxa * dxa;
    g(1, 1) = pp_a - dpa * dpa;
    g(0, 1) = g(1, 0) = xp_a - dxa * dpa;
    g(2, 2) = xx_b - dxb * dxb;
    g(3, 3) = pp_b - dpb * dpb;
    g(2, 3) = g(3, 2) = xp_b - dxb * dpb;
    g(0, 2) = g(2, 0) = cross(xa, xb) - dxa * dxb;
    g(0, 3) = g(3, 0) = cross(xa, pb) - dxa * dpb;
    g(1, 2) = g(2, 1) = cross(pa, xb) - dpa * dxb;
    g(1, 3) = g(3, 1) = cross(pa, pb) - dpa * dpb;
    return TwoModeCovariance(g);
}

TwoModeCovariance two_mode_covariance(const ProductMixture& state,
                                      const TruncationConfig& trunc) {
    const std::size_t terms = state.weights.size();
    if (terms == 0 || state.a_vectors.size() != terms || state.b_vectors.size() != terms) {
        throw std::invalid_argument("product mixture needs matching weight/vector lists");
    }
    double total = 0.0;
    for (double w : state.weights) {
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("product mixture weights must sum to 1");
    }
    QuadraturePair q = quadrature_operators(trunc);

    std::vector<ModeMoments> ma(terms), mb(terms);
    for (std::size_t m = 0; m < terms; ++m) {
        ma[m] = pure_moments(state.a_vectors[m], q);
        mb[m] = pure_moments(state.b_vectors[m], q);
    }

    double dxa = 0.0, dpa = 0.0, dxb = 0.0, dpb = 0.0;
    for (std::size_t m = 0; m < terms; ++m) {
        double w = state.weights[m];
        dxa += w * ma[m].dx;
        dpa += w * ma[m].dp;
        dxb += w * mb[m].dx;
        dpb += w * mb[m].dp;
    }

    Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
    for (std::size_t m = 0; m < terms; ++m) {
        double w = state.weights[m];
        // Within-mode second moments.
        g(0, 0) += w * ma[m].xx;
        g(1, 1) += w * ma[m].pp;
        g(0, 1) += w * ma[m].xp;
        g(2, 2) += w * mb[m].xx;
        g(3, 3) += w * mb[m].pp;
        g(2, 3) += w * mb[m].xp;
        // Product terms factorize for each mixture component.
        g(0, 2) += w * ma[m].dx * mb[m].dx;
        g(0, 3) += w * ma[m].dx * mb[m].dp;
        g(1, 2) += w * ma[m].dp * mb[m].dx;
        g(1, 3) += w * ma[m].dp * mb[m].dp;
    }
    g(0, 0) -= dxa * dxa;
    g(1, 1) -= dpa * dpa;
    g(0, 1) -= dxa * dpa;
    g(2, 2) -= dxb * dxb;
    g(3, 3) -= dpb * dpb;
    g(2, 3) -= dxb * dpb;
    g(0, 2) -= dxa * dxb;
    g(0, 3) -= dxa * dpb;
    g(1, 2) -= dpa * dxb;
    g(1, 3) -= dpa * dpb;
    g(1, 0) = g(0, 1);
    g(3, 2) = g(2, 3);
    g(2, 0) = g(0, 2);
    g(3, 0) = g(0, 3);
    g(2, 1) = g(1, 2);
    g(3, 1) = g(1, 3);
    return TwoModeCovariance(g);
}

EigenSystem hermitian_eigensystem(const FockOperator& op) {
    Eigen::SelfAdjointEigenSolver<FockOperator> es(op);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition failed");
    }
    // SelfAdjointEigenSolver sorts ascending; flip to descending.
    const int n = static_cast<int>(op.rows());
    EigenSystem sys;
    sys.values.resize(n);
    sys.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        sys.values(i) = es.eigenvalues()(n - 1 - i);
        sys.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return sys;
}

} // namespace qkd::fock
