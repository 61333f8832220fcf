#ifndef QKD_ESTIMATION_HPP
#define QKD_ESTIMATION_HPP

#include <cstdint>
#include <span>

#include "qkd/montecarlo.hpp"
#include "qkd/security.hpp"

namespace qkd::estimation {

// Estimators read only sample moments of the recorded data; none of these
// signatures accepts channel parameters.  Alice's raw heterodyne values are
// rescaled by sqrt(2) to mode quadrature estimates, and the heterodyne
// vacuum penalty (two shot-noise units after scaling) is subtracted where a
// de-noised variance is reported.

/// One estimated scalar with its asymptotic standard error.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n_used = 0;
};

/// Per-quadrature covariance entries from the rounds Bob measured in that
/// basis.  `c` pairs Alice's matching quadrature with Bob's outcome;
/// `c_cross` pairs the non-matching one and should vanish.
struct QuadratureEstimate {
    Estimate v_a_mod;     // Var(sqrt(2) a) - 2: Alice-side modulation variance
    Estimate c;           // Cov(sqrt(2) a_matched, bob)
    Estimate c_cross;     // Cov(sqrt(2) a_other, bob)
    Estimate v_b_total;   // raw Var(bob), shot noise retained
    Estimate v_b_excess;  // Var(bob) - 1
    double cov_c_v_b = 0.0; // sampling covariance of (c, v_b_total)
};

struct CovarianceEstimate {
    QuadratureEstimate x; // rounds with Bob in the x basis
    QuadratureEstimate p;
    std::uint64_t n_records = 0;

    /// Basis-averaged correlation and Bob variance, inverse-variance pooled.
    Estimate pooled_c() const;
    Estimate pooled_v_b_total() const;
};

struct ChannelEstimate {
    Estimate eta_hat;          // (c / (2 alpha beta))^2
    Estimate epsilon_hat;      // unclamped; may dip below zero from noise
    double epsilon_hat_clamped = 0.0;
};

/// Which A-side entries enter the data-driven covariance matrix.
enum class ASide {
    Calibrated, // source values are lab constants; only Bob's side is estimated
    Measured,   // everything from data; reproduces the separable-source rate
};

struct DataKeyRate {
    security::KeyRateReport point;
    security::KeyRateReport conservative; // c shifted down, V_B up by 3 stderr
    double empirical_ber = 0.0;
    bool clamped_to_physical = false; // point estimate hit the physical boundary
};

/// Streaming moment accumulator over trial records (compensated raw power
/// sums, so accumulation order does not matter).
class MomentAccumulator {
public:
    void add(const montecarlo::TrialRecord& rec);
    std::uint64_t size() const { return n_; }
    std::uint64_t bit_errors() const { return errors_; }

    CovarianceEstimate covariance() const;
    double empirical_ber() const;

private:
    struct Kahan {
        double sum = 0.0;
        double carry = 0.0;
        void add(double value) {
            double y = value - carry;
            double t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
    };
    // Per-basis sums over (a, o, b) = (sqrt2 * matched quad, sqrt2 * other
    // quad, bob value), including the fourth-order terms the standard errors
    // need.
    struct Sums {
        std::uint64_t n = 0;
        Kahan a, o, b;
        Kahan aa, oo, bb, ab, ob;
        Kahan aaa, bbb, aab, abb, oob, obb;
        Kahan aaaa, bbbb, aabb, oobb, abbb;
    };
    QuadratureEstimate finish(const Sums& s) const;

    std::uint64_t n_ = 0;
    std::uint64_t errors_ = 0;
    Sums x_{}, p_{};
};

CovarianceEstimate estimate_covariance(std::span<const montecarlo::TrialRecord> records,
                                       const protocol::ModulationParams& mod);
CovarianceEstimate estimate_covariance(const MomentAccumulator& acc,
                                       const protocol::ModulationParams& mod);

/// Plug-in channel parameters from the pooled covariance entries.  Throws
/// when the correlation estimate is consistent with zero (eta undefined).
ChannelEstimate estimate_channel(const CovarianceEstimate& cov,
                                 const protocol::ModulationParams& mod);

/// Key rate evaluated on the covariance matrix reconstructed from data:
/// A block from source calibration (or data, per a_side), B block and
/// correlation from measured moments.
DataKeyRate key_rate_from_data(const MomentAccumulator& acc,
                               const protocol::ModulationParams& mod,
                               const security::ReconciliationConfig& rec,
                               ASide a_side = ASide::Calibrated);

} // namespace qkd::estimation

#endif
