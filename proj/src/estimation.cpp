#include "qkd/estimation.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qkd/errors.hpp"

namespace qkd::estimation {

namespace {

constexpr std::uint64_t kMinRecordsPerBasis = 100;

Estimate pool(const Estimate& lhs, const Estimate& rhs) {
    // Inverse-variance pooling of two independent estimates of one quantity.
    bool lhs_ok = lhs.n_used >= 2 && lhs.stderr_ > 0.0;
    bool rhs_ok = rhs.n_used >= 2 && rhs.stderr_ > 0.0;
    if (lhs_ok && rhs_ok) {
        double wl = 1.0 / (lhs.stderr_ * lhs.stderr_);
        double wr = 1.0 / (rhs.stderr_ * rhs.stderr_);
        Estimate out;
        out.value = (wl * lhs.value + wr * rhs.value) / (wl + wr);
        out.stderr_ = std::sqrt(1.0 / (wl + wr));
        out.n_used = lhs.n_used + rhs.n_used;
        return out;
    }
    return lhs_ok ? lhs : rhs;
}

} // namespace

void MomentAccumulator::add(const montecarlo::TrialRecord& rec) {
    ++n_;
    if (rec.alice_bit != rec.bob_bit) {
        ++errors_;
    }
    const double scale = std::numbers::sqrt2;
    bool x_basis = rec.bob_basis == montecarlo::Basis::X;
    double a = scale * (x_basis ? rec.x_a : rec.p_a); // matched quadrature
    double o = scale * (x_basis ? rec.p_a : rec.x_a); // the other one
    double b = rec.bob_value;
    Sums& s = x_basis ? x_ : p_;
    ++s.n;
    s.a.add(a);
    s.o.add(o);
    s.b.add(b);
    double a2 = a * a, b2 = b * b, o2 = o * o;
    s.aa.add(a2);
    s.oo.add(o2);
    s.bb.add(b2);
    s.ab.add(a * b);
    s.ob.add(o * b);
    s.aaa.add(a2 * a);
    s.bbb.add(b2 * b);
    s.aab.add(a2 * b);
    s.abb.add(a * b2);
    s.oob.add(o2 * b);
    s.obb.add(o * b2);
    s.aaaa.add(a2 * a2);
    s.bbbb.add(b2 * b2);
    s.aabb.add(a2 * b2);
    s.oobb.add(o2 * b2);
    s.abbb.add(a * b2 * b);
}

QuadratureEstimate MomentAccumulator::finish(const Sums& s) const {
    QuadratureEstimate q;
    q.v_a_mod.n_used = q.c.n_used = q.c_cross.n_used = q.v_b_total.n_used =
        q.v_b_excess.n_used = s.n;
    if (s.n < 2) {
        return q;
    }
    const double n = static_cast<double>(s.n);
    const double ma = s.a.sum / n;
    const double mo = s.o.sum / n;
    const double mb = s.b.sum / n;

    const double saa = s.aa.sum / n - ma * ma;
    const double soo = s.oo.sum / n - mo * mo;
    const double sbb = s.bb.sum / n - mb * mb;
    const double sab = s.ab.sum / n - ma * mb;
    const double sob = s.ob.sum / n - mo * mb;

    // Central fourth-order moments for the asymptotic standard errors.
    const double m4a = s.aaaa.sum / n - 4.0 * ma * s.aaa.sum / n +
                       6.0 * ma * ma * s.aa.sum / n - 3.0 * ma * ma * ma * ma;
    const double m4b = s.bbbb.sum / n - 4.0 * mb * s.bbb.sum / n +
                       6.0 * mb * mb * s.bb.sum / n - 3.0 * mb * mb * mb * mb;
    const double m22_ab = s.aabb.sum / n - 2.0 * mb * s.aab.sum / n -
                          2.0 * ma * s.abb.sum / n + mb * mb * s.aa.sum / n +
                          ma * ma * s.bb.sum / n + 4.0 * ma * mb * s.ab.sum / n -
                          3.0 * ma * ma * mb * mb;
    const double m22_ob = s.oobb.sum / n - 2.0 * mb * s.oob.sum / n -
                          2.0 * mo * s.obb.sum / n + mb * mb * s.oo.sum / n +
                          mo * mo * s.bb.sum / n + 4.0 * mo * mb * s.ob.sum / n -
                          3.0 * mo * mo * mb * mb;
    const double m13_ab = s.abbb.sum / n - 3.0 * mb * s.abb.sum / n +
                          3.0 * mb * mb * s.ab.sum / n - ma * s.bbb.sum / n +
                          3.0 * ma * mb * s.bb.sum / n - 3.0 * ma * mb * mb * mb;

    auto stderr_of = [&](double var_of_stat) {
        return std::sqrt(std::max(var_of_stat, 0.0) / n);
    };

    q.v_a_mod = {saa - 2.0, stderr_of(m4a - saa * saa), s.n};
    q.c = {sab, stderr_of(m22_ab - sab * sab), s.n};
    q.c_cross = {sob, stderr_of(m22_ob - sob * sob), s.n};
    q.v_b_total = {sbb, stderr_of(m4b - sbb * sbb), s.n};
    q.v_b_excess = {sbb - 1.0, q.v_b_total.stderr_, s.n};
    q.cov_c_v_b = (m13_ab - sab * sbb) / n;
    return q;
}

CovarianceEstimate MomentAccumulator::covariance() const {
    CovarianceEstimate est;
    est.n_records = n_;
    est.x = finish(x_);
    est.p = finish(p_);
    return est;
}

double MomentAccumulator::empirical_ber() const {
    if (n_ == 0) {
        throw insufficient_data_error("empirical BER needs at least one record");
    }
    return static_cast<double>(errors_) / static_cast<double>(n_);
}

Estimate CovarianceEstimate::pooled_c() const { return pool(x.c, p.c); }

Estimate CovarianceEstimate::pooled_v_b_total() const {
    return pool(x.v_b_total, p.v_b_total);
}

CovarianceEstimate estimate_covariance(const MomentAccumulator& acc,
                                       const protocol::ModulationParams& mod) {
    mod.validate();
    CovarianceEstimate est = acc.covariance();
    if (est.x.c.n_used < kMinRecordsPerBasis || est.p.c.n_used < kMinRecordsPerBasis) {
        std::ostringstream msg;
        msg << "covariance estimation needs at least " << kMinRecordsPerBasis
            << " records per basis (got x:" << est.x.c.n_used
            << ", p:" << est.p.c.n_used << ")";
        throw insufficient_data_error(msg.str());
    }
    return est;
}

CovarianceEstimate estimate_covariance(std::span<const montecarlo::TrialRecord> records,
                                       const protocol::ModulationParams& mod) {
    MomentAccumulator acc;
    for (const auto& rec : records) {
        acc.add(rec);
    }
    return estimate_covariance(acc, mod);
}

ChannelEstimate estimate_channel(const CovarianceEstimate& cov,
                                 const protocol::ModulationParams& mod) {
    mod.validate();
    Estimate c = cov.pooled_c();
    Estimate v = cov.pooled_v_b_total();
    if (c.n_used < 2 || !std::isfinite(c.value) || std::abs(c.value) <= 3.0 * c.stderr_) {
        std::ostringstream msg;
        msg << "correlation estimate " << c.value << " +- " << c.stderr_
            << " is consistent with zero; transmittance undefined";
        throw degenerate_estimate_error(msg.str());
    }
    const double denom = 2.0 * mod.alpha * mod.beta;
    const double ratio = c.value / denom;

    ChannelEstimate out;
    out.eta_hat.value = ratio * ratio;
    out.eta_hat.stderr_ = 2.0 * std::abs(ratio) / denom * c.stderr_;
    out.eta_hat.n_used = c.n_used;

    const double eta = out.eta_hat.value;
    const double a2 = mod.alpha * mod.alpha;
    out.epsilon_hat.value = (v.value - 1.0 - 2.0 * eta * a2) / eta;
    // Delta method on (v, c); the two bases are pooled, so use the pooled
    // sampling covariance between the correlation and Bob's variance.
    const double de_dv = 1.0 / eta;
    const double de_dc = -2.0 * (v.value - 1.0) / (eta * c.value);
    double cov_cv = 0.0;
    {
        // Pool per-basis sampling covariances with the same inverse-variance
        // weights used for the estimates themselves.
        auto weight = [](const Estimate& e) {
            return (e.n_used >= 2 && e.stderr_ > 0.0) ? 1.0 / (e.stderr_ * e.stderr_) : 0.0;
        };
        double wcx = weight(cov.x.c), wcp = weight(cov.p.c);
        double wvx = weight(cov.x.v_b_total), wvp = weight(cov.p.v_b_total);
        if (wcx + wcp > 0.0 && wvx + wvp > 0.0) {
            cov_cv = (wcx / (wcx + wcp)) * (wvx / (wvx + wvp)) * cov.x.cov_c_v_b +
                     (wcp / (wcx + wcp)) * (wvp / (wvx + wvp)) * cov.p.cov_c_v_b;
        }
    }
    double var_eps = de_dv * de_dv * v.stderr_ * v.stderr_ +
                     de_dc * de_dc * c.stderr_ * c.stderr_ +
                     2.0 * de_dv * de_dc * cov_cv;
    out.epsilon_hat.stderr_ = std::sqrt(std::max(var_eps, 0.0));
    out.epsilon_hat.n_used = v.n_used;
    out.epsilon_hat_clamped = std::max(out.epsilon_hat.value, 0.0);
    return out;
}

namespace {

// Clamps the correlation into the physical region for the given diagonals;
// reports whether clamping occurred.
double clamp_correlation(const EbCovariance& cov, bool* clamped) {
    double zmax = cov.max_correlation();
    if (std::abs(cov.c) > zmax) {
        *clamped = true;
        return std::copysign(zmax, cov.c);
    }
    return cov.c;
}

} // namespace

DataKeyRate key_rate_from_data(const MomentAccumulator& acc,
                               const protocol::ModulationParams& mod,
                               const security::ReconciliationConfig& rec,
                               ASide a_side) {
    mod.validate();
    rec.validate();
    CovarianceEstimate est = estimate_covariance(acc, mod);
    Estimate c_hat = est.pooled_c();
    Estimate v_b = est.pooled_v_b_total();

    DataKeyRate out;
    out.empirical_ber = acc.empirical_ber();

    auto build = [&](double c_value, double v_b_value) {
        EbCovariance cov;
        if (a_side == ASide::Calibrated) {
            // Source side is an Alice-lab constant; the measured correlation
            // is mapped through the source calibration factor.
            EbCovariance source = protocol::purified_source_covariance(mod.alpha);
            double factor = source.c / (2.0 * mod.alpha * mod.beta);
            cov = EbCovariance{source.v_a, v_b_value, c_value * factor, CorrKind::SigmaZ};
        } else {
            Estimate v_a_mod = pool(est.x.v_a_mod, est.p.v_a_mod);
            cov = EbCovariance{v_a_mod.value + 1.0, v_b_value, c_value, CorrKind::Identity};
        }
        return cov;
    };

    EbCovariance point_cov = build(c_hat.value, v_b.value);
    point_cov.c = clamp_correlation(point_cov, &out.clamped_to_physical);
    out.point = security::key_rate_from_covariance(point_cov.to_two_mode(),
                                                   out.empirical_ber, rec);

    double c_cons = c_hat.value - std::copysign(3.0 * c_hat.stderr_, c_hat.value);
    EbCovariance cons_cov = build(c_cons, v_b.value + 3.0 * v_b.stderr_);
    bool cons_clamped = false;
    cons_cov.c = clamp_correlation(cons_cov, &cons_clamped);
    out.conservative = security::key_rate_from_covariance(cons_cov.to_two_mode(),
                                                          out.empirical_ber, rec);
    return out;
}

} // namespace qkd::estimation
