#include "qkd/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "qkd/errors.hpp"

namespace qkd::channel {

void ChannelParams::validate() const {
    if (!(eta > 0.0) || eta > 1.0 || !std::isfinite(eta)) {
        throw std::invalid_argument("eta must lie in (0, 1]");
    }
    if (epsilon < 0.0 || !std::isfinite(epsilon)) {
        throw std::invalid_argument("epsilon must be >= 0");
    }
}

double chi(const ChannelParams& params) {
    if (!(params.eta > 0.0)) {
        throw std::domain_error("chi undefined for eta <= 0");
    }
    return (1.0 - params.eta) / params.eta + params.epsilon;
}

double distance_to_eta(double distance_km, double loss_db_per_km) {
    if (distance_km < 0.0) {
        throw std::invalid_argument("distance must be >= 0");
    }
    return std::pow(10.0, -loss_db_per_km * distance_km / 10.0);
}

double eta_to_distance(double eta, double loss_db_per_km) {
    if (!(eta > 0.0) || eta > 1.0) {
        throw std::invalid_argument("eta must lie in (0, 1]");
    }
    return -10.0 * std::log10(eta) / loss_db_per_km + 0.0; // +0.0 avoids -0

}

TwoModeCovariance apply_to_covariance(const TwoModeCovariance& cov,
                                      const ChannelParams& params) {
    params.validate();
    cov.require_physical();
    double root_eta = std::sqrt(params.eta);
    double added = 1.0 - params.eta + params.eta * params.epsilon;
    Eigen::Matrix4d m = cov.matrix();
    m.topRightCorner<2, 2>() *= root_eta;
    m.bottomLeftCorner<2, 2>() *= root_eta;
    m.bottomRightCorner<2, 2>() =
        params.eta * cov.b_block() + added * Eigen::Matrix2d::Identity();
    return TwoModeCovariance(m);
}

EbCovariance apply_to_covariance(const EbCovariance& cov, const ChannelParams& params) {
    params.validate();
    EbCovariance out = cov;
    out.c = std::sqrt(params.eta) * cov.c;
    out.v_b = params.eta * (cov.v_b + chi(params));
    return out;
}

std::pair<double, double> transmit_sample(double mean_x, double mean_p,
                                          const ChannelParams& params, Rng& rng) {
    double root_eta = std::sqrt(params.eta);
    double sd = std::sqrt(1.0 + params.eta * params.epsilon);
    double x = rng.gaussian(root_eta * mean_x, sd);
    double p = rng.gaussian(root_eta * mean_p, sd);
    return {x, p};
}

} // namespace qkd::channel
