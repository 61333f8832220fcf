#ifndef QKD_CHANNEL_HPP
#define QKD_CHANNEL_HPP

#include <utility>

#include "qkd/covariance.hpp"
#include "qkd/rng.hpp"

namespace qkd::channel {

/// Linear Gaussian channel: transmittance eta with excess noise epsilon
/// referred to the channel input, both in shot-noise units.
struct ChannelParams {
    double eta = 1.0;
    double epsilon = 0.0;
    double loss_db_per_km = 0.2;

    void validate() const; // eta in (0,1], epsilon >= 0
};

/// chi = (1 - eta)/eta + epsilon.
double chi(const ChannelParams& params);

/// eta = 10^(-loss_db_per_km * distance / 10).
double distance_to_eta(double distance_km, double loss_db_per_km);
double eta_to_distance(double eta, double loss_db_per_km);

/// Covariance-level action on mode B: the A block is untouched, correlations
/// scale by sqrt(eta), and the B block becomes eta*(B + chi*I).
TwoModeCovariance apply_to_covariance(const TwoModeCovariance& cov,
                                      const ChannelParams& params);
EbCovariance apply_to_covariance(const EbCovariance& cov, const ChannelParams& params);

/// One homodyne-ready sample of both output quadratures: Gaussian with means
/// sqrt(eta)*(mean_x, mean_p) and variance 1 + eta*epsilon per quadrature
/// (the vacuum unit enters at the detector).  Draw order is x then p.
std::pair<double, double> transmit_sample(double mean_x, double mean_p,
                                          const ChannelParams& params, Rng& rng);

} // namespace qkd::channel

#endif
