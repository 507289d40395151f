#pragma once

#include "episim/model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace episim {

/// Connector availability: a connector is available in [t, t+2] if it has
/// neither a recovery nor an update point there.
struct ConnectorAvailability {
    Label connectors = 0;
    std::size_t replicas = 0;
    std::vector<double> window_starts;
    double void_probability = 0.0; ///< exp(-2 (1 + kappa))
    double empirical = 0.0;        ///< pooled available fraction
    double empirical_se = 0.0;     ///< over replica means
    double eta = 0.0;
    std::vector<double> mean_fraction; ///< per window start
    std::vector<double> min_fraction;  ///< per window start, over replicas
    std::size_t held = 0;              ///< (replica, window) pairs with at least eta N available
    std::size_t checks = 0;
    bool pass = false; ///< within 4 SE of the void probability and held everywhere
};

/// Connectors are labels first_connector..N; each carries independent
/// recovery (rate one) and update (rate kappa) clocks.
ConnectorAvailability connector_availability(const ModelParams& params, Label first_connector,
                                             std::span<const double> window_starts, std::size_t replicas,
                                             std::uint64_t seed, double eta, unsigned workers = 1);

} // namespace episim
