#include "episim/connectors.hpp"

#include "episim/parallel.hpp"
#include "episim/rng.hpp"
#include "episim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace episim {

ConnectorAvailability connector_availability(const ModelParams& params, Label first_connector,
                                             std::span<const double> window_starts, std::size_t replicas,
                                             std::uint64_t seed, double eta, unsigned workers)
{
    params.validate();
    if (first_connector < 1 || first_connector > params.n_vertices)
        throw std::domain_error("connector_availability: first_connector out of range");
    if (window_starts.empty() || replicas == 0)
        throw std::domain_error("connector_availability: need window starts and replicas");

    ConnectorAvailability out;
    out.connectors = params.n_vertices - first_connector + 1;
    out.replicas = replicas;
    out.window_starts.assign(window_starts.begin(), window_starts.end());
    out.void_probability = std::exp(-2.0 * (1.0 + params.kappa));
    out.eta = eta;
    const double end = *std::max_element(window_starts.begin(), window_starts.end()) + 2.0;
    const double rate = 1.0 + params.kappa;
    const std::size_t w = window_starts.size();

    std::vector<double> fractions(replicas * w);
    parallel_for(replicas, workers, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        std::vector<std::uint64_t> available(w, 0);
        std::vector<double> pts;
        for (Label c = 0; c < out.connectors; ++c) {
            // Superposition of the two clocks is a single rate-(1 + kappa) process.
            pts.clear();
            for (double t = rng.exponential(rate); t <= end; t += rng.exponential(rate))
                pts.push_back(t);
            for (std::size_t j = 0; j < w; ++j) {
                const double a = window_starts[j];
                const auto it = std::lower_bound(pts.begin(), pts.end(), a);
                if (it == pts.end() || *it > a + 2.0)
                    ++available[j];
            }
        }
        for (std::size_t j = 0; j < w; ++j)
            fractions[r * w + j] = static_cast<double>(available[j]) / out.connectors;
    });

    std::vector<double> per_replica(replicas);
    out.mean_fraction.assign(w, 0.0);
    out.min_fraction.assign(w, 1.0);
    for (std::size_t r = 0; r < replicas; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
            const double f = fractions[r * w + j];
            s += f;
            out.mean_fraction[j] += f / replicas;
            out.min_fraction[j] = std::min(out.min_fraction[j], f);
            out.held += f * out.connectors >= eta * params.n_vertices;
            ++out.checks;
        }
        per_replica[r] = s / w;
    }
    const auto sum = stats::summarize(per_replica);
    out.empirical = sum.mean;
    // One replica: fall back to the binomial error of a single window.
    out.empirical_se = replicas > 1 ? sum.se
                                    : std::sqrt(out.void_probability * (1.0 - out.void_probability) / out.connectors);
    out.pass = std::abs(out.empirical - out.void_probability) <= 4.0 * out.empirical_se && out.held == out.checks;
    return out;
}

} // namespace episim
