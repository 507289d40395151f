#pragma once

#include "episim/dynamics.hpp"
#include "episim/model.hpp"
#include "episim/stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace episim {

struct SizeBiasOptions {
    std::size_t replicas = 20;
    double horizon = 5.0;
    std::size_t graph_samples = 20; ///< independent graphs for the stationary degree law
    Label seed_vertex = 1;          ///< initially infected vertex
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct SizeBiasResult {
    bool has_data = false;
    std::size_t records = 0; ///< first infections observed
    std::vector<double> infection_histogram;  ///< degree at first infection
    std::vector<double> degree_histogram;     ///< stationary degree law
    std::vector<double> sizebiased_histogram; ///< k mu(k) / sum i mu(i)
    double distance_plain = 0.0;              ///< TV to the degree law
    double distance_sizebiased = 0.0;         ///< TV to its size-biasing
};

/// Degree of every vertex at its first infection (the seed excluded), pooled
/// over replicas, against the stationary degree law and its size-biased law.
SizeBiasResult sizebias_estimate(const ModelParams& params, const SizeBiasOptions& options);

struct SweepGrid {
    std::vector<double> gammas;
    std::vector<double> lambdas;
    std::vector<Label> sizes;

    std::size_t cells() const { return gammas.size() * lambdas.size() * sizes.size(); }
};

/// Every run uses min(horizon, exp(growth N)) when growth > 0, else horizon.
/// Survival past each ladder rung (rungs above the horizon are clipped) is
/// reported per cell.
struct HorizonPolicy {
    double horizon = 1e3;
    double growth = 0.0;
    std::vector<double> ladder;

    double horizon_for(Label n) const;
};

struct SweepCell {
    std::size_t index = 0;
    double gamma = 0.0;
    double lambda = 0.0;
    Label n = 0;
    double horizon = 0.0;
    std::vector<RunRecord> runs;
    stats::Summary t_ext;
    double median = 0.0;
    double censored_fraction = 0.0;
    std::vector<double> survival_past; ///< per ladder rung
};

/// OLS slope of log mean T_ext against log N for one (gamma, lambda) line.
struct GrowthFit {
    double gamma = 0.0;
    double lambda = 0.0;
    double exponent = 0.0;
    std::size_t points = 0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<GrowthFit> fits;
    std::vector<double> ladder;
};

/// Contact process from the all-infected state in every cell, with the
/// scalar parameters of `base` other than gamma, lambda and N. Cells are
/// ordered gamma-major, then lambda, then N; replica i of cell c uses seed
/// derive_seed(seed, c * replicas + i).
SweepResult phase_sweep(const ModelParams& base, const SweepGrid& grid, std::size_t replicas,
                        const HorizonPolicy& policy, std::uint64_t seed, unsigned workers = 1);

/// One row per cell.
void write_sweep_csv(std::ostream& os, const SweepResult& result);

} // namespace episim
