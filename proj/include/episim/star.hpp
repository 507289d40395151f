#pragma once

#include "episim/model.hpp"
#include "episim/rng.hpp"
#include "episim/stats.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace episim {

/// Isolated star: a hub and k leaves. The state is (hub infected, number of
/// infected leaves). Infected vertices recover at rate one, each infected-
/// healthy hub-leaf edge transmits at rate lambda. In the evolving variant a
/// hub update (rate kappa) swaps all leaves for k fresh healthy ones and a
/// leaf update (rate kappa per leaf) replaces that leaf by a healthy one.
struct StarExperiment {
    std::size_t k = 0;
    double lambda = 0.0;
    double kappa = 1.0;
    bool static_network = false; ///< ignores kappa
    std::size_t replicas = 1000;
    double horizon = 1e6;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::vector<double> grid; ///< survival-curve times; empty for none
};

struct StarRun {
    double extinction_time = 0.0;
    bool censored = false;
    std::uint64_t events = 0;
};

/// One realisation with the hub initially infected and all leaves healthy.
StarRun simulate_star(std::size_t k, double lambda, double kappa, double horizon, Rng& rng);

struct StarPersistence {
    StarExperiment setup;
    std::vector<double> samples; ///< extinction times; censored runs hold the horizon
    std::vector<std::uint8_t> censored;
    std::size_t censored_count = 0;
    double median = 0.0;
    stats::SurvivalCurve survival;
};

StarPersistence star_persistence_experiment(const StarExperiment& setup);

/// Trace of one star's own clocks and infection state on [0, T].
struct StarTrace {
    std::vector<double> updates;
    std::vector<double> recoveries;
    std::vector<std::pair<double, double>> infected; ///< disjoint [start, end) intervals, increasing
    bool infected_at_end = false;

    bool infected_at(double t) const;
};

/// Number of update times t <= T - 1 at which the star is infected and no
/// other update or recovery of the star falls in [t, t + 1].
std::size_t qualifying_updates(const StarTrace& trace, double horizon);

/// Persistence on [0, T]: infected at T and at least kappa e^-(1+kappa) T / 2
/// qualifying updates.
bool infection_persists(const StarTrace& trace, double horizon, double kappa);

struct ReinfectionOptions {
    std::size_t replicas = 200;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct ReinfectionReport {
    StarPartitionParams star;
    Label target = 0;                 ///< healthy star under observation
    std::size_t initially_infected = 0; ///< stars 1..target-1
    Label connectors = 0;
    double p_star_connector = 0.0;
    double p_star_star = 0.0;
    std::size_t replicas = 0;
    double success_fraction = 0.0; ///< empirical P(T_x < T)
    double mean_persisting = 0.0;  ///< mean number of persisting infected stars
    double mean_bound = 0.0;       ///< replica average of the lower bound
    double difference = 0.0;       ///< mean of (success indicator - bound)
    double difference_se = 0.0;
    bool pass = false;
    std::string formula;
};

/// Infection reaching a healthy star from persisting infected stars on the
/// reduced network: stars 1..K, connectors K+1..N, only star-connector edges
/// (probability min(beta lambda^(-2-alpha)/N, 1)) in each star's own process
/// and star-star edges (min(beta lambda^(-4-2alpha)/N, 1)) for the transfer.
/// Connector clocks are shared by all star processes. Compares P(T_x < T)
/// with 1 - exp(-beta kappa e^-(1+kappa) |I'| lambda^(-3-2alpha) T / (4N)),
/// passing iff the mean paired difference is at least -4 standard errors.
/// Throws std::domain_error for infeasible exponents.
ReinfectionReport star_reinfection_check(const ModelParams& params, double alpha, double alpha_prime,
                                         const ReinfectionOptions& options = {});

} // namespace episim
