#pragma once

#include "episim/dynamics.hpp"
#include "episim/model.hpp"
#include "episim/stats.hpp"

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

namespace episim {

/// M = sum over Y=2 of s2(x) + sum over Y=1 of s1(x).
double score_total(const MeanFieldState& state, const ScoreTable& scores);

struct MartingalePoint {
    double time = 0.0;
    double m = 0.0;
    double z = 0.0; ///< sqrt(M) + nu t / 2
};

/// M(t) and Z(t) at time zero and after every change of the trajectory.
std::vector<MartingalePoint> martingale_monitor(const MeanFieldTrajectory& trajectory, const ScoreTable& scores,
                                                double nu);

/// Z(t ^ T_ext) at time t: M is frozen at 0 after extinction and Z at nu T_ext / 2.
double stopped_z_at(const std::vector<MartingalePoint>& series, double t, double nu);

struct DriftReport {
    MeanFieldState state;
    double m = 0.0;      ///< M of the state
    double drift = 0.0;  ///< exact generator drift of M
    double nu = 0.0;
    double bound = 0.0;  ///< -nu sqrt(M)
    double margin = 0.0; ///< bound - drift; nonnegative when the inequality holds

    nlohmann::json to_json() const;
};

/// Generator drift of M in `state`, by exact summation:
///   sum_{Y=2} kappa (s1 - s2)(x)
/// + sum_{Y=1} (-s1(x) + lambda S(x) (s2 - s1)(x))
/// + sum_{Y=0} lambda s2(x) sum_{y: Y(y) >= 1} p_xy
DriftReport exact_drift(const MeanFieldState& state, const ModelParams& params, const ScoreTable& scores,
                        double nu);

/// Largest nu for which both per-vertex drift bounds hold at infection rate
/// `lambda`: min((kappa - a)/sqrt 2, 1 - a - b) with a = 2 lambda beta/(1 - 3 gamma),
/// b = lambda beta/(1 - gamma). Nonpositive means no admissible nu.
double nu_at(const ModelParams& params, double lambda);

struct NuThreshold {
    bool feasible = false;
    double lambda_critical = 0.0; ///< nu_at vanishes here
    double lambda_max = 0.0;      ///< operating rate, lambda_critical / 2
    double nu = 0.0;              ///< nu_at(lambda_max)
    std::string derivation;
};

/// Throws std::domain_error for gamma >= 1/3. For kappa = 0 returns an
/// infeasible result (the update term can never be negative).
NuThreshold nu_threshold(const ModelParams& params, const ScoreTable& scores);

/// Exhaustive check over every label of
///   (2 lambda beta/(1-3 gamma) - kappa)(N/x)^gamma <= -nu sqrt(s2(x))
///   2 lambda beta/(1-3 gamma)(N/x)^gamma + (lambda beta/(1-gamma) - 1)(N/x)^(2 gamma) <= -nu s1(x)
bool verify_nu(const ModelParams& params, const ScoreTable& scores, double lambda, double nu);

/// Upper bound (2/nu) sqrt(2N/(1 - 2 gamma)) on the mean extinction time of Y from all-2.
double meanfield_time_bound(const ModelParams& params, double nu);

struct BoundCheck {
    stats::Summary extinction;
    double upper_confidence = 0.0; ///< mean + 2.576 SE
    double bound = 0.0;
    std::size_t censored = 0;
    bool pass = false;
    std::vector<double> samples;
};

/// Mean extinction time of Y started all-2 over `replicas` runs (seeds
/// derive_seed(seed, r)); passes iff nothing is censored and the upper
/// confidence limit is at most the bound.
BoundCheck meanfield_extinction_bound_check(const ModelParams& params, double nu, std::size_t replicas,
                                            std::uint64_t seed, double horizon = 1e9, unsigned workers = 1);

} // namespace episim
