#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace episim::stats {

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0; ///< sample standard deviation (n - 1)
    double se = 0.0; ///< standard error of the mean
};

Summary summarize(std::span<const double> xs);
double median(std::vector<double> xs);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov law
/// (Stephens' small-sample correction of the argument).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov survival function Q(t) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 t^2).
double kolmogorov_q(double t);

/// Upper `confidence` quantile of the chi-square law with `df` degrees of freedom.
double chi_square_quantile(double df, double confidence);

/// Pearson statistic sum (O - E)^2 / E over cells with E > 0.
double chi_square_statistic(std::span<const double> observed, std::span<const double> expected);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LinearFit ols(std::span<const double> x, std::span<const double> y);

struct Interval {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap for the OLS slope of statistic(group_i) against x_i.
/// Each resample draws every group with replacement independently.
Interval bootstrap_slope(std::span<const double> x, const std::vector<std::vector<double>>& groups,
                         const std::function<double(std::span<const double>)>& statistic, std::size_t resamples,
                         std::uint64_t seed, double level = 0.95);

/// Percentile bootstrap of an arbitrary functional of several groups.
Interval bootstrap(const std::vector<std::vector<double>>& groups,
                   const std::function<double(const std::vector<std::vector<double>>&)>& functional,
                   std::size_t resamples, std::uint64_t seed, double level = 0.95);

/// Total-variation distance of two histograms after normalisation.
double total_variation(std::span<const double> a, std::span<const double> b);

/// Survival function estimate on a time grid, with normal-approximation bands
/// clipped to [0, 1]. Samples flagged censored are known only to exceed their value.
struct SurvivalCurve {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t replicas = 0;
    std::size_t censored = 0;
};

/// `values[i]` is an extinction time or, if censored[i], the censoring horizon.
/// Grid points beyond a censoring value are estimated by treating that sample
/// as surviving (exact when every censoring happens at a common horizon that
/// bounds the grid).
SurvivalCurve survival_curve(std::span<const double> values, std::span<const std::uint8_t> censored,
                             std::span<const double> grid, double z = 1.96);

} // namespace episim::stats
