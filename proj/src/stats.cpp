#include "episim/stats.hpp"

#include "episim/rng.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace episim::stats {

Summary summarize(std::span<const double> xs)
{
    Summary s;
    s.n = xs.size();
    if (s.n == 0)
        return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : xs)
            ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

double median(std::vector<double> xs)
{
    if (xs.empty())
        throw std::domain_error("median of empty sample");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    const double upper = xs[mid];
    if (xs.size() % 2 == 1)
        return upper;
    const double lower = *std::max_element(xs.begin(), xs.begin() + mid);
    return 0.5 * (lower + upper);
}

double kolmogorov_q(double t)
{
    if (t < 0.2)
        return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * t * t);
        sum += sign * term;
        if (term < 1e-16)
            break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw std::domain_error("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v)
            ++i;
        while (j < b.size() && b[j] == v)
            ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

double chi_square_quantile(double df, double confidence)
{
    boost::math::chi_squared dist(df);
    return boost::math::quantile(dist, confidence);
}

double chi_square_statistic(std::span<const double> observed, std::span<const double> expected)
{
    double chi2 = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i)
        if (expected[i] > 0.0)
            chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    return chi2;
}

LinearFit ols(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::domain_error("ols needs at least two paired points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0))
        throw std::domain_error("ols: degenerate abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

namespace {

Interval percentile_interval(double point, std::vector<double> draws, double level)
{
    std::sort(draws.begin(), draws.end());
    const double tail = 0.5 * (1.0 - level);
    const auto at = [&](double q) {
        const double pos = q * static_cast<double>(draws.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, draws.size() - 1);
        return draws[lo] + (pos - lo) * (draws[hi] - draws[lo]);
    };
    return {point, at(tail), at(1.0 - tail)};
}

} // namespace

Interval bootstrap(const std::vector<std::vector<double>>& groups,
                   const std::function<double(const std::vector<std::vector<double>>&)>& functional,
                   std::size_t resamples, std::uint64_t seed, double level)
{
    if (resamples == 0)
        throw std::domain_error("bootstrap needs at least one resample");
    const double point = functional(groups);
    Rng rng(seed);
    std::vector<double> draws;
    draws.reserve(resamples);
    std::vector<std::vector<double>> resampled(groups.size());
    for (std::size_t b = 0; b < resamples; ++b) {
        for (std::size_t g = 0; g < groups.size(); ++g) {
            resampled[g].resize(groups[g].size());
            for (auto& v : resampled[g])
                v = groups[g][rng.index(groups[g].size())];
        }
        draws.push_back(functional(resampled));
    }
    return percentile_interval(point, std::move(draws), level);
}

Interval bootstrap_slope(std::span<const double> x, const std::vector<std::vector<double>>& groups,
                         const std::function<double(std::span<const double>)>& statistic, std::size_t resamples,
                         std::uint64_t seed, double level)
{
    if (x.size() != groups.size())
        throw std::domain_error("bootstrap_slope: abscissae and groups differ in size");
    const std::vector<double> xs(x.begin(), x.end());
    return bootstrap(
        groups,
        [&](const std::vector<std::vector<double>>& gs) {
            std::vector<double> ys;
            ys.reserve(gs.size());
            for (const auto& g : gs)
                ys.push_back(statistic(g));
            return ols(xs, ys).slope;
        },
        resamples, seed, level);
}

double total_variation(std::span<const double> a, std::span<const double> b)
{
    const double sa = std::accumulate(a.begin(), a.end(), 0.0);
    const double sb = std::accumulate(b.begin(), b.end(), 0.0);
    if (!(sa > 0.0) || !(sb > 0.0))
        throw std::domain_error("total_variation: empty histogram");
    const std::size_t n = std::max(a.size(), b.size());
    double tv = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double pa = k < a.size() ? a[k] / sa : 0.0;
        const double pb = k < b.size() ? b[k] / sb : 0.0;
        tv += std::abs(pa - pb);
    }
    return 0.5 * tv;
}

SurvivalCurve survival_curve(std::span<const double> values, std::span<const std::uint8_t> censored,
                             std::span<const double> grid, double z)
{
    SurvivalCurve c;
    c.times.assign(grid.begin(), grid.end());
    c.replicas = values.size();
    c.censored = static_cast<std::size_t>(std::count_if(censored.begin(), censored.end(), [](auto f) { return f != 0; }));
    const double n = static_cast<double>(values.size());
    for (double t : grid) {
        // Censored samples sit at their horizon and count as alive until then.
        std::size_t alive = 0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] > t || (censored[i] && values[i] >= t))
                ++alive;
        const double s = n > 0 ? alive / n : 0.0;
        const double half = n > 0 ? z * std::sqrt(s * (1.0 - s) / n) : 0.0;
        c.survival.push_back(s);
        c.lower.push_back(std::max(0.0, s - half));
        c.upper.push_back(std::min(1.0, s + half));
    }
    return c;
}

} // namespace episim::stats
