#include "episim/rng.hpp"
#include "episim/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace episim;

TEST_CASE("summary and median")
{
    const std::vector<double> xs{1, 2, 3, 4};
    const auto s = stats::summarize(xs);
    CHECK(s.n == 4);
    CHECK(s.mean == 2.5);
    CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(stats::median(xs) == 2.5);
    CHECK(stats::median({3, 1, 2}) == 2.0);
}

TEST_CASE("Kolmogorov law and KS test")
{
    CHECK(stats::kolmogorov_q(1.0) == doctest::Approx(0.2699996).epsilon(1e-6));
    CHECK(stats::kolmogorov_q(0.0) == 1.0);
    CHECK(stats::kolmogorov_q(5.0) < 1e-20);

    Rng rng(1);
    std::vector<double> a, b, c;
    for (int i = 0; i < 5000; ++i) {
        a.push_back(rng.exponential(1.0));
        b.push_back(rng.exponential(1.0));
        c.push_back(rng.exponential(1.3));
    }
    CHECK(stats::ks_two_sample(a, b).p_value > 0.001);
    CHECK(stats::ks_two_sample(a, c).p_value < 1e-6);
    CHECK(stats::ks_two_sample({1, 2}, {3, 4}).statistic == 1.0);
}

TEST_CASE("chi-square")
{
    CHECK(stats::chi_square_quantile(1, 0.95) == doctest::Approx(3.841458820694124).epsilon(1e-12));
    CHECK(stats::chi_square_quantile(10, 0.999) == doctest::Approx(29.58829844507442).epsilon(1e-10));
    const std::vector<double> o{10, 20, 0}, e{15, 15, 0};
    CHECK(stats::chi_square_statistic(o, e) == doctest::Approx(25.0 / 15 * 2));
}

TEST_CASE("least squares and bootstrap")
{
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{1, 3, 5, 7};
    const auto fit = stats::ols(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));

    Rng rng(2);
    std::normal_distribution<double> noise;
    std::vector<std::vector<double>> groups(4);
    for (std::size_t i = 0; i < 4; ++i)
        for (int r = 0; r < 200; ++r)
            groups[i].push_back(y[i] + noise(rng));
    const auto mean = [](std::span<const double> g) { return stats::summarize(g).mean; };
    const auto ci = stats::bootstrap_slope(x, groups, mean, 500, 3);
    CHECK(ci.lo < 2.0);
    CHECK(ci.hi > 2.0);
    CHECK(ci.lo <= ci.point);
    CHECK(ci.point <= ci.hi);
    CHECK(ci.hi - ci.lo < 0.2);

    const auto diff = [](const std::vector<std::vector<double>>& g) {
        return stats::summarize(g[1]).mean - stats::summarize(g[0]).mean;
    };
    const auto d = stats::bootstrap(groups, diff, 500, 4);
    CHECK(d.lo < 2.0);
    CHECK(d.hi > 2.0);
}

TEST_CASE("total variation")
{
    const std::vector<double> a{1, 1, 0}, b{0, 2, 2};
    CHECK(stats::total_variation(a, a) == 0.0);
    CHECK(stats::total_variation(a, b) == doctest::Approx(0.5));
    const std::vector<double> shorter{1};
    CHECK(stats::total_variation(shorter, std::vector<double>{0, 1}) == doctest::Approx(1.0));
}

TEST_CASE("survival curve")
{
    const std::vector<double> v{1, 2, 3, 10};
    const std::vector<std::uint8_t> cens{0, 0, 0, 1};
    const std::vector<double> grid{0.5, 1.5, 2.5, 5.0};
    const auto s = stats::survival_curve(v, cens, grid);
    CHECK(s.replicas == 4);
    CHECK(s.censored == 1);
    CHECK(s.survival == std::vector<double>{1.0, 0.75, 0.5, 0.25});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(s.lower[i] >= 0.0);
        CHECK(s.upper[i] <= 1.0);
        CHECK(s.lower[i] <= s.survival[i]);
        CHECK(s.survival[i] <= s.upper[i]);
    }
}
