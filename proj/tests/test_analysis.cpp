#include "episim/connectors.hpp"
#include "episim/martingale.hpp"
#include "episim/star.hpp"
#include "episim/stats.hpp"
#include "episim/sweep.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace episim;

namespace {

ModelParams make(Label n, double beta, double gamma, double kappa, double lambda)
{
    ModelParams p;
    p.n_vertices = n;
    p.beta = beta;
    p.gamma = gamma;
    p.kappa = kappa;
    p.lambda = lambda;
    return p;
}

MeanFieldState random_state(Label n, Rng& rng)
{
    MeanFieldState s(n);
    const double d2 = rng.uniform(), d1 = rng.uniform() * (1.0 - d2);
    for (Label x = 1; x <= n; ++x) {
        const double u = rng.uniform();
        s(x) = u < d2 ? kInfected : u < d2 + d1 ? kReady : kHealthy;
    }
    return s;
}

// Root of nu_at in lambda by bisection, independent of the closed form.
double bisect_critical(const ModelParams& p)
{
    const auto f = [&](double lam) {
        const double a = 2 * lam * p.beta / (1 - 3 * p.gamma), b = lam * p.beta / (1 - p.gamma);
        return std::min((p.kappa - a) / std::sqrt(2.0), 1 - a - b);
    };
    double lo = 0, hi = 100;
    for (int i = 0; i < 200; ++i)
        (f(0.5 * (lo + hi)) > 0 ? lo : hi) = 0.5 * (lo + hi);
    return lo;
}

} // namespace

TEST_CASE("martingale monitor on a hand trajectory")
{
    const auto p = make(4, 1, 0.25, 1, 0.1);
    const ScoreTable scores(p);
    MeanFieldTrajectory tr;
    tr.initial = MeanFieldState(4);
    tr.initial(1) = kInfected;
    tr.initial(4) = kReady;
    tr.changes = {{1.0, 1, kInfected, kReady}, {2.0, 4, kReady, kHealthy}, {3.0, 1, kReady, kHealthy}};
    const double nu = 0.4;
    const auto series = martingale_monitor(tr, scores, nu);
    REQUIRE(series.size() == 4);
    CHECK(series[0].m == doctest::Approx(oracle::s2(1, p) + oracle::s1(4, p)));
    CHECK(series[1].m == doctest::Approx(oracle::s1(1, p) + oracle::s1(4, p)));
    CHECK(series[2].m == doctest::Approx(oracle::s1(1, p)));
    CHECK(series[3].m == 0.0);
    CHECK(series[3].z == doctest::Approx(0.6));
    CHECK(stopped_z_at(series, 10.0, nu) == doctest::Approx(0.6));
    CHECK(stopped_z_at(series, 1.5, nu) == doctest::Approx(std::sqrt(series[1].m) + 0.3));
    CHECK(stopped_z_at(series, 0.0, nu) == doctest::Approx(std::sqrt(series[0].m)));
}

TEST_CASE("exact drift agrees with direct summation")
{
    Rng rng(5);
    int checked = 0;
    for (Label n : {5u, 40u, 300u})
        for (double gamma : {0.1, 0.25, 0.3})
            for (double beta : {0.5, 1.0, 5.0}) {
                const auto p = make(n, beta, gamma, 1.3, 0.07);
                const ScoreTable scores(p);
                const int states = n == 300 ? 10 : 50;
                for (int i = 0; i < states; ++i) {
                    const auto st = random_state(n, rng);
                    const auto r = exact_drift(st, p, scores, 0.3);
                    CHECK(r.drift == doctest::Approx(oracle::drift(st, p)).epsilon(1e-9));
                    CHECK(r.bound == doctest::Approx(-0.3 * std::sqrt(r.m)));
                    ++checked;
                }
            }
    CHECK(checked == 990);
}

TEST_CASE("drift examples")
{
    const auto p = make(20, 1, 0.25, 2, 0.05);
    const ScoreTable scores(p);
    const auto healthy = exact_drift(MeanFieldState(20), p, scores, 0.4);
    CHECK(healthy.m == 0.0);
    CHECK(healthy.drift == 0.0);
    CHECK(healthy.margin == 0.0);

    double expected = 0;
    for (Label x = 1; x <= 20; ++x)
        expected -= 2 * std::pow(20.0 / x, 0.25);
    CHECK(exact_drift(MeanFieldState(20, kInfected), p, scores, 0.4).drift == doctest::Approx(expected));

    const auto j = exact_drift(MeanFieldState(20, kReady), p, scores, 0.4).to_json();
    CHECK(j["ready"] == 20);
    CHECK(j["state"].get<std::string>() == std::string(20, '1'));
    CHECK(j.contains("margin"));
    CHECK_THROWS_AS(exact_drift(MeanFieldState(3), p, scores, 0.4), std::domain_error);
}

TEST_CASE("nu threshold")
{
    const auto p = make(1000, 1, 0.25, 1, 0);
    const ScoreTable scores(p);
    const auto r = nu_threshold(p, scores);
    CHECK(r.feasible);
    CHECK(r.lambda_critical == doctest::Approx(bisect_critical(p)).epsilon(1e-10));
    CHECK(r.lambda_max == doctest::Approx(0.05357142857142857).epsilon(1e-10));
    CHECK(r.nu == doctest::Approx(0.40406).epsilon(1e-4));
    CHECK(verify_nu(p, scores, r.lambda_max, r.nu));
    CHECK_FALSE(verify_nu(p, scores, r.lambda_max, 1.001 * r.nu));
    CHECK_FALSE(verify_nu(p, scores, r.lambda_critical * 1.01, 1e-6));
    CHECK_FALSE(r.derivation.empty());

    for (double gamma : {0.05, 0.2, 0.3})
        for (double kappa : {0.3, 1.0, 4.0}) {
            const auto q = make(200, 2, gamma, kappa, 0);
            const auto t = nu_threshold(q, ScoreTable(q));
            CHECK(t.lambda_critical == doctest::Approx(bisect_critical(q)).epsilon(1e-9));
            CHECK(nu_at(q, t.lambda_critical) == doctest::Approx(0.0).epsilon(1e-9));
        }

    CHECK_THROWS_AS(nu_threshold(make(10, 1, 1.0 / 3.0, 1, 0), ScoreTable(make(10, 1, 0.3, 1, 0))), std::domain_error);
    const auto still = make(10, 1, 0.25, 0, 0);
    CHECK_FALSE(nu_threshold(still, ScoreTable(still)).feasible);
    CHECK(meanfield_time_bound(make(100, 1, 0.25, 1, 0), 0.5) == doctest::Approx(4 * std::sqrt(400.0)));
}

TEST_CASE("mean-field extinction below the square-root bound at N = 100")
{
    auto p = make(100, 1, 0.25, 1, 0);
    const auto t = nu_threshold(p, ScoreTable(p));
    p.lambda = t.lambda_max;
    const auto check = meanfield_extinction_bound_check(p, t.nu, 300, 17);
    CHECK(check.censored == 0);
    CHECK(check.pass);
    CHECK(check.upper_confidence < check.bound);
}

TEST_CASE("stopped Z is a supermartingale")
{
    auto p = make(60, 1, 0.25, 1, 0);
    const ScoreTable scores(p);
    const auto t = nu_threshold(p, scores);
    p.lambda = t.lambda_max;
    const MeanFieldState start(60, kInfected);
    const std::vector<double> times{0.5, 1, 2, 4, 8};
    std::vector<std::vector<double>> z(times.size());
    for (int r = 0; r < 3000; ++r) {
        const auto run = run_meanfield_process(p, start, 1e9, derive_seed(61, r), {MeanFieldSampler::aggregated, true});
        const auto series = martingale_monitor(*run.trajectory, scores, t.nu);
        for (std::size_t i = 0; i < times.size(); ++i)
            z[i].push_back(stopped_z_at(series, times[i], t.nu));
    }
    const double z0 = std::sqrt(score_total(start, scores));
    for (const auto& zs : z) {
        const auto s = stats::summarize(zs);
        CHECK(s.mean <= z0 + 3 * s.se);
    }
}

TEST_CASE("isolated star")
{
    StarExperiment e;
    e.k = 30;
    e.lambda = 0.0;
    e.replicas = 20000;
    e.seed = 3;
    const auto none = star_persistence_experiment(e);
    CHECK(none.censored_count == 0);
    CHECK(none.median == doctest::Approx(std::log(2.0)).epsilon(0.03));

    for (auto [k, lambda, kappa] : {std::tuple{5, 0.8, 0.5}, std::tuple{12, 0.5, 2.0}, std::tuple{0, 1.0, 1.0}}) {
        Rng rng(static_cast<std::uint64_t>(k) + 100);
        std::vector<double> t;
        for (int r = 0; r < 40000; ++r)
            t.push_back(simulate_star(k, lambda, kappa, 1e9, rng).extinction_time);
        const auto s = stats::summarize(t);
        CHECK(std::abs(s.mean - oracle::star_mean_time(k, lambda, kappa)) <= 4 * s.se);
    }

    e.k = 10;
    e.lambda = 0.3;
    e.static_network = true;
    e.kappa = 5.0;
    e.replicas = 4000;
    e.grid = {1, 5, 20};
    const auto st = star_persistence_experiment(e);
    CHECK(st.setup.static_network);
    CHECK(st.survival.survival.size() == 3);
    const auto s = stats::summarize(st.samples);
    CHECK(std::abs(s.mean - oracle::star_mean_time(10, 0.3, 0.0)) <= 4 * s.se);
}

TEST_CASE("star persistence predicate")
{
    StarTrace tr;
    tr.updates = {1.0, 5.0, 5.5};
    tr.recoveries = {8.0};
    tr.infected = {{0.0, 8.0}};
    CHECK(tr.infected_at(7.9));
    CHECK_FALSE(tr.infected_at(8.0));
    CHECK(qualifying_updates(tr, 10.0) == 2);
    CHECK(qualifying_updates(tr, 5.5) == 1);
    CHECK_FALSE(infection_persists(tr, 10.0, 1.0));

    tr.recoveries.clear();
    tr.infected = {{0.0, 10.0}};
    tr.infected_at_end = true;
    CHECK(infection_persists(tr, 10.0, 1.0));
    tr.updates = {1.0, 1.5, 2.0};
    CHECK(qualifying_updates(tr, 10.0) == 1);
    CHECK_FALSE(infection_persists(tr, 100.0, 1.0));
}

TEST_CASE("connector availability")
{
    const auto p = make(3000, 1, 0.6, 1, 0.3);
    const std::vector<double> windows{0.0, 2.5, 7.0};
    const auto r = connector_availability(p, 1, windows, 40, 9, default_eta(1.0));
    CHECK(r.connectors == 3000);
    CHECK(r.void_probability == doctest::Approx(std::exp(-4.0)));
    CHECK(r.checks == 120);
    CHECK(r.held == r.checks);
    CHECK(r.mean_fraction.size() == 3);
    CHECK(std::abs(r.empirical - r.void_probability) <= 4 * r.empirical_se);
    CHECK(r.pass);

    const auto strict = connector_availability(p, 1, windows, 10, 9, 0.5);
    CHECK(strict.held == 0);
    CHECK_FALSE(strict.pass);
}

TEST_CASE("reinfection of a healthy star")
{
    const auto p = make(2000, 1, 0.9, 1, 0.3);
    ReinfectionOptions o;
    o.replicas = 40;
    o.seed = 2;
    const auto r = star_reinfection_check(p, 0.5, 0.25, o);
    CHECK(r.replicas == 40);
    CHECK(r.target == r.star.star_cutoff);
    CHECK(r.initially_infected + 1 == r.target);
    CHECK(r.mean_bound >= 0.0);
    CHECK(r.mean_bound <= 1.0);
    CHECK(r.success_fraction >= 0.0);
    CHECK(r.success_fraction <= 1.0);
    CHECK(r.difference == doctest::Approx(r.success_fraction - r.mean_bound));
    CHECK(r.pass);
    CHECK_FALSE(r.formula.empty());

    CHECK_THROWS_AS(star_reinfection_check(p, 0.25, 0.5, o), std::domain_error);
}

TEST_CASE("degrees at infection are size-biased")
{
    const auto p = make(1000, 1, 0.45, 1, 0.5);
    SizeBiasOptions o;
    o.replicas = 10;
    o.graph_samples = 10;
    o.seed = 4;
    const auto r = sizebias_estimate(p, o);
    REQUIRE(r.has_data);
    CHECK(r.records > 100);
    const double mass = std::accumulate(r.degree_histogram.begin(), r.degree_histogram.end(), 0.0);
    double first = 0;
    for (std::size_t k = 0; k < r.degree_histogram.size(); ++k)
        first += k * r.degree_histogram[k] / mass;
    for (std::size_t k = 0; k < r.degree_histogram.size(); ++k)
        CHECK(r.sizebiased_histogram[k] == doctest::Approx(k * r.degree_histogram[k] / mass / first));
    CHECK(r.distance_sizebiased < r.distance_plain);

    auto dead = p;
    dead.lambda = 0.0;
    CHECK_FALSE(sizebias_estimate(dead, o).has_data);
}

TEST_CASE("phase sweep layout and seeds")
{
    const auto base = make(10, 2, 0.5, 1, 0.5);
    SweepGrid grid{{0.3, 0.6}, {0.4}, {8, 16}};
    HorizonPolicy policy{1e3, 0.1, {0.5, 2.0, 5e3}};
    CHECK(policy.horizon_for(10) == doctest::Approx(std::exp(1.0)));
    CHECK(policy.horizon_for(100) == 1e3);
    const auto r = phase_sweep(base, grid, 5, policy, 77);
    REQUIRE(r.cells.size() == 4);
    CHECK(r.cells[1].gamma == 0.3);
    CHECK(r.cells[1].n == 16);
    CHECK(r.cells[2].gamma == 0.6);
    CHECK(r.cells[2].n == 8);
    for (const auto& c : r.cells) {
        REQUIRE(c.runs.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(c.runs[i].seed == derive_seed(77, c.index * 5 + i));
            CHECK(c.runs[i].params.beta == 2.0);
            CHECK(c.runs[i].params.lambda == 0.4);
            CHECK(c.runs[i].horizon == c.horizon);
        }
        CHECK(c.survival_past.size() == 3);
    }
    CHECK(r.fits.size() == 2);
    std::ostringstream os;
    write_sweep_csv(os, r);
    const auto text = os.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    CHECK(text.rfind("cell,gamma,lambda,N,replicas,horizon,", 0) == 0);
}
