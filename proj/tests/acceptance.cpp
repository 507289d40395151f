// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include "episim/dynamics.hpp"
#include "episim/graphical.hpp"
#include "episim/martingale.hpp"
#include "episim/network.hpp"
#include "episim/oracle.hpp"
#include "episim/parallel.hpp"
#include "episim/star.hpp"
#include "episim/stats.hpp"
#include "episim/sweep.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace episim;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

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

std::string num(double x, int digits = 4)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

std::vector<Label> all_labels(Label n)
{
    std::vector<Label> v(n);
    for (Label x = 1; x <= n; ++x)
        v[x - 1] = x;
    return v;
}

std::vector<double> contact_samples(const ModelParams& p, const std::vector<Label>& init, std::size_t reps,
                                    std::uint64_t seed, double horizon = 1e12)
{
    std::vector<double> t(reps);
    parallel_for(reps, 0, [&](std::size_t r) {
        t[r] = run_contact_process(p, init, horizon, derive_seed(seed, r)).record.extinction_time;
    });
    return t;
}

std::vector<double> meanfield_samples(const ModelParams& p, const MeanFieldState& init, std::size_t reps,
                                      std::uint64_t seed, MeanFieldSampler sampler = MeanFieldSampler::aggregated)
{
    std::vector<double> t(reps);
    parallel_for(reps, 0, [&](std::size_t r) {
        t[r] = run_meanfield_process(p, init, 1e12, derive_seed(seed, r), {sampler, false}).record.extinction_time;
    });
    return t;
}

Outcome oracle_equivalence()
{
    struct Case {
        ModelParams p;
        std::vector<Label> contact;
        std::vector<std::uint8_t> meanfield;
    };
    const std::vector<Case> cases{
        {make(1, 1, 0.5, 1, 0.5), {1}, {}},
        {make(2, 1, 0.3, 1, 1.0), {1, 2}, {}},
        {make(2, 0.5, 0.7, 2, 2.0), {2}, {}},
        {make(3, 1, 0.45, 1, 0.7), {1, 2, 3}, {}},
        {make(3, 2, 0.25, 0, 1.0), {3}, {}},
        {make(3, 1, 0.25, 1, 0.5), {}, {2, 2, 2}},
        {make(6, 1, 0.25, 1, 0.3), {}, {2, 2, 2, 2, 2, 2}},
        {make(5, 2, 0.3, 0.5, 0.3), {}, {2, 1, 0, 2, 1}},
    };
    Outcome o{true, ""};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        double exact;
        std::vector<double> t;
        if (c.meanfield.empty()) {
            exact = contact_extinction_oracle(c.p, c.contact);
            t = contact_samples(c.p, c.contact, 100000, derive_seed(101, i));
        } else {
            MeanFieldState y(c.p.n_vertices);
            y.state = c.meanfield;
            exact = meanfield_extinction_oracle(c.p, y);
            t = meanfield_samples(c.p, y, 100000, derive_seed(101, i));
        }
        const auto s = stats::summarize(t);
        const double z = (s.mean - exact) / s.se;
        o.pass = o.pass && std::abs(z) <= 3.0;
        o.detail += (i ? "; " : "") + std::string(c.meanfield.empty() ? "X" : "Y") + " N=" +
                    std::to_string(c.p.n_vertices) + " z=" + num(z, 3);
    }
    return o;
}

Outcome hand_solved_chain()
{
    const auto p = make(2, 1e12, 0.5, 0, 1);
    const std::vector<Label> both{1, 2};
    const double exact = contact_extinction_oracle(p, both);
    const auto s = stats::summarize(contact_samples(p, both, 100000, 202));
    const bool exact_ok = std::abs(exact - 2.0) <= 1e-12;
    const bool mc_ok = std::abs(s.mean - 2.0) <= 3 * s.se;
    return {exact_ok && mc_ok, "oracle " + num(exact, 15) + ", Monte Carlo " + num(s.mean, 5) + " +- " + num(s.se, 2)};
}

Outcome coupling_certification()
{
    const auto p = make(30, 1, 0.25, 1, 0.3);
    const double horizon = 50.0;
    const std::size_t reps = 10000;
    const auto x0 = InfectionState::all_infected(30);
    const MeanFieldState y0(30, kInfected);
    const std::size_t pairs = 30 * 29 / 2;
    std::vector<std::uint64_t> violations(reps), reuse(reps);
    std::vector<std::vector<std::uint32_t>> counts(reps, std::vector<std::uint32_t>(pairs));
    parallel_for(reps, 0, [&](std::size_t r) {
        const auto c = build_coupling(sample_representation(p, horizon, derive_seed(303, r)), x0, y0);
        violations[r] = c.diagnostics.ordering_violations;
        reuse[r] = c.diagnostics.refresh_reuse;
        for (std::size_t k = 0; k < pairs; ++k)
            counts[r][k] = static_cast<std::uint32_t>(c.mean_field_clocks[k].size());
    });
    std::uint64_t total_violations = 0, total_reuse = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        total_violations += violations[r];
        total_reuse += reuse[r];
    }
    std::size_t outside = 0, k = 0;
    double worst = 0.0;
    for (Label x = 1; x < 30; ++x)
        for (Label y = x + 1; y <= 30; ++y, ++k) {
            double n = 0.0;
            for (const auto& c : counts)
                n += c[k];
            const double expected = p.lambda * connection_probability(x, y, p) * horizon * reps;
            const double z = (n - expected) / std::sqrt(expected);
            worst = std::max(worst, std::abs(z));
            outside += std::abs(z) > 4.0;
        }
    return {total_violations == 0 && total_reuse == 0 && outside == 0,
            std::to_string(total_violations) + " ordering violations, " + std::to_string(total_reuse) +
                " refresh reuses, " + std::to_string(outside) + "/" + std::to_string(pairs) +
                " J rates outside 4 SE (max |z| " + num(worst, 3) + ")"};
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

Outcome drift_inequality()
{
    Outcome o{true, ""};
    for (Label n : {100u, 1000u}) {
        auto p = make(n, 1, 0.25, 1, 0);
        const ScoreTable scores(p);
        const auto t = nu_threshold(p, scores);
        p.lambda = t.lambda_max;
        Rng rng(derive_seed(404, n));
        std::size_t violations = 0;
        double tightest = INFINITY;
        for (int i = 0; i < 1000; ++i) {
            const auto r = exact_drift(random_state(n, rng), p, scores, t.nu);
            violations += r.margin < 0.0;
            if (r.m > 0.0)
                tightest = std::min(tightest, r.margin / std::sqrt(r.m));
        }
        o.pass = o.pass && t.feasible && violations == 0;
        o.detail += (n == 100 ? "" : "; ") + std::string("N=") + std::to_string(n) + " lambda=" + num(p.lambda) +
                    " nu=" + num(t.nu) + " violations=" + std::to_string(violations) +
                    " min margin/sqrt(M)=" + num(tightest, 3);
    }
    return o;
}

Outcome meanfield_sqrt_bound()
{
    Outcome o{true, ""};
    std::vector<double> xs, ys;
    for (Label n : {100u, 1000u, 10000u}) {
        auto p = make(n, 1, 0.25, 1, 0);
        const auto t = nu_threshold(p, ScoreTable(p));
        p.lambda = t.lambda_max;
        const auto c = meanfield_extinction_bound_check(p, t.nu, 200, derive_seed(505, n), 1e9, 0);
        o.pass = o.pass && c.pass;
        xs.push_back(std::log(double(n)));
        ys.push_back(std::log(c.extinction.mean));
        o.detail += "N=" + std::to_string(n) + " mean " + num(c.extinction.mean) + " (bound " + num(c.bound) + "); ";
    }
    const double slope = stats::ols(xs, ys).slope;
    o.pass = o.pass && slope <= 0.6;
    o.detail += "log-log slope " + num(slope, 3);
    return o;
}

Outcome fast_extinction()
{
    auto base = make(100, 1, 0.25, 1, 0);
    const auto t = nu_threshold(base, ScoreTable(base));
    const double lambda = 0.5 * t.lambda_max;
    std::vector<double> xs;
    std::vector<std::vector<double>> groups;
    std::string detail = "lambda=" + num(lambda) + ": ";
    for (Label n : {100u, 1000u, 10000u}) {
        const auto p = make(n, 1, 0.25, 1, lambda);
        auto samples = contact_samples(p, all_labels(n), 200, derive_seed(606, n));
        for (auto& v : samples)
            v /= std::sqrt(double(n));
        detail += "N=" + std::to_string(n) + " mean T/sqrt(N) " + num(stats::summarize(samples).mean) + "; ";
        xs.push_back(std::log(double(n)));
        groups.push_back(std::move(samples));
    }
    const auto mean = [](std::span<const double> g) { return stats::summarize(g).mean; };
    const auto ci = stats::bootstrap_slope(xs, groups, mean, 2000, 607);
    return {ci.lo <= 0.0, detail + "slope vs log N " + num(ci.point, 3) + ", 95% CI [" + num(ci.lo, 3) + ", " +
                              num(ci.hi, 3) + "]"};
}

Outcome slow_extinction()
{
    const auto base = make(100, 4, 0.45, 1, 0.1);
    const SweepGrid grid{{0.45}, {0.1}, {100, 200, 400, 800}};
    const HorizonPolicy policy{1000.0, 0.0, {1000.0}};
    const auto r = phase_sweep(base, grid, 30, policy, 707, 0);
    Outcome o{true, "beta=4: "};
    double previous = -1.0;
    for (const auto& c : r.cells) {
        o.pass = o.pass && c.censored_fraction >= previous;
        previous = c.censored_fraction;
        o.detail += "N=" + std::to_string(c.n) + " " + num(c.censored_fraction, 3) + " ";
    }
    o.pass = o.pass && previous > 0.9;
    o.detail += "(fraction surviving past 1000)";
    return o;
}

Outcome star_persistence()
{
    Outcome o{true, ""};

    StarExperiment e;
    e.lambda = 0.2;
    e.kappa = 0.2;
    e.replicas = 2000;
    e.horizon = 1e6;
    e.workers = 0;
    std::vector<double> lk, lm;
    for (std::size_t k : {50, 100, 200, 400, 800}) {
        e.k = k;
        e.seed = derive_seed(808, k);
        const auto r = star_persistence_experiment(e);
        o.pass = o.pass && r.censored_count == 0;
        lk.push_back(std::log(double(k)));
        lm.push_back(std::log(r.median));
    }
    const double slope = stats::ols(lk, lm).slope;
    o.pass = o.pass && slope >= 0.7 && slope <= 1.3;
    o.detail = "evolving (kappa=0.2, lambda=0.2) slope " + num(slope, 3);

    e.static_network = true;
    e.replicas = 400;
    e.horizon = 1e7;
    std::vector<double> x;
    std::vector<std::vector<double>> groups;
    for (std::size_t k : {50, 100, 150, 200}) {
        e.k = k;
        e.seed = derive_seed(809, k);
        const auto r = star_persistence_experiment(e);
        o.pass = o.pass && r.censored_count == 0;
        x.push_back(e.lambda * e.lambda * double(k));
        groups.push_back(r.samples);
    }
    // Quadratic fit of log median against lambda^2 k.
    const auto fit = [&](const std::vector<std::vector<double>>& g) {
        Eigen::MatrixXd a(g.size(), 3);
        Eigen::VectorXd b(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            a(i, 0) = 1.0;
            a(i, 1) = x[i];
            a(i, 2) = x[i] * x[i];
            b(i) = std::log(stats::median(g[i]));
        }
        return Eigen::Vector3d(a.colPivHouseholderQr().solve(b));
    };
    std::vector<double> logs;
    bool increasing = true;
    for (const auto& g : groups) {
        logs.push_back(std::log(stats::median(g)));
        increasing = increasing && (logs.size() < 2 || logs.back() > logs[logs.size() - 2]);
    }
    const auto curvature =
        stats::bootstrap(groups, [&](const std::vector<std::vector<double>>& g) { return fit(g)(2); }, 1000, 810);
    o.pass = o.pass && increasing && curvature.hi >= 0.0;
    o.detail += "; static log medians";
    for (double l : logs)
        o.detail += " " + num(l, 3);
    o.detail += ", curvature " + num(curvature.point, 3) + " CI [" + num(curvature.lo, 3) + ", " +
                num(curvature.hi, 3) + "]";
    return o;
}

Outcome stationarity()
{
    const auto p = make(50, 1, 0.45, 1, 0);
    std::vector<std::pair<Label, Label>> pairs;
    for (Label i = 0; i < 50; ++i) {
        const Label x = 1 + (i * 7) % 49;
        const Label y = 2 + (i * 13 + x) % 48;
        pairs.emplace_back(std::min(x, y), x == y ? 50 : std::max(x, y));
    }
    const auto r = stationarity_check(p, 5.0, 10000, pairs, 909);
    std::size_t outside = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double z = (r.frequency(i) - r.expected[i]) / r.standard_error(i);
        worst = std::max(worst, std::abs(z));
        outside += std::abs(z) > 4.0;
    }
    return {outside == 0, std::to_string(outside) + "/50 pairs outside 4 SE (max |z| " + num(worst, 3) + ")"};
}

Outcome distribution_equivalence()
{
    const auto px = make(10, 1.5, 0.5, 1, 0.6);
    const auto x0 = InfectionState::all_infected(10);
    const std::size_t reps = 10000;
    std::vector<double> from_rep(reps);
    std::vector<std::uint8_t> censored(reps);
    parallel_for(reps, 0, [&](std::size_t r) {
        const auto x = evolve_x_from_representation(sample_representation(px, 200.0, derive_seed(1001, r)), x0);
        from_rep[r] = x.extinction_time;
        censored[r] = x.censored;
    });
    const auto direct = contact_samples(px, all_labels(10), reps, 1002, 200.0);
    const auto ks_x = stats::ks_two_sample(from_rep, direct);

    const auto py = make(20, 1, 0.25, 1, 0.05);
    const MeanFieldState y0(20, kInfected);
    const auto ks_y = stats::ks_two_sample(meanfield_samples(py, y0, reps, 1003, MeanFieldSampler::aggregated),
                                           meanfield_samples(py, y0, reps, 1004, MeanFieldSampler::direct));
    const bool any_censored = std::count(censored.begin(), censored.end(), 1) > 0;
    return {!any_censored && ks_x.p_value > 0.001 && ks_y.p_value > 0.001,
            "X representation vs simulator p=" + num(ks_x.p_value, 3) + "; Y aggregated vs direct p=" +
                num(ks_y.p_value, 3)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "oracle equivalence", 300, oracle_equivalence},
        {2, "hand-solved chain", 60, hand_solved_chain},
        {3, "coupling certification", 600, coupling_certification},
        {4, "drift inequality", 120, drift_inequality},
        {5, "mean-field sqrt(N) bound", 1800, meanfield_sqrt_bound},
        {6, "fast extinction", 3600, fast_extinction},
        {7, "slow extinction contrast", 3600, slow_extinction},
        {8, "star persistence", 1800, star_persistence},
        {9, "stationarity", 300, stationarity},
        {10, "distribution equivalence", 600, distribution_equivalence},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::stoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs <= c.budget_seconds;
        const bool pass = o.pass && in_budget;
        failures += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
                  << num(secs, 3) << " s of " << num(c.budget_seconds, 4) << " s"
                  << (in_budget ? "" : ", over budget") << ")" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
