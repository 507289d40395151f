#include "episim/config.hpp"

#include "episim/connectors.hpp"
#include "episim/graphical.hpp"
#include "episim/martingale.hpp"
#include "episim/oracle.hpp"
#include "episim/parallel.hpp"
#include "episim/star.hpp"
#include "episim/stats.hpp"
#include "episim/sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

namespace episim {

namespace {

namespace fs = std::filesystem;

/// Main output file (or stdout) plus companion files named after it.
class Outputs {
public:
    explicit Outputs(const RunConfig& c) : config_(c)
    {
        if (!c.out.empty()) {
            file_.open(c.out);
            if (!file_)
                throw std::runtime_error("cannot open output file " + c.out);
        }
    }

    std::ostream& main() { return config_.out.empty() ? std::cout : file_; }

    /// "<stem>.<suffix>" next to the main output, or "episim.<suffix>" in the
    /// working directory when writing to stdout.
    std::ofstream companion(const std::string& suffix) const
    {
        fs::path p = config_.out.empty() ? fs::path("episim") : fs::path(config_.out);
        p.replace_extension();
        std::ofstream os(p.string() + "." + suffix);
        if (!os)
            throw std::runtime_error("cannot open " + p.string() + "." + suffix);
        return os;
    }

private:
    const RunConfig& config_;
    std::ofstream file_;
};

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string brief(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::vector<Label> initial_labels(const RunConfig& c)
{
    if (!c.initial.empty())
        return c.initial;
    std::vector<Label> all(c.params.n_vertices);
    std::iota(all.begin(), all.end(), Label{1});
    return all;
}

MeanFieldState initial_meanfield(const RunConfig& c)
{
    MeanFieldState y(c.params.n_vertices);
    for (Label x : initial_labels(c))
        y(x) = kInfected;
    return y;
}

void report(std::ostream& log, const std::string& name, bool pass, const std::string& detail)
{
    log << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
}

/// Tidy long format: series,group,x,y.
void write_survival_plot(std::ostream& os, const std::string& series, const std::string& group,
                         const stats::SurvivalCurve& s)
{
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        os << series << ',' << group << ',' << brief(s.times[i]) << ',' << brief(s.survival[i]) << '\n';
        os << series << "_lower," << group << ',' << brief(s.times[i]) << ',' << brief(s.lower[i]) << '\n';
        os << series << "_upper," << group << ',' << brief(s.times[i]) << ',' << brief(s.upper[i]) << '\n';
    }
}

std::vector<double> linear_grid(double hi, std::size_t points)
{
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = hi * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

stats::SurvivalCurve records_survival(const std::vector<RunRecord>& runs, double horizon)
{
    std::vector<double> t;
    std::vector<std::uint8_t> c;
    for (const auto& r : runs) {
        t.push_back(r.extinction_time);
        c.push_back(r.censored);
    }
    return stats::survival_curve(t, c, linear_grid(horizon, 101));
}

void write_records(const RunConfig& c, Outputs& out, const std::vector<RunRecord>& runs)
{
    out.main() << kResultsHeader << '\n';
    for (std::size_t i = 0; i < runs.size(); ++i)
        write_results_row(out.main(), i, runs[i]);
    if (!c.out.empty()) {
        auto timing = out.companion("timing.csv");
        timing << "run_id,seed,wall_seconds\n";
        for (std::size_t i = 0; i < runs.size(); ++i)
            timing << i << ',' << runs[i].seed << ',' << fmt(runs[i].wall_seconds) << '\n';
    }
    if (c.emit_plot_data) {
        auto plot = out.companion("plot.csv");
        plot << "series,group,x,y\n";
        write_survival_plot(plot, "survival", to_string(c.mode), records_survival(runs, c.resolved_horizon()));
    }
}

int run_simulation(const RunConfig& c, Outputs& out, std::ostream& log)
{
    const double horizon = c.resolved_horizon();
    const auto initial = initial_labels(c);
    std::vector<RunRecord> runs(c.replicas);
    std::vector<std::vector<Event>> events(c.emit_events ? c.replicas : 0);
    ModelParams p = c.params;
    parallel_for(c.replicas, c.workers, [&](std::size_t i) {
        const auto seed = derive_seed(c.seed, i);
        if (c.mode == Mode::meanfield) {
            runs[i] = run_meanfield_process(p, initial_meanfield(c), horizon, seed).record;
            return;
        }
        ContactOptions o;
        o.scheduler = c.scheduler;
        o.record_events = c.emit_events;
        auto run = run_contact_process(p, initial, horizon, seed, o);
        run.record.mode = c.mode == Mode::static_network ? RunMode::static_network : RunMode::evolving;
        runs[i] = run.record;
        if (c.emit_events)
            events[i] = std::move(run.events);
    });
    write_records(c, out, runs);
    for (std::size_t i = 0; i < events.size(); ++i) {
        auto os = out.companion("events-" + std::to_string(i) + ".csv");
        write_event_log(os, events[i]);
    }
    std::size_t censored = 0;
    for (const auto& r : runs)
        censored += r.censored;
    log << "completed " << runs.size() << " replicas, " << censored << " censored at horizon " << brief(horizon) << '\n';
    return 0;
}

int run_coupled(const RunConfig& c, Outputs& out, std::ostream& log)
{
    const double horizon = c.horizon.value_or(50.0);
    InfectionState x0 = InfectionState::from_labels(c.params.n_vertices, initial_labels(c));
    const MeanFieldState y0 = initial_meanfield(c);
    const std::size_t pairs = static_cast<std::size_t>(c.params.n_vertices) * (c.params.n_vertices - 1) / 2;
    std::vector<RunRecord> runs(c.replicas);
    std::vector<std::uint64_t> violations(c.replicas), reuse(c.replicas);
    std::vector<std::vector<std::uint32_t>> j_counts(c.replicas);
    std::vector<double> probs;
    parallel_for(c.replicas, c.workers, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto seed = derive_seed(c.seed, i);
        const auto cr = build_coupling(sample_representation(c.params, horizon, seed), x0, y0);
        violations[i] = cr.diagnostics.ordering_violations;
        reuse[i] = cr.diagnostics.refresh_reuse;
        j_counts[i].resize(pairs);
        for (std::size_t k = 0; k < pairs; ++k)
            j_counts[i][k] = static_cast<std::uint32_t>(cr.mean_field_clocks[k].size());
        RunRecord r;
        r.seed = seed;
        r.params = c.params;
        r.mode = RunMode::coupled;
        r.horizon = horizon;
        r.extinction_time = cr.x.extinction_time;
        r.censored = cr.x.censored;
        for (const auto& ch : cr.x.changes)
            (ch.to ? r.counts.infections : r.counts.recoveries) += 1;
        for (const auto& u : cr.rep.updates)
            r.counts.updates += u.size();
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        runs[i] = r;
    });
    write_records(c, out, runs);

    const ConnectionKernel kernel(c.params);
    const std::uint64_t total_violations = std::accumulate(violations.begin(), violations.end(), std::uint64_t{0});
    const std::uint64_t total_reuse = std::accumulate(reuse.begin(), reuse.end(), std::uint64_t{0});
    std::size_t rate_failures = 0, k = 0;
    double worst = 0.0;
    for (Label x = 1; x < c.params.n_vertices; ++x)
        for (Label y = x + 1; y <= c.params.n_vertices; ++y, ++k) {
            double n = 0.0;
            for (const auto& jc : j_counts)
                n += jc[k];
            const double expected = c.params.lambda * kernel.prob(x, y) * horizon * c.replicas;
            const double z = expected > 0.0 ? (n - expected) / std::sqrt(expected) : (n > 0.0 ? INFINITY : 0.0);
            worst = std::max(worst, std::abs(z));
            rate_failures += std::abs(z) > 4.0;
        }
    report(log, "coupling order", total_violations == 0,
           std::to_string(total_violations) + " violations of X <= Y over " + std::to_string(c.replicas) +
               " realizations");
    report(log, "refresh reuse", total_reuse == 0, std::to_string(total_reuse) + " reused refresh variables");
    report(log, "J rates", rate_failures == 0,
           std::to_string(rate_failures) + " of " + std::to_string(pairs) +
               " pairs outside 4 SE of lambda p; largest |z| = " + brief(worst));
    return total_violations == 0 && total_reuse == 0 && rate_failures == 0 ? 0 : 1;
}

int run_oracle(const RunConfig& c, Outputs& out, std::ostream& log)
{
    const bool contact = c.oracle_process == "contact";
    const auto initial = initial_labels(c);
    const double exact = contact ? contact_extinction_oracle(c.params, initial)
                                 : meanfield_extinction_oracle(c.params, initial_meanfield(c));
    std::vector<double> t(c.replicas);
    parallel_for(c.replicas, c.workers, [&](std::size_t i) {
        const auto seed = derive_seed(c.seed, i);
        t[i] = contact ? run_contact_process(c.params, initial, 1e12, seed).record.extinction_time
                       : run_meanfield_process(c.params, initial_meanfield(c), 1e12, seed).record.extinction_time;
    });
    const auto s = stats::summarize(t);
    const bool pass = std::abs(s.mean - exact) <= 3.0 * s.se;
    out.main() << "process,N,beta,gamma,kappa,lambda,oracle,mc_mean,mc_se,replicas,pass\n";
    out.main() << c.oracle_process << ',' << c.params.n_vertices << ',' << fmt(c.params.beta) << ','
               << fmt(c.params.gamma) << ',' << fmt(c.params.kappa) << ',' << fmt(c.params.lambda) << ','
               << fmt(exact) << ',' << fmt(s.mean) << ',' << fmt(s.se) << ',' << s.n << ',' << (pass ? 1 : 0)
               << '\n';
    report(log, "oracle", pass,
           "exact " + brief(exact) + ", Monte Carlo " + brief(s.mean) + " +- " + brief(s.se) + " (3 SE tolerance)");
    return pass ? 0 : 1;
}

int run_star(const RunConfig& c, Outputs& out, std::ostream& log)
{
    const double horizon = c.horizon.value_or(StarExperiment{}.horizon);
    out.main() << "k,lambda,kappa,static,replicas,median_t_ext,censored\n";
    std::vector<double> xs, ys;
    std::ofstream plot;
    if (c.emit_plot_data) {
        plot = out.companion("plot.csv");
        plot << "series,group,x,y\n";
    }
    for (std::size_t i = 0; i < c.star_k.size(); ++i) {
        StarExperiment e;
        e.k = c.star_k[i];
        e.lambda = c.params.lambda;
        e.kappa = c.params.kappa;
        e.static_network = c.star_static;
        e.replicas = c.replicas;
        e.horizon = horizon;
        e.seed = derive_seed(c.seed, i);
        e.workers = c.workers;
        if (c.emit_plot_data)
            e.grid = linear_grid(horizon, 101);
        const auto r = star_persistence_experiment(e);
        out.main() << e.k << ',' << fmt(e.lambda) << ',' << fmt(c.star_static ? 0.0 : e.kappa) << ','
                   << (c.star_static ? 1 : 0) << ',' << e.replicas << ',' << fmt(r.median) << ','
                   << r.censored_count << '\n';
        if (c.emit_plot_data)
            write_survival_plot(plot, "survival", "k=" + std::to_string(e.k), r.survival);
        if (r.median > 0.0) {
            const double kd = static_cast<double>(e.k);
            xs.push_back(c.star_static ? e.lambda * e.lambda * kd : std::log(kd));
            ys.push_back(std::log(r.median));
        }
    }
    if (xs.size() >= 2)
        log << (c.star_static ? "slope of log median vs lambda^2 k: " : "slope of log median vs log k: ")
            << brief(stats::ols(xs, ys).slope) << '\n';
    return 0;
}

int run_sweep(const RunConfig& c, Outputs& out, std::ostream& log)
{
    SweepGrid grid;
    grid.gammas = c.grid_gamma.empty() ? std::vector<double>{c.params.gamma} : c.grid_gamma;
    grid.lambdas = c.grid_lambda.empty() ? std::vector<double>{c.params.lambda} : c.grid_lambda;
    grid.sizes = c.grid_n.empty() ? std::vector<Label>{c.params.n_vertices} : c.grid_n;
    HorizonPolicy policy;
    policy.horizon = c.horizon.value_or(c.horizon_cap);
    policy.growth = c.horizon ? 0.0 : c.horizon_growth;
    policy.ladder = c.ladder;
    const auto result = phase_sweep(c.params, grid, c.replicas, policy, c.seed, c.workers);
    write_sweep_csv(out.main(), result);
    if (c.emit_plot_data) {
        auto plot = out.companion("plot.csv");
        plot << "gamma,lambda,N,metric,value\n";
        for (const auto& cell : result.cells) {
            const std::string key = fmt(cell.gamma) + ',' + fmt(cell.lambda) + ',' + std::to_string(cell.n) + ',';
            plot << key << "mean_t_ext," << fmt(cell.t_ext.mean) << '\n';
            plot << key << "median_t_ext," << fmt(cell.median) << '\n';
            plot << key << "censored_fraction," << fmt(cell.censored_fraction) << '\n';
            for (std::size_t i = 0; i < cell.survival_past.size(); ++i)
                plot << key << "survival_past_" << fmt(c.ladder[i]) << ',' << fmt(cell.survival_past[i]) << '\n';
        }
    }
    for (const auto& f : result.fits)
        log << "gamma " << brief(f.gamma) << " lambda " << brief(f.lambda) << ": log-log growth exponent "
            << brief(f.exponent) << " over " << f.points << " sizes\n";
    return 0;
}

int run_drift(const RunConfig& c, Outputs& out, std::ostream& log)
{
    const ScoreTable scores(c.params);
    const auto threshold = nu_threshold(c.params, scores);
    double lambda = c.params.lambda > 0.0 ? c.params.lambda : threshold.lambda_max;
    ModelParams p = c.params;
    p.lambda = lambda;
    const double nu = c.params.lambda > 0.0 ? nu_at(p, lambda) : threshold.nu;
    if (!(nu > 0.0)) {
        report(log, "drift", false, "no admissible nu at lambda = " + brief(lambda) + "; " + threshold.derivation);
        return 1;
    }
    std::size_t violations = 0;
    double worst = INFINITY;
    for (std::size_t i = 0; i < c.drift_states; ++i) {
        Rng rng(derive_seed(c.seed, i));
        MeanFieldState s(p.n_vertices);
        const double density = rng.uniform();
        for (auto& v : s.state)
            v = rng.bernoulli(density) ? static_cast<std::uint8_t>(1 + rng.index(2)) : std::uint8_t{kHealthy};
        const auto r = exact_drift(s, p, scores, nu);
        violations += r.margin < 0.0;
        worst = std::min(worst, r.margin);
        out.main() << r.to_json().dump() << '\n';
    }
    report(log, "drift", violations == 0,
           std::to_string(violations) + " of " + std::to_string(c.drift_states) +
               " states violate drift <= -nu sqrt(M); lambda = " + brief(lambda) + ", nu = " + brief(nu) +
               ", smallest margin " + brief(worst));
    return violations == 0 ? 0 : 1;
}

int run_sizebias(const RunConfig& c, Outputs& out, std::ostream& log)
{
    SizeBiasOptions o;
    o.replicas = c.replicas;
    o.horizon = c.horizon.value_or(5.0);
    o.graph_samples = c.graph_samples;
    o.seed_vertex = c.initial.empty() ? 1 : c.initial.front();
    o.seed = c.seed;
    o.workers = c.workers;
    const auto r = sizebias_estimate(c.params, o);
    nlohmann::json j = {{"has_data", r.has_data},
                        {"records", r.records},
                        {"distance_plain", r.distance_plain},
                        {"distance_sizebiased", r.distance_sizebiased},
                        {"infection_histogram", r.infection_histogram},
                        {"degree_histogram", r.degree_histogram},
                        {"sizebiased_histogram", r.sizebiased_histogram}};
    out.main() << j.dump(2) << '\n';
    if (!r.has_data) {
        report(log, "sizebias", false, "no data: no vertex was newly infected");
        return 1;
    }
    const bool pass = r.distance_sizebiased < r.distance_plain;
    report(log, "sizebias", pass,
           "TV to size-biased " + brief(r.distance_sizebiased) + " vs TV to degree law " + brief(r.distance_plain) +
               " over " + std::to_string(r.records) + " first infections");
    return pass ? 0 : 1;
}

int run_connectors(const RunConfig& c, Outputs& out, std::ostream& log)
{
    const double eta = c.eta.value_or(default_eta(c.params.kappa));
    const auto r = connector_availability(c.params, c.first_connector, c.windows, c.replicas, c.seed, eta, c.workers);
    nlohmann::json j = {{"connectors", r.connectors},
                        {"replicas", r.replicas},
                        {"window_starts", r.window_starts},
                        {"void_probability", r.void_probability},
                        {"empirical", r.empirical},
                        {"empirical_se", r.empirical_se},
                        {"eta", r.eta},
                        {"mean_fraction", r.mean_fraction},
                        {"min_fraction", r.min_fraction},
                        {"held", r.held},
                        {"checks", r.checks},
                        {"pass", r.pass}};
    out.main() << j.dump(2) << '\n';
    report(log, "connectors", r.pass,
           "available fraction " + brief(r.empirical) + " +- " + brief(r.empirical_se) + " vs exp(-2(1+kappa)) = " +
               brief(r.void_probability) + "; E_t held in " + std::to_string(r.held) + " of " +
               std::to_string(r.checks));
    return r.pass ? 0 : 1;
}

int run_reinfection(const RunConfig& c, Outputs& out, std::ostream& log)
{
    auto [alpha, alpha_prime] = default_star_exponents(c.params.gamma);
    if (c.alpha)
        alpha = *c.alpha;
    if (c.alpha_prime)
        alpha_prime = *c.alpha_prime;
    ReinfectionOptions o;
    o.replicas = c.replicas;
    o.seed = c.seed;
    o.workers = c.workers;
    const auto r = star_reinfection_check(c.params, alpha, alpha_prime, o);
    nlohmann::json j = {{"alpha", r.star.alpha},
                        {"alpha_prime", r.star.alpha_prime},
                        {"t_lambda", r.star.t_lambda},
                        {"star_cutoff", r.star.star_cutoff},
                        {"target", r.target},
                        {"initially_infected", r.initially_infected},
                        {"connectors", r.connectors},
                        {"p_star_connector", r.p_star_connector},
                        {"p_star_star", r.p_star_star},
                        {"replicas", r.replicas},
                        {"success_fraction", r.success_fraction},
                        {"mean_persisting", r.mean_persisting},
                        {"mean_bound", r.mean_bound},
                        {"difference", r.difference},
                        {"difference_se", r.difference_se},
                        {"bound_formula", r.formula},
                        {"pass", r.pass}};
    out.main() << j.dump(2) << '\n';
    report(log, "reinfection", r.pass,
           "P(T_x < T) = " + brief(r.success_fraction) + " vs mean bound " + brief(r.mean_bound) + " (" +
               std::to_string(r.replicas) + " replicas, difference " + brief(r.difference) + " +- " +
               brief(r.difference_se) + ")");
    return r.pass ? 0 : 1;
}

} // namespace

int execute(const RunConfig& config, std::ostream& log)
{
    validate(config);
    Outputs out(config);
    switch (config.mode) {
    case Mode::evolving:
    case Mode::static_network:
    case Mode::meanfield:
        return run_simulation(config, out, log);
    case Mode::coupled:
        return run_coupled(config, out, log);
    case Mode::oracle:
        return run_oracle(config, out, log);
    case Mode::star:
        return run_star(config, out, log);
    case Mode::sweep:
        return run_sweep(config, out, log);
    case Mode::drift:
        return run_drift(config, out, log);
    case Mode::sizebias:
        return run_sizebias(config, out, log);
    case Mode::connectors:
        return run_connectors(config, out, log);
    case Mode::reinfection:
        return run_reinfection(config, out, log);
    }
    return 1;
}

} // namespace episim
