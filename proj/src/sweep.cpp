#include "episim/sweep.hpp"

#include "episim/network.hpp"
#include "episim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace episim {

namespace {

void tally(std::vector<double>& hist, std::size_t k, double w = 1.0)
{
    if (hist.size() <= k)
        hist.resize(k + 1, 0.0);
    hist[k] += w;
}

} // namespace

SizeBiasResult sizebias_estimate(const ModelParams& params, const SizeBiasOptions& options)
{
    params.validate();
    SizeBiasResult out;
    const ConnectionKernel kernel(params);
    for (std::size_t s = 0; s < options.graph_samples; ++s) {
        Rng rng(derive_seed(options.seed ^ 0x5bd1e995ULL, s));
        const auto g = sample_initial_graph(kernel, rng);
        for (Label x = 1; x <= params.n_vertices; ++x)
            tally(out.degree_histogram, g.degree(x));
    }
    const double mass = std::accumulate(out.degree_histogram.begin(), out.degree_histogram.end(), 0.0);
    out.sizebiased_histogram.assign(out.degree_histogram.size(), 0.0);
    double first_moment = 0.0;
    for (std::size_t k = 0; k < out.degree_histogram.size(); ++k)
        first_moment += static_cast<double>(k) * out.degree_histogram[k];
    if (first_moment > 0.0)
        for (std::size_t k = 0; k < out.degree_histogram.size(); ++k)
            out.sizebiased_histogram[k] = static_cast<double>(k) * out.degree_histogram[k] / first_moment;
    for (auto& v : out.degree_histogram)
        v /= mass;

    std::vector<std::vector<std::size_t>> degrees(options.replicas);
    const Label seeds[] = {options.seed_vertex};
    parallel_for(options.replicas, options.workers, [&](std::size_t r) {
        std::vector<std::uint8_t> seen(params.n_vertices, 0);
        seen[options.seed_vertex - 1] = 1;
        ContactOptions co;
        co.on_infection = [&](const InfectionObservation& obs) {
            if (!seen[obs.vertex - 1]) {
                seen[obs.vertex - 1] = 1;
                degrees[r].push_back(obs.degree);
            }
        };
        run_contact_process(params, seeds, options.horizon, derive_seed(options.seed, r), co);
    });
    for (const auto& d : degrees)
        for (auto k : d) {
            tally(out.infection_histogram, k);
            ++out.records;
        }
    out.has_data = out.records > 0;
    if (!out.has_data)
        return out;
    out.distance_plain = stats::total_variation(out.infection_histogram, out.degree_histogram);
    out.distance_sizebiased = stats::total_variation(out.infection_histogram, out.sizebiased_histogram);
    return out;
}

double HorizonPolicy::horizon_for(Label n) const
{
    if (growth > 0.0)
        return std::min(horizon, std::exp(growth * n));
    return horizon;
}

SweepResult phase_sweep(const ModelParams& base, const SweepGrid& grid, std::size_t replicas,
                        const HorizonPolicy& policy, std::uint64_t seed, unsigned workers)
{
    if (grid.cells() == 0)
        throw std::domain_error("phase_sweep: empty grid");
    if (replicas == 0)
        throw std::domain_error("phase_sweep: replicas must be positive");
    SweepResult out;
    out.ladder = policy.ladder;
    for (double g : grid.gammas)
        for (double l : grid.lambdas)
            for (Label n : grid.sizes) {
                SweepCell c;
                c.index = out.cells.size();
                c.gamma = g;
                c.lambda = l;
                c.n = n;
                c.horizon = policy.horizon_for(n);
                ModelParams p = base;
                p.gamma = g;
                p.lambda = l;
                p.n_vertices = n;
                p.validate();
                c.runs.resize(replicas);
                out.cells.push_back(std::move(c));
            }

    // One flat work queue over all (cell, replica) jobs.
    const std::size_t jobs = out.cells.size() * replicas;
    parallel_for(jobs, workers, [&](std::size_t j) {
        auto& c = out.cells[j / replicas];
        ModelParams p = base;
        p.gamma = c.gamma;
        p.lambda = c.lambda;
        p.n_vertices = c.n;
        std::vector<Label> all(c.n);
        std::iota(all.begin(), all.end(), Label{1});
        c.runs[j % replicas] = run_contact_process(p, all, c.horizon, derive_seed(seed, j)).record;
    });

    for (auto& c : out.cells) {
        std::vector<double> t(replicas);
        std::size_t censored = 0;
        for (std::size_t i = 0; i < replicas; ++i) {
            t[i] = c.runs[i].extinction_time;
            censored += c.runs[i].censored;
        }
        c.t_ext = stats::summarize(t);
        c.median = stats::median(t);
        c.censored_fraction = static_cast<double>(censored) / replicas;
        for (double h : policy.ladder) {
            const double rung = std::min(h, c.horizon);
            std::size_t alive = 0;
            for (const auto& r : c.runs)
                alive += r.extinction_time > rung || (r.censored && r.extinction_time >= rung);
            c.survival_past.push_back(static_cast<double>(alive) / replicas);
        }
    }

    const std::size_t per_line = grid.sizes.size();
    for (std::size_t start = 0; start < out.cells.size(); start += per_line) {
        GrowthFit f;
        f.gamma = out.cells[start].gamma;
        f.lambda = out.cells[start].lambda;
        std::vector<double> lx, ly;
        for (std::size_t i = start; i < start + per_line; ++i)
            if (out.cells[i].t_ext.mean > 0.0) {
                lx.push_back(std::log(static_cast<double>(out.cells[i].n)));
                ly.push_back(std::log(out.cells[i].t_ext.mean));
            }
        f.points = lx.size();
        if (f.points >= 2)
            f.exponent = stats::ols(lx, ly).slope;
        out.fits.push_back(f);
    }
    return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& result)
{
    os << "cell,gamma,lambda,N,replicas,horizon,mean_t_ext,se_t_ext,median_t_ext,censored_fraction";
    for (double h : result.ladder) {
        char buf[48];
        std::snprintf(buf, sizeof buf, ",survival_past_%g", h);
        os << buf;
    }
    os << '\n';
    char buf[512];
    for (const auto& c : result.cells) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%u,%zu,%.17g,%.17g,%.17g,%.17g,%.17g", c.index, c.gamma,
                      c.lambda, c.n, c.runs.size(), c.horizon, c.t_ext.mean, c.t_ext.se, c.median,
                      c.censored_fraction);
        os << buf;
        for (double s : c.survival_past) {
            std::snprintf(buf, sizeof buf, ",%.17g", s);
            os << buf;
        }
        os << '\n';
    }
}

} // namespace episim
