#include "episim/star.hpp"

#include "episim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace episim {

StarRun simulate_star(std::size_t k, double lambda, double kappa, double horizon, Rng& rng)
{
    StarRun run;
    bool hub = true;
    std::size_t m = 0;
    double t = 0.0;
    const double kd = static_cast<double>(k);
    while (hub || m > 0) {
        const double md = static_cast<double>(m);
        const double r_hub_rec = hub ? 1.0 : 0.0;
        const double r_hub_inf = hub ? 0.0 : lambda * md;
        const double r_leaf_inf = hub ? lambda * (kd - md) : 0.0;
        const double r_leaf_rec = md;
        const double r_hub_upd = m > 0 ? kappa : 0.0;
        const double r_leaf_upd = kappa * md;
        const double total = r_hub_rec + r_hub_inf + r_leaf_inf + r_leaf_rec + r_hub_upd + r_leaf_upd;
        t += rng.exponential(total);
        if (t > horizon) {
            run.extinction_time = horizon;
            run.censored = true;
            return run;
        }
        ++run.events;
        double u = rng.uniform() * total;
        if ((u -= r_hub_rec) < 0.0)
            hub = false;
        else if ((u -= r_hub_inf) < 0.0)
            hub = true;
        else if ((u -= r_leaf_inf) < 0.0)
            ++m;
        else if ((u -= r_hub_upd) < 0.0)
            m = 0;
        else if (m > 0)
            --m; // leaf recovery or leaf update
    }
    run.extinction_time = t;
    return run;
}

StarPersistence star_persistence_experiment(const StarExperiment& setup)
{
    if (!(setup.lambda >= 0.0) || !(setup.kappa >= 0.0) || !(setup.horizon > 0.0))
        throw std::domain_error("star experiment: lambda and kappa must be nonnegative, horizon positive");
    StarPersistence out;
    out.setup = setup;
    out.samples.resize(setup.replicas);
    out.censored.resize(setup.replicas);
    const double kappa = setup.static_network ? 0.0 : setup.kappa;
    parallel_for(setup.replicas, setup.workers, [&](std::size_t r) {
        Rng rng(derive_seed(setup.seed, r));
        const auto run = simulate_star(setup.k, setup.lambda, kappa, setup.horizon, rng);
        out.samples[r] = run.extinction_time;
        out.censored[r] = run.censored;
    });
    out.censored_count = static_cast<std::size_t>(std::count(out.censored.begin(), out.censored.end(), 1));
    out.median = stats::median(out.samples);
    out.survival = stats::survival_curve(out.samples, out.censored, setup.grid);
    return out;
}

bool StarTrace::infected_at(double t) const
{
    auto it = std::upper_bound(infected.begin(), infected.end(), t,
                               [](double v, const std::pair<double, double>& iv) { return v < iv.first; });
    if (it == infected.begin())
        return false;
    --it;
    return t < it->second;
}

std::size_t qualifying_updates(const StarTrace& trace, double horizon)
{
    std::size_t count = 0;
    for (std::size_t i = 0; i < trace.updates.size(); ++i) {
        const double t = trace.updates[i];
        if (t > horizon - 1.0)
            break;
        if (!trace.infected_at(t))
            continue;
        if (i + 1 < trace.updates.size() && trace.updates[i + 1] <= t + 1.0)
            continue;
        const auto r = std::lower_bound(trace.recoveries.begin(), trace.recoveries.end(), t);
        if (r != trace.recoveries.end() && *r <= t + 1.0)
            continue;
        ++count;
    }
    return count;
}

bool infection_persists(const StarTrace& trace, double horizon, double kappa)
{
    const double needed = 0.5 * kappa * std::exp(-(1.0 + kappa)) * horizon;
    return trace.infected_at_end && static_cast<double>(qualifying_updates(trace, horizon)) >= needed;
}

namespace {

std::vector<double> poisson_points(double rate, double horizon, Rng& rng)
{
    std::vector<double> pts;
    if (!(rate > 0.0))
        return pts;
    for (double t = rng.exponential(rate); t <= horizon; t += rng.exponential(rate))
        pts.push_back(t);
    return pts;
}

enum class ClockKind : std::uint8_t { recovery, update };

struct ConnectorClock {
    double time;
    std::uint32_t connector; ///< 0-based connector index
    ClockKind kind;
};

/// Star process around one star: the star and its star-connector edges only.
/// Connector recovery and update clocks are shared; the star's own clocks,
/// edge refresh bits and infection clocks are private.
class StarProcess {
public:
    StarProcess(std::uint32_t connectors, double p_edge, double lambda)
        : p_(p_edge), lambda_(lambda), infected_(connectors, 0), slot_(connectors, kAbsent)
    {
    }

    StarTrace run(std::span<const ConnectorClock> shared, double kappa, double horizon, Rng& rng)
    {
        StarTrace trace;
        trace.updates = poisson_points(kappa, horizon, rng);
        trace.recoveries = poisson_points(1.0, horizon, rng);
        std::fill(infected_.begin(), infected_.end(), 0);
        star_ = true;
        double since = 0.0;
        resample_all(rng);

        std::size_t iu = 0, ir = 0, ic = 0;
        double t = 0.0;
        constexpr double inf = std::numeric_limits<double>::infinity();
        for (;;) {
            const double tu = iu < trace.updates.size() ? trace.updates[iu] : inf;
            const double tr = ir < trace.recoveries.size() ? trace.recoveries[ir] : inf;
            const double tc = ic < shared.size() ? shared[ic].time : inf;
            const double next = std::min({tu, tr, tc, horizon});
            const double rate = lambda_ * static_cast<double>(star_ ? healthy_.size() : sick_.size());
            if (rate > 0.0) {
                const double ti = t + rng.exponential(rate);
                if (ti < next) {
                    t = ti;
                    if (star_) {
                        const auto c = healthy_[rng.index(healthy_.size())];
                        set_connector(c, true);
                    } else {
                        star_ = true;
                        since = t;
                    }
                    continue;
                }
            }
            t = next;
            if (t >= horizon)
                break;
            if (next == tu) {
                ++iu;
                resample_all(rng);
            } else if (next == tr) {
                ++ir;
                if (star_) {
                    trace.infected.emplace_back(since, t);
                    star_ = false;
                }
            } else {
                const auto& ev = shared[ic++];
                if (ev.kind == ClockKind::recovery) {
                    if (infected_[ev.connector])
                        set_connector(ev.connector, false);
                } else {
                    drop_edge(ev.connector);
                    if (rng.bernoulli(p_))
                        add_edge(ev.connector);
                }
            }
        }
        if (star_)
            trace.infected.emplace_back(since, horizon);
        trace.infected_at_end = star_;
        return trace;
    }

private:
    static constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();

    std::vector<std::uint32_t>& list_of(std::uint32_t c) { return infected_[c] ? sick_ : healthy_; }

    void add_edge(std::uint32_t c)
    {
        auto& l = list_of(c);
        slot_[c] = static_cast<std::uint32_t>(l.size());
        l.push_back(c);
    }

    void drop_edge(std::uint32_t c)
    {
        if (slot_[c] == kAbsent)
            return;
        auto& l = list_of(c);
        const std::uint32_t pos = slot_[c];
        l[pos] = l.back();
        slot_[l[pos]] = pos;
        l.pop_back();
        slot_[c] = kAbsent;
    }

    void set_connector(std::uint32_t c, bool infected)
    {
        const bool linked = slot_[c] != kAbsent;
        if (linked)
            drop_edge(c);
        infected_[c] = infected;
        if (linked)
            add_edge(c);
    }

    void resample_all(Rng& rng)
    {
        for (auto c : healthy_)
            slot_[c] = kAbsent;
        for (auto c : sick_)
            slot_[c] = kAbsent;
        healthy_.clear();
        sick_.clear();
        const auto n = static_cast<std::uint64_t>(infected_.size());
        for (std::uint64_t c = rng.geometric_skip(p_, n); c < n; c += 1 + rng.geometric_skip(p_, n))
            add_edge(static_cast<std::uint32_t>(c));
    }

    double p_;
    double lambda_;
    bool star_ = true;
    std::vector<std::uint8_t> infected_;
    std::vector<std::uint32_t> slot_; ///< position in healthy_/sick_ if linked to the star
    std::vector<std::uint32_t> healthy_, sick_;
};

/// First time in [0, T) at which an infected star of `trace` fires an active
/// infection clock on its edge to the target, or +inf.
double first_transfer(const StarTrace& trace, std::span<const double> target_updates, double p_edge, double lambda,
                      double horizon, Rng& rng)
{
    std::vector<double> cuts;
    std::merge(trace.updates.begin(), trace.updates.end(), target_updates.begin(), target_updates.end(),
               std::back_inserter(cuts));
    cuts.push_back(horizon);
    double a = 0.0;
    for (double b : cuts) {
        if (rng.bernoulli(p_edge))
            for (double t = a + rng.exponential(lambda); t < b; t += rng.exponential(lambda))
                if (trace.infected_at(t))
                    return t;
        a = b;
    }
    return std::numeric_limits<double>::infinity();
}

} // namespace

ReinfectionReport star_reinfection_check(const ModelParams& params, double alpha, double alpha_prime,
                                         const ReinfectionOptions& options)
{
    const auto feas = validate_star_parameters(params, alpha, alpha_prime);
    if (!feas.feasible())
        throw std::domain_error("reinfection check: infeasible star exponents (" + to_string(feas.violated) + ")");

    ReinfectionReport rep;
    rep.star = *feas.params;
    const double T = rep.star.t_lambda;
    const double lam = params.lambda;
    const double n = static_cast<double>(params.n_vertices);
    const Label stars = rep.star.star_cutoff;
    rep.target = stars;
    rep.initially_infected = stars >= 1 ? stars - 1 : 0;
    rep.connectors = params.n_vertices - stars;
    rep.p_star_connector = std::min(params.beta * std::pow(lam, -2.0 - alpha) / n, 1.0);
    rep.p_star_star = std::min(params.beta * std::pow(lam, -4.0 - 2.0 * alpha) / n, 1.0);
    rep.replicas = options.replicas;
    const double rate_per_star =
        0.25 * params.beta * params.kappa * std::exp(-(1.0 + params.kappa)) * std::pow(lam, -3.0 - 2.0 * alpha) * T / n;
    rep.formula = "1 - exp(-beta kappa e^-(1+kappa) |I'| lambda^(-3-2 alpha) T / (4 N)) = 1 - exp(-" +
                  std::to_string(rate_per_star) + " |I'|)";

    std::vector<double> success(options.replicas, 0.0), bound(options.replicas, 0.0), persisting(options.replicas, 0.0);
    parallel_for(options.replicas, options.workers, [&](std::size_t r) {
        Rng rng(derive_seed(options.seed, r));
        std::vector<ConnectorClock> shared;
        for (std::uint32_t c = 0; c < rep.connectors; ++c) {
            for (double t : poisson_points(1.0, T, rng))
                shared.push_back({t, c, ClockKind::recovery});
            for (double t : poisson_points(params.kappa, T, rng))
                shared.push_back({t, c, ClockKind::update});
        }
        std::sort(shared.begin(), shared.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
        const auto target_updates = poisson_points(params.kappa, T, rng);

        StarProcess process(rep.connectors, rep.p_star_connector, lam);
        double first = std::numeric_limits<double>::infinity();
        std::size_t persist = 0;
        for (std::size_t y = 0; y < rep.initially_infected; ++y) {
            const auto trace = process.run(shared, params.kappa, T, rng);
            if (!infection_persists(trace, T, params.kappa))
                continue;
            ++persist;
            first = std::min(first, first_transfer(trace, target_updates, rep.p_star_star, lam, T, rng));
        }
        persisting[r] = static_cast<double>(persist);
        success[r] = first < T ? 1.0 : 0.0;
        bound[r] = 1.0 - std::exp(-rate_per_star * static_cast<double>(persist));
    });

    std::vector<double> diff(options.replicas);
    for (std::size_t r = 0; r < options.replicas; ++r)
        diff[r] = success[r] - bound[r];
    rep.success_fraction = stats::summarize(success).mean;
    rep.mean_persisting = stats::summarize(persisting).mean;
    rep.mean_bound = stats::summarize(bound).mean;
    const auto d = stats::summarize(diff);
    rep.difference = d.mean;
    rep.difference_se = d.se;
    rep.pass = d.mean >= -4.0 * d.se;
    return rep;
}

} // namespace episim
