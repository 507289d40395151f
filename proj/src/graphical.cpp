#include "episim/graphical.hpp"

#include "episim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace episim {

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

std::size_t count_upto(const std::vector<double>& pts, double t)
{
    return static_cast<std::size_t>(std::upper_bound(pts.begin(), pts.end(), t) - pts.begin());
}

enum class ReplayKind : std::uint8_t { update, recovery, potential };

struct ReplayEvent {
    double time;
    ReplayKind kind;
    std::uint32_t a; ///< vertex label, or pair index
    std::uint32_t j; ///< index into the pair's potential times
};

std::vector<ReplayEvent> replay_order(const GraphicalRepresentation& rep)
{
    std::vector<ReplayEvent> ev;
    for (Label x = 1; x <= rep.size(); ++x) {
        for (double t : rep.updates[x - 1])
            ev.push_back({t, ReplayKind::update, x, 0});
        for (double t : rep.recoveries[x - 1])
            ev.push_back({t, ReplayKind::recovery, x, 0});
    }
    for (std::size_t k = 0; k < rep.pairs.size(); ++k)
        for (std::size_t j = 0; j < rep.pairs[k].potential.size(); ++j)
            ev.push_back({rep.pairs[k].potential[j], ReplayKind::potential, static_cast<std::uint32_t>(k),
                          static_cast<std::uint32_t>(j)});
    std::sort(ev.begin(), ev.end(), [](const ReplayEvent& a, const ReplayEvent& b) { return a.time < b.time; });
    for (std::size_t i = 1; i < ev.size(); ++i)
        if (!(ev[i - 1].time < ev[i].time))
            throw std::logic_error("graphical representation: coinciding event times");
    return ev;
}

void write_times(std::ostream& os, const std::vector<double>& ts)
{
    char buf[32];
    for (double t : ts) {
        std::snprintf(buf, sizeof buf, " %.17g", t);
        os << buf;
    }
}

} // namespace

std::size_t GraphicalRepresentation::pair_index(Label x, Label y) const
{
    if (x > y)
        std::swap(x, y);
    if (x == y || x < 1 || y > size())
        throw std::domain_error("pair_index: invalid pair");
    const std::size_t n = size();
    return (x - 1) * (2 * n - x) / 2 + (y - x - 1);
}

std::vector<double> GraphicalRepresentation::merged_updates(Label x, Label y) const
{
    std::vector<double> out;
    std::merge(updates[x - 1].begin(), updates[x - 1].end(), updates[y - 1].begin(), updates[y - 1].end(),
               std::back_inserter(out));
    return out;
}

std::size_t GraphicalRepresentation::refresh_index(Label x, Label y, double t) const
{
    return count_upto(updates[x - 1], t) + count_upto(updates[y - 1], t);
}

bool GraphicalRepresentation::edge_at(Label x, Label y, double t) const
{
    return pair(x, y).refresh[refresh_index(x, y, t)] != 0;
}

std::vector<double> GraphicalRepresentation::infection_trace(Label x, Label y) const
{
    std::vector<double> out;
    for (double t : pair(x, y).potential)
        if (edge_at(x, y, t))
            out.push_back(t);
    return out;
}

void GraphicalRepresentation::check_invariants() const
{
    const auto check_points = [&](const std::vector<double>& pts, const char* what) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!(pts[i] >= 0.0 && pts[i] <= horizon))
                throw std::logic_error(std::string(what) + ": point outside [0, horizon]");
            if (i > 0 && !(pts[i - 1] < pts[i]))
                throw std::logic_error(std::string(what) + ": points not strictly increasing");
        }
    };
    if (updates.size() != size() || recoveries.size() != size())
        throw std::logic_error("vertex clock tables have the wrong size");
    for (Label x = 1; x <= size(); ++x) {
        check_points(updates[x - 1], "update clock");
        check_points(recoveries[x - 1], "recovery clock");
    }
    if (pairs.size() != static_cast<std::size_t>(size()) * (size() - 1) / 2)
        throw std::logic_error("pair table has the wrong size");
    for (const auto& pc : pairs) {
        check_points(pc.potential, "potential infection clock");
        if (pc.fresh.size() != pc.potential.size())
            throw std::logic_error("auxiliary uniforms misaligned with potential infection times");
        if (pc.refresh.size() < 1 + updates[pc.x - 1].size() + updates[pc.y - 1].size())
            throw std::logic_error("refresh sequence shorter than 1 + |U^{x,y}|");
    }
    replay_order(*this); // throws on coinciding times
}

double representation_size_estimate(const ModelParams& params, double horizon)
{
    const double n = params.n_vertices;
    const double pairs = 0.5 * n * (n - 1.0);
    return n * (params.kappa + 1.0) * horizon + pairs * (2.0 * params.lambda * horizon + 2.0 * params.kappa * horizon + 1.0);
}

GraphicalRepresentation sample_representation(const ModelParams& params, double horizon, std::uint64_t seed,
                                              const RepresentationBudget& budget)
{
    params.validate();
    if (!(horizon > 0.0))
        throw std::domain_error("horizon must be positive");
    const double estimate = representation_size_estimate(params, horizon);
    if (params.n_vertices > budget.max_vertices || estimate > budget.max_points)
        throw BudgetExceeded("graphical representation for N=" + std::to_string(params.n_vertices) +
                                 " needs about " + std::to_string(estimate) + " stored values (caps: N<=" +
                                 std::to_string(budget.max_vertices) + ", " + std::to_string(budget.max_points) + ")",
                             estimate);

    const ConnectionKernel kernel(params);
    Rng rng(seed);
    GraphicalRepresentation rep;
    rep.params = params;
    rep.horizon = horizon;
    const Label n = params.n_vertices;
    rep.updates.resize(n);
    rep.recoveries.resize(n);
    for (Label x = 1; x <= n; ++x) {
        rep.updates[x - 1] = poisson_points(params.kappa, horizon, rng);
        rep.recoveries[x - 1] = poisson_points(1.0, horizon, rng);
    }
    rep.pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Label x = 1; x <= n; ++x)
        for (Label y = x + 1; y <= n; ++y) {
            PairClock pc;
            pc.x = x;
            pc.y = y;
            pc.p = kernel.prob(x, y);
            pc.potential = poisson_points(params.lambda, horizon, rng);
            pc.fresh.resize(pc.potential.size());
            for (auto& u : pc.fresh)
                u = rng.uniform();
            pc.refresh.resize(1 + rep.updates[x - 1].size() + rep.updates[y - 1].size());
            for (auto& c : pc.refresh)
                c = rng.bernoulli(pc.p) ? 1 : 0;
            rep.pairs.push_back(std::move(pc));
        }
    return rep;
}

void write_representation(std::ostream& os, const GraphicalRepresentation& rep)
{
    char buf[160];
    os << "episim-representation 1\n";
    std::snprintf(buf, sizeof buf, "params %u %.17g %.17g %.17g %.17g %.17g\n", rep.params.n_vertices,
                  rep.params.beta, rep.params.gamma, rep.params.kappa, rep.params.lambda, rep.horizon);
    os << buf;
    for (Label x = 1; x <= rep.size(); ++x) {
        os << "U " << x;
        write_times(os, rep.updates[x - 1]);
        os << "\nR " << x;
        write_times(os, rep.recoveries[x - 1]);
        os << '\n';
    }
    for (const auto& pc : rep.pairs) {
        os << "I " << pc.x << ' ' << pc.y;
        write_times(os, pc.potential);
        os << "\nF " << pc.x << ' ' << pc.y;
        write_times(os, pc.fresh);
        os << "\nC " << pc.x << ' ' << pc.y;
        for (auto c : pc.refresh)
            os << ' ' << static_cast<int>(c);
        os << '\n';
    }
}

GraphicalRepresentation read_representation(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != "episim-representation 1")
        throw std::runtime_error("representation: bad header");
    GraphicalRepresentation rep;
    {
        if (!std::getline(is, line))
            throw std::runtime_error("representation: missing params line");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> rep.params.n_vertices >> rep.params.beta >> rep.params.gamma >> rep.params.kappa >>
            rep.params.lambda >> rep.horizon;
        if (tag != "params" || !ls)
            throw std::runtime_error("representation: malformed params line");
        rep.params.validate();
    }
    const Label n = rep.params.n_vertices;
    rep.updates.resize(n);
    rep.recoveries.resize(n);
    rep.pairs.resize(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Label x = 1; x <= n; ++x)
        for (Label y = x + 1; y <= n; ++y) {
            auto& pc = rep.pairs[rep.pair_index(x, y)];
            pc.x = x;
            pc.y = y;
            pc.p = connection_probability(x, y, rep.params);
        }
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "U" || kind == "R") {
            Label x = 0;
            ls >> x;
            if (x < 1 || x > n)
                throw std::runtime_error("representation: vertex out of range");
            auto& dst = kind == "U" ? rep.updates[x - 1] : rep.recoveries[x - 1];
            for (double t; ls >> t;)
                dst.push_back(t);
        } else if (kind == "I" || kind == "F" || kind == "C") {
            Label x = 0, y = 0;
            ls >> x >> y;
            auto& pc = rep.pairs.at(rep.pair_index(x, y));
            if (kind == "C") {
                for (int b; ls >> b;)
                    pc.refresh.push_back(static_cast<std::uint8_t>(b != 0));
            } else {
                auto& dst = kind == "I" ? pc.potential : pc.fresh;
                for (double t; ls >> t;)
                    dst.push_back(t);
            }
        } else {
            throw std::runtime_error("representation: unknown record '" + kind + "'");
        }
    }
    rep.check_invariants();
    return rep;
}

XTrajectory evolve_x_from_representation(const GraphicalRepresentation& rep, const InfectionState& initial)
{
    if (initial.size() != rep.size())
        throw std::domain_error("initial state has the wrong size");
    XTrajectory traj;
    traj.initial = initial;
    InfectionState x = initial;
    std::vector<std::size_t> n_updates(rep.size(), 0);
    double extinct_at = x.infected_count() == 0 ? 0.0 : -1.0;

    for (const auto& ev : replay_order(rep)) {
        if (extinct_at >= 0.0)
            break;
        switch (ev.kind) {
        case ReplayKind::update:
            ++n_updates[ev.a - 1];
            break;
        case ReplayKind::recovery:
            if (x.infected(ev.a)) {
                x.set(ev.a, false);
                traj.changes.push_back({ev.time, ev.a, 1, 0});
            }
            break;
        case ReplayKind::potential: {
            const auto& pc = rep.pairs[ev.a];
            if (!pc.refresh[n_updates[pc.x - 1] + n_updates[pc.y - 1]])
                break;
            const bool ix = x.infected(pc.x), iy = x.infected(pc.y);
            if (ix != iy) {
                const Label target = ix ? pc.y : pc.x;
                x.set(target, true);
                traj.changes.push_back({ev.time, target, 0, 1});
            }
            break;
        }
        }
        if (x.infected_count() == 0)
            extinct_at = ev.time;
    }
    if (extinct_at >= 0.0) {
        traj.extinction_time = extinct_at;
    } else {
        traj.censored = true;
        traj.extinction_time = rep.horizon;
    }
    return traj;
}

CoupledRealization build_coupling(GraphicalRepresentation rep, const InfectionState& x0, const MeanFieldState& y0)
{
    const Label n = rep.size();
    if (x0.size() != n || y0.size() != n)
        throw std::domain_error("initial states have the wrong size");
    for (Label v = 1; v <= n; ++v)
        if (x0.infected(v) && y0(v) == kHealthy)
            throw std::domain_error("initial condition violates X <= Y");

    CoupledRealization out;
    out.mean_field_clocks.resize(rep.pairs.size());
    out.x.initial = x0;
    out.y.initial = y0;

    InfectionState x = x0;
    MeanFieldState y = y0;
    std::size_t y_active = 0;
    for (Label v = 1; v <= n; ++v)
        y_active += y(v) != kHealthy;

    std::vector<std::size_t> n_updates(n, 0);
    std::vector<std::uint8_t> first_used(rep.pairs.size(), 0); // F_n already seen in the current interval
    std::vector<std::uint8_t> refresh_uses(rep.pairs.size(), 0);
    double x_extinct = x.infected_count() == 0 ? 0.0 : -1.0;
    double y_extinct = y_active == 0 ? 0.0 : -1.0;
    auto& diag = out.diagnostics;

    auto set_x = [&](double t, Label v, bool inf) {
        if (x.infected(v) == inf)
            return;
        x.set(v, inf);
        out.x.changes.push_back({t, v, static_cast<std::uint8_t>(!inf), static_cast<std::uint8_t>(inf)});
    };
    auto set_y = [&](double t, Label v, std::uint8_t s) {
        const std::uint8_t old = y(v);
        if (old == s)
            return;
        y_active += (s != kHealthy) - (old != kHealthy);
        y(v) = s;
        out.y.changes.push_back({t, v, old, s});
    };
    auto certify = [&](Label v) {
        if (x.infected(v) && y(v) == kHealthy)
            ++diag.ordering_violations;
    };

    for (const auto& ev : replay_order(rep)) {
        ++diag.events;
        switch (ev.kind) {
        case ReplayKind::update: {
            const Label v = ev.a;
            ++n_updates[v - 1];
            for (Label w = 1; w <= n; ++w)
                if (w != v) {
                    const std::size_t k = rep.pair_index(v, w);
                    first_used[k] = 0;
                    refresh_uses[k] = 0;
                }
            if (y(v) == kInfected)
                set_y(ev.time, v, kReady);
            certify(v);
            break;
        }
        case ReplayKind::recovery: {
            const Label v = ev.a;
            set_x(ev.time, v, false);
            if (y(v) == kReady)
                set_y(ev.time, v, kHealthy);
            certify(v);
            break;
        }
        case ReplayKind::potential: {
            const auto& pc = rep.pairs[ev.a];
            const bool edge = pc.refresh[n_updates[pc.x - 1] + n_updates[pc.y - 1]] != 0;
            const bool potentially_true = x.infected(pc.x) || x.infected(pc.y);
            bool in_j;
            if (potentially_true && !first_used[ev.a]) {
                first_used[ev.a] = 1;
                if (++refresh_uses[ev.a] > 1)
                    ++diag.refresh_reuse;
                ++diag.first_true_decisions;
                in_j = edge;
            } else {
                ++diag.fresh_decisions;
                in_j = pc.fresh[ev.j] < pc.p;
            }
            const bool y_touched = y(pc.x) != kHealthy || y(pc.y) != kHealthy;
            if (edge && potentially_true) {
                set_x(ev.time, pc.x, true);
                set_x(ev.time, pc.y, true);
            }
            if (in_j) {
                out.mean_field_clocks[ev.a].push_back(ev.time);
                if (y_touched) {
                    set_y(ev.time, pc.x, kInfected);
                    set_y(ev.time, pc.y, kInfected);
                }
            }
            certify(pc.x);
            certify(pc.y);
            break;
        }
        }
        if (x_extinct < 0.0 && x.infected_count() == 0)
            x_extinct = ev.time;
        if (y_extinct < 0.0 && y_active == 0)
            y_extinct = ev.time;
    }

    out.x.censored = x_extinct < 0.0;
    out.x.extinction_time = out.x.censored ? rep.horizon : x_extinct;
    out.y_censored = y_extinct < 0.0;
    out.y_extinction_time = out.y_censored ? rep.horizon : y_extinct;
    out.y.end_time = out.y_extinction_time;
    out.rep = std::move(rep);
    return out;
}

} // namespace episim
