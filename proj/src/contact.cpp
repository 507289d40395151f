#include "episim/dynamics.hpp"

#include "episim/detail/fenwick.hpp"
#include "episim/network.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace episim {

InfectionState InfectionState::from_labels(Label n_vertices, std::span<const Label> infected)
{
    InfectionState s(n_vertices);
    for (Label x : infected) {
        if (x < 1 || x > n_vertices)
            throw std::domain_error("infected label out of range");
        s.set(x, true);
    }
    return s;
}

InfectionState InfectionState::all_infected(Label n_vertices)
{
    InfectionState s(n_vertices);
    for (Label x = 1; x <= n_vertices; ++x)
        s.set(x, true);
    return s;
}

void InfectionState::set(Label x, bool infected)
{
    auto& h = health_[x - 1];
    if (h == static_cast<std::uint8_t>(infected))
        return;
    h = infected ? 1 : 0;
    infected ? ++infected_count_ : --infected_count_;
}

std::vector<Label> InfectionState::infected_labels() const
{
    std::vector<Label> out;
    for (Label x = 1; x <= size(); ++x)
        if (infected(x))
            out.push_back(x);
    return out;
}

bool MeanFieldState::extinct() const
{
    return std::all_of(state.begin(), state.end(), [](std::uint8_t v) { return v == kHealthy; });
}

std::string to_string(RunMode mode)
{
    switch (mode) {
    case RunMode::evolving:
        return "evolving";
    case RunMode::static_network:
        return "static";
    case RunMode::meanfield:
        return "meanfield";
    case RunMode::coupled:
        return "coupled";
    }
    return "unknown";
}

std::string to_string(EventType type)
{
    switch (type) {
    case EventType::recovery:
        return "REC";
    case EventType::update:
        return "UPD";
    case EventType::infection:
        return "INF";
    }
    return "?";
}

void write_event_log(std::ostream& os, std::span<const Event> events)
{
    os << "time,event_type,vertex,partner\n";
    char buf[64];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof buf, "%.17g", e.time);
        os << buf << ',' << to_string(e.type) << ',' << e.vertex << ',';
        if (e.type == EventType::infection)
            os << e.partner;
        os << '\n';
    }
}

bool RunRecord::same_outcome(const RunRecord& o) const
{
    return seed == o.seed && params == o.params && mode == o.mode && horizon == o.horizon &&
           extinction_time == o.extinction_time && censored == o.censored && counts == o.counts;
}

namespace {

/// Contact process state with per-vertex infected-neighbour counts. Healthy
/// vertices carry weight = infected-neighbour count in a Fenwick tree, so the
/// total infection rate is lambda times the number of infected-healthy edges.
class ContactEngine {
public:
    ContactEngine(const ConnectionKernel& kernel, Rng& rng, std::span<const Label> initial)
        : kernel_(kernel), rng_(rng), graph_(sample_initial_graph(kernel, rng)), health_(kernel.size(), 0),
          pressure_(kernel.size(), 0), position_(kernel.size(), kNone), exposure_(kernel.size())
    {
        for (Label x : initial) {
            if (x < 1 || x > kernel.size())
                throw std::domain_error("initial infected label out of range");
            if (!health_[x - 1]) {
                health_[x - 1] = 1;
                position_[x - 1] = infected_.size();
                infected_.push_back(x);
            }
        }
        for (Label x : infected_)
            for (Label y : graph_.neighbors(x))
                ++pressure_[y - 1];
        for (Label x = 1; x <= kernel.size(); ++x)
            if (!health_[x - 1] && pressure_[x - 1] > 0)
                exposure_.add(x - 1, pressure_[x - 1]);
    }

    std::size_t infected_count() const { return infected_.size(); }
    std::int64_t infected_healthy_edges() const { return exposure_.total(); }
    const NetworkState& graph() const { return graph_; }

    Label recover_random()
    {
        const Label x = infected_[rng_.index(infected_.size())];
        set_healthy(x);
        return x;
    }

    Label update_random()
    {
        const auto x = static_cast<Label>(rng_.index(kernel_.size()) + 1);
        const bool x_inf = health_[x - 1] != 0;
        for (Label y : graph_.detach(x))
            unlink_pressure(x, x_inf, y);
        const auto fresh = sample_neighbors_fast(x, kernel_, rng_);
        graph_.attach(x, fresh);
        for (Label y : fresh)
            link_pressure(x, x_inf, y);
        return x;
    }

    /// Infects a healthy vertex chosen proportionally to its infected-neighbour
    /// count; returns (vertex, infecting partner).
    std::pair<Label, Label> infect_random()
    {
        const auto target = static_cast<std::int64_t>(rng_.index(static_cast<std::size_t>(exposure_.total())));
        const Label v = static_cast<Label>(exposure_.find(target) + 1);
        auto pick = static_cast<std::int64_t>(rng_.index(static_cast<std::size_t>(pressure_[v - 1])));
        Label partner = 0;
        for (Label w : graph_.neighbors(v))
            if (health_[w - 1] && pick-- == 0) {
                partner = w;
                break;
            }
        set_infected(v);
        return {v, partner};
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    void set_infected(Label v)
    {
        exposure_.add(v - 1, -pressure_[v - 1]);
        health_[v - 1] = 1;
        position_[v - 1] = infected_.size();
        infected_.push_back(v);
        for (Label w : graph_.neighbors(v)) {
            ++pressure_[w - 1];
            if (!health_[w - 1])
                exposure_.add(w - 1, 1);
        }
    }

    void set_healthy(Label v)
    {
        const std::size_t pos = position_[v - 1];
        infected_[pos] = infected_.back();
        position_[infected_[pos] - 1] = pos;
        infected_.pop_back();
        position_[v - 1] = kNone;
        health_[v - 1] = 0;
        for (Label w : graph_.neighbors(v)) {
            --pressure_[w - 1];
            if (!health_[w - 1])
                exposure_.add(w - 1, -1);
        }
        exposure_.add(v - 1, pressure_[v - 1]);
    }

    void unlink_pressure(Label x, bool x_inf, Label y)
    {
        const bool y_inf = health_[y - 1] != 0;
        if (x_inf) {
            --pressure_[y - 1];
            if (!y_inf)
                exposure_.add(y - 1, -1);
        }
        if (y_inf) {
            --pressure_[x - 1];
            if (!x_inf)
                exposure_.add(x - 1, -1);
        }
    }

    void link_pressure(Label x, bool x_inf, Label y)
    {
        const bool y_inf = health_[y - 1] != 0;
        if (x_inf) {
            ++pressure_[y - 1];
            if (!y_inf)
                exposure_.add(y - 1, 1);
        }
        if (y_inf) {
            ++pressure_[x - 1];
            if (!x_inf)
                exposure_.add(x - 1, 1);
        }
    }

    const ConnectionKernel& kernel_;
    Rng& rng_;
    NetworkState graph_;
    std::vector<std::uint8_t> health_;
    std::vector<std::int64_t> pressure_;
    std::vector<std::size_t> position_;
    std::vector<Label> infected_;
    detail::FenwickTree exposure_;
};

} // namespace

ContactRun run_contact_process(const ModelParams& params, std::span<const Label> initial_infected, double horizon,
                               std::uint64_t seed, const ContactOptions& options)
{
    if (!(horizon > 0.0))
        throw std::domain_error("horizon must be positive");
    const auto wall_start = std::chrono::steady_clock::now();
    const ConnectionKernel kernel(params);
    Rng rng(seed);

    ContactRun run;
    RunRecord& rec = run.record;
    rec.seed = seed;
    rec.params = params;
    rec.mode = params.kappa > 0.0 ? RunMode::evolving : RunMode::static_network;
    rec.horizon = horizon;

    ContactEngine engine(kernel, rng, initial_infected);
    const double update_rate = params.kappa * params.n_vertices;
    double now = 0.0;
    while (engine.infected_count() > 0) {
        const double rec_rate = static_cast<double>(engine.infected_count());
        const double inf_rate = params.lambda * static_cast<double>(engine.infected_healthy_edges());

        EventType type;
        if (options.scheduler == Scheduler::direct) {
            const double total = rec_rate + update_rate + inf_rate;
            now += rng.exponential(total);
            const double u = rng.uniform() * total;
            if (u < rec_rate)
                type = EventType::recovery;
            else if (u < rec_rate + update_rate || inf_rate == 0.0)
                type = update_rate > 0.0 ? EventType::update : EventType::recovery;
            else
                type = EventType::infection;
        } else {
            const double inf = std::numeric_limits<double>::infinity();
            const double t_rec = rng.exponential(rec_rate);
            const double t_upd = update_rate > 0.0 ? rng.exponential(update_rate) : inf;
            const double t_inf = inf_rate > 0.0 ? rng.exponential(inf_rate) : inf;
            type = EventType::recovery;
            double dt = t_rec;
            if (t_upd < dt) {
                dt = t_upd;
                type = EventType::update;
            }
            if (t_inf < dt) {
                dt = t_inf;
                type = EventType::infection;
            }
            now += dt;
        }
        if (now > horizon)
            break;

        Event ev{now, type, 0, 0};
        switch (type) {
        case EventType::recovery:
            ev.vertex = engine.recover_random();
            ++rec.counts.recoveries;
            break;
        case EventType::update:
            ev.vertex = engine.update_random();
            ++rec.counts.updates;
            break;
        case EventType::infection: {
            const auto [v, partner] = engine.infect_random();
            ev.vertex = v;
            ev.partner = partner;
            ++rec.counts.infections;
            if (options.on_infection)
                options.on_infection({now, v, partner, engine.graph().degree(v)});
            break;
        }
        }
        if (options.record_events)
            run.events.push_back(ev);
    }

    if (engine.infected_count() > 0) {
        rec.censored = true;
        rec.extinction_time = horizon;
    } else {
        rec.extinction_time = now;
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return run;
}

} // namespace episim
