#include "episim/dynamics.hpp"
#include "episim/stats.hpp"
#include "oracles.hpp"

#include <doctest.h>

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

std::vector<Label> all_labels(Label n)
{
    std::vector<Label> v(n);
    std::iota(v.begin(), v.end(), Label{1});
    return v;
}

stats::Summary contact_times(const ModelParams& p, std::span<const Label> init, int reps, std::uint64_t seed,
                             Scheduler s = Scheduler::direct)
{
    std::vector<double> t(reps);
    ContactOptions o;
    o.scheduler = s;
    for (int r = 0; r < reps; ++r)
        t[r] = run_contact_process(p, init, 1e9, derive_seed(seed, r), o).record.extinction_time;
    return stats::summarize(t);
}

} // namespace

TEST_CASE("infection state")
{
    const std::vector<Label> init{2, 5};
    auto s = InfectionState::from_labels(6, init);
    CHECK(s.infected_count() == 2);
    CHECK(s.infected(5));
    s.set(5, false);
    s.set(5, false);
    s.set(1, true);
    CHECK(s.infected_count() == 2);
    CHECK(s.infected_labels() == std::vector<Label>{1, 2});
    CHECK(InfectionState::all_infected(4).infected_count() == 4);
    const std::vector<Label> bad{7};
    CHECK_THROWS_AS(InfectionState::from_labels(6, bad), std::domain_error);
}

TEST_CASE("single vertex recovers at rate one")
{
    for (double kappa : {0.0, 3.0}) {
        const auto p = make(1, 1, 0.5, kappa, 2.0);
        const std::vector<Label> init{1};
        const auto s = contact_times(p, init, 100000, 1);
        CHECK(std::abs(s.mean - 1.0) <= 4 * s.se);
    }
}

TEST_CASE("no transmission: maximum of N exponentials")
{
    const auto p = make(10, 1, 0.5, 1, 0.0);
    const auto init = all_labels(10);
    const auto s = contact_times(p, init, 100000, 2);
    CHECK(oracle::harmonic(10) == doctest::Approx(2.9289682539682538));
    CHECK(std::abs(s.mean - oracle::harmonic(10)) <= 4 * s.se);
}

TEST_CASE("two always-connected vertices on a static graph")
{
    const auto p = make(2, 1e9, 0.5, 0.0, 1.0);
    const auto init = all_labels(2);
    CHECK(oracle::two_vertex_complete(1.0) == 2.0);
    const auto s = contact_times(p, init, 100000, 3);
    CHECK(std::abs(s.mean - 2.0) <= 4 * s.se);
}

TEST_CASE("degenerate inputs")
{
    const auto p = make(5, 1, 0.5, 1, 1);
    const auto run = run_contact_process(p, std::span<const Label>{}, 10.0, 1);
    CHECK(run.record.extinction_time == 0.0);
    CHECK_FALSE(run.record.censored);
    CHECK_THROWS_AS(run_contact_process(p, std::span<const Label>{}, 0.0, 1), std::domain_error);
}

TEST_CASE("determinism and censoring")
{
    const auto p = make(60, 3, 0.6, 1, 0.6);
    const auto init = all_labels(60);
    const auto a = run_contact_process(p, init, 20.0, 77).record;
    const auto b = run_contact_process(p, init, 20.0, 77).record;
    CHECK(a.same_outcome(b));
    CHECK(a.counts.updates > 0);
    const auto c = run_contact_process(p, init, 0.5, 77).record;
    CHECK(c.censored);
    CHECK(c.extinction_time == 0.5);
}

TEST_CASE("schedulers agree in distribution")
{
    const auto p = make(10, 1.5, 0.45, 1, 0.8);
    const auto init = all_labels(10);
    std::vector<double> d, f;
    ContactOptions od, of;
    of.scheduler = Scheduler::first_reaction;
    for (int r = 0; r < 10000; ++r) {
        d.push_back(run_contact_process(p, init, 1e9, derive_seed(5, r), od).record.extinction_time);
        f.push_back(run_contact_process(p, init, 1e9, derive_seed(6, r), of).record.extinction_time);
    }
    CHECK(stats::ks_two_sample(d, f).p_value > 0.001);
}

TEST_CASE("event log replays consistently and updates leave health alone")
{
    const auto p = make(30, 2, 0.5, 2, 0.3);
    const auto init = all_labels(30);
    ContactOptions o;
    o.record_events = true;
    const auto run = run_contact_process(p, init, 1e4, 8, o);
    REQUIRE_FALSE(run.record.censored);
    std::vector<int> health(31, 1);
    health[0] = 0;
    double last = 0.0;
    std::uint64_t rec = 0, upd = 0, inf = 0;
    for (const auto& e : run.events) {
        CHECK(e.time > last);
        last = e.time;
        switch (e.type) {
        case EventType::recovery:
            CHECK(health[e.vertex] == 1);
            health[e.vertex] = 0;
            ++rec;
            break;
        case EventType::infection:
            CHECK(health[e.vertex] == 0);
            CHECK(health[e.partner] == 1);
            health[e.vertex] = 1;
            ++inf;
            break;
        case EventType::update:
            CHECK(e.partner == 0);
            ++upd;
            break;
        }
    }
    CHECK(std::accumulate(health.begin(), health.end(), 0) == 0);
    CHECK(run.record.counts.recoveries == rec);
    CHECK(run.record.counts.updates == upd);
    CHECK(run.record.counts.infections == inf);
    CHECK(last == run.record.extinction_time);

    std::ostringstream os;
    const Event evs[] = {{0.5, EventType::recovery, 3, 0}, {1.25, EventType::infection, 2, 4}};
    write_event_log(os, evs);
    CHECK(os.str() == "time,event_type,vertex,partner\n0.5,REC,3,\n1.25,INF,2,4\n");
}

TEST_CASE("mean-field process basics")
{
    const auto p = make(8, 1, 0.25, 1, 0.3);
    const MeanFieldState healthy(8);
    const auto r0 = run_meanfield_process(p, healthy, 10.0, 1, {MeanFieldSampler::aggregated, true});
    CHECK(r0.record.extinction_time == 0.0);
    CHECK(r0.trajectory->changes.empty());

    const auto q = make(1, 1, 0.25, 1, 0.0);
    MeanFieldState one(1, kReady);
    std::vector<double> t;
    for (int r = 0; r < 100000; ++r)
        t.push_back(run_meanfield_process(q, one, 1e9, derive_seed(4, r)).record.extinction_time);
    const auto s = stats::summarize(t);
    CHECK(std::abs(s.mean - 1.0) <= 4 * s.se);
}

TEST_CASE("mean-field trajectories follow the three rules")
{
    const auto p = make(25, 1, 0.25, 1, 0.2);
    MeanFieldState y(25);
    y(3) = kInfected;
    y(20) = kReady;
    const auto run = run_meanfield_process(p, y, 1e9, 12, {MeanFieldSampler::aggregated, true});
    auto cur = run.trajectory->initial;
    for (const auto& c : run.trajectory->changes) {
        CHECK(cur(c.vertex) == c.from);
        const bool update = c.from == kInfected && c.to == kReady;
        const bool recovery = c.from == kReady && c.to == kHealthy;
        const bool infection = c.to == kInfected && c.from != kInfected;
        CHECK((update || recovery || infection));
        cur(c.vertex) = c.to;
    }
    CHECK(cur.extinct());
}

TEST_CASE("aggregated and direct mean-field samplers agree")
{
    const auto p = make(20, 1, 0.25, 1, 0.05);
    const MeanFieldState start(20, kInfected);
    std::vector<double> a, d;
    for (int r = 0; r < 10000; ++r) {
        a.push_back(run_meanfield_process(p, start, 1e9, derive_seed(1, r), {MeanFieldSampler::aggregated, false})
                        .record.extinction_time);
        d.push_back(
            run_meanfield_process(p, start, 1e9, derive_seed(2, r), {MeanFieldSampler::direct, false}).record.extinction_time);
    }
    CHECK(stats::ks_two_sample(a, d).p_value > 0.001);
}
