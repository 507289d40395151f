#pragma once

#include "episim/model.hpp"
#include "episim/rng.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace episim {

/// Health vector of the contact process X (0 healthy, 1 infected).
class InfectionState {
public:
    explicit InfectionState(Label n_vertices) : health_(n_vertices, 0) {}
    static InfectionState from_labels(Label n_vertices, std::span<const Label> infected);
    static InfectionState all_infected(Label n_vertices);

    Label size() const { return static_cast<Label>(health_.size()); }
    bool infected(Label x) const { return health_[x - 1] != 0; }
    void set(Label x, bool infected);
    std::size_t infected_count() const { return infected_count_; }
    std::vector<Label> infected_labels() const;
    std::span<const std::uint8_t> values() const { return health_; }

    bool operator==(const InfectionState&) const = default;

private:
    std::vector<std::uint8_t> health_;
    std::size_t infected_count_ = 0;
};

/// States of the mean-field process Y.
enum : std::uint8_t { kHealthy = 0, kReady = 1, kInfected = 2 };

/// Ternary vector of Y: 0 healthy, 1 infected but ready to recover, 2 infected.
struct MeanFieldState {
    std::vector<std::uint8_t> state;

    explicit MeanFieldState(Label n_vertices = 0, std::uint8_t fill = kHealthy) : state(n_vertices, fill) {}
    Label size() const { return static_cast<Label>(state.size()); }
    std::uint8_t operator()(Label x) const { return state[x - 1]; }
    std::uint8_t& operator()(Label x) { return state[x - 1]; }
    bool extinct() const;

    bool operator==(const MeanFieldState&) const = default;
};

enum class RunMode { evolving, static_network, meanfield, coupled };
std::string to_string(RunMode mode);

enum class EventType { recovery, update, infection };
std::string to_string(EventType type); ///< REC, UPD, INF

struct Event {
    double time = 0.0;
    EventType type = EventType::recovery;
    Label vertex = 0;
    Label partner = 0; ///< infecting neighbour for INF, 0 otherwise
};

/// Event log CSV: header "time,event_type,vertex,partner"; partner empty for REC/UPD.
void write_event_log(std::ostream& os, std::span<const Event> events);

struct EventCounts {
    std::uint64_t recoveries = 0;
    std::uint64_t updates = 0;
    std::uint64_t infections = 0;

    bool operator==(const EventCounts&) const = default;
};

/// Summary of one replica. If censored, extinction_time equals the horizon.
struct RunRecord {
    std::uint64_t seed = 0;
    ModelParams params;
    RunMode mode = RunMode::evolving;
    double horizon = 0.0;
    double extinction_time = 0.0;
    bool censored = false;
    EventCounts counts;
    double wall_seconds = 0.0;

    /// Equality ignoring wall-clock time.
    bool same_outcome(const RunRecord& o) const;
};

enum class Scheduler {
    direct,        ///< one exponential for the total rate, then pick the channel
    first_reaction ///< one exponential per channel, earliest wins
};

struct InfectionObservation {
    double time;
    Label vertex;
    Label partner;
    std::size_t degree; ///< degree of `vertex` at the moment of infection
};

struct ContactOptions {
    Scheduler scheduler = Scheduler::direct;
    bool record_events = false;
    std::function<void(const InfectionObservation&)> on_infection;
};

struct ContactRun {
    RunRecord record;
    std::vector<Event> events;
};

/// Exact simulation of the contact process on the evolving network (static
/// when kappa = 0), started from a stationary network sample and the given
/// infected labels. Runs until extinction or `horizon`.
ContactRun run_contact_process(const ModelParams& params, std::span<const Label> initial_infected, double horizon,
                               std::uint64_t seed, const ContactOptions& options = {});

struct StateChange {
    double time = 0.0;
    Label vertex = 0;
    std::uint8_t from = 0;
    std::uint8_t to = 0;
};

/// Initial state plus every change in chronological order.
struct MeanFieldTrajectory {
    MeanFieldState initial;
    std::vector<StateChange> changes;
    double end_time = 0.0;
};

enum class MeanFieldSampler {
    aggregated, ///< thinned proposals from the product envelope, O(log N) per event
    direct      ///< explicit per-pair rates, O(N^2) per event; reference only
};

struct MeanFieldOptions {
    MeanFieldSampler sampler = MeanFieldSampler::aggregated;
    bool record_trajectory = false;
};

struct MeanFieldRun {
    RunRecord record;
    std::optional<MeanFieldTrajectory> trajectory;
};

/// Simulates Y on the complete graph with pair rates lambda p_xy, update
/// clocks (2 -> 1) of rate kappa and recovery clocks (1 -> 0) of rate one.
/// `infections` counts pair events with at least one non-healthy endpoint.
MeanFieldRun run_meanfield_process(const ModelParams& params, const MeanFieldState& initial, double horizon,
                                   std::uint64_t seed, const MeanFieldOptions& options = {});

} // namespace episim
