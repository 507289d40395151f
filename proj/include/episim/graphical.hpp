#pragma once

#include "episim/dynamics.hpp"
#include "episim/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace episim {

/// Clocks and refresh variables attached to one potential edge {x, y}, x < y.
struct PairClock {
    Label x = 0;
    Label y = 0;
    double p = 0.0;
    std::vector<double> potential;      ///< potential infection times (rate lambda), sorted
    std::vector<double> fresh;          ///< one uniform per potential time; drives the independent Bernoulli(p) of the coupling
    std::vector<std::uint8_t> refresh;  ///< C_0, C_1, ...: edge state after the n-th update of x or y

    bool operator==(const PairClock&) const = default;
};

/// Every Poisson clock and Bernoulli refresh variable on [0, horizon]. The
/// contact process, the mean-field process and their coupling are
/// deterministic functions of it.
class GraphicalRepresentation {
public:
    ModelParams params;
    double horizon = 0.0;
    std::vector<std::vector<double>> updates;    ///< per vertex, rate kappa
    std::vector<std::vector<double>> recoveries; ///< per vertex, rate 1
    std::vector<PairClock> pairs;                ///< lexicographic in (x, y)

    Label size() const { return params.n_vertices; }
    std::size_t pair_index(Label x, Label y) const;
    const PairClock& pair(Label x, Label y) const { return pairs[pair_index(x, y)]; }

    /// Sorted union of the update times of x and y.
    std::vector<double> merged_updates(Label x, Label y) const;
    /// Number of updates of x or y in [0, t]; selects the refresh variable in force at t.
    std::size_t refresh_index(Label x, Label y, double t) const;
    bool edge_at(Label x, Label y, double t) const;
    /// Potential infection times falling in intervals where the edge is present.
    std::vector<double> infection_trace(Label x, Label y) const;

    /// Throws std::logic_error if a point set is unsorted or outside
    /// [0, horizon], a refresh sequence is too short, or two points coincide.
    void check_invariants() const;

    bool operator==(const GraphicalRepresentation&) const = default;
};

struct RepresentationBudget {
    Label max_vertices = 200;
    double max_points = 5e7;
};

class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(const std::string& what, double estimate) : std::runtime_error(what), estimate_(estimate) {}
    double estimate() const { return estimate_; }

private:
    double estimate_;
};

/// Expected number of stored points and variables for the given horizon.
double representation_size_estimate(const ModelParams& params, double horizon);

GraphicalRepresentation sample_representation(const ModelParams& params, double horizon, std::uint64_t seed,
                                              const RepresentationBudget& budget = {});

/// Text replay format, one process per line:
///   episim-representation 1
///   params N beta gamma kappa lambda horizon
///   U x t...      update times of x
///   R x t...      recovery times of x
///   I x y t...    potential infection times of {x, y}
///   F x y u...    auxiliary uniforms, aligned with I
///   C x y b...    refresh bits C_0, C_1, ...
/// Reals are written with 17 significant digits and round-trip exactly.
void write_representation(std::ostream& os, const GraphicalRepresentation& rep);
GraphicalRepresentation read_representation(std::istream& is);

/// X trajectory evaluated from a representation.
struct XTrajectory {
    InfectionState initial{0};
    std::vector<StateChange> changes;
    double extinction_time = 0.0;
    bool censored = false;
};

XTrajectory evolve_x_from_representation(const GraphicalRepresentation& rep, const InfectionState& initial);

struct CouplingDiagnostics {
    std::uint64_t events = 0;
    std::uint64_t ordering_violations = 0;  ///< times where X = 1 but Y = 0
    std::uint64_t first_true_decisions = 0; ///< J membership decided by C_n
    std::uint64_t fresh_decisions = 0;      ///< J membership decided by an independent uniform
    std::uint64_t refresh_reuse = 0;        ///< C_n consumed more than once in one interval (must stay 0)
};

struct CoupledRealization {
    GraphicalRepresentation rep;
    std::vector<std::vector<double>> mean_field_clocks; ///< J^{x,y}, aligned with rep.pairs
    XTrajectory x;
    MeanFieldTrajectory y;
    double y_extinction_time = 0.0;
    bool y_censored = false;
    CouplingDiagnostics diagnostics;
};

/// Replays the representation in global time order, evolving X by the
/// graphical rules and Y by the mean-field rules on J, U, R. A potential
/// infection time enters J according to C_n when it is the first potential
/// true infection of its update interval, otherwise according to a fresh
/// Bernoulli(p). Throws std::domain_error unless x0 <= y0.
CoupledRealization build_coupling(GraphicalRepresentation rep, const InfectionState& x0, const MeanFieldState& y0);

} // namespace episim
