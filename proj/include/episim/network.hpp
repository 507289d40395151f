#pragma once

#include "episim/model.hpp"
#include "episim/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

namespace episim {

/// Undirected simple graph on labels 1..N: sorted neighbour lists plus a
/// hashed pair set for O(1) membership.
class NetworkState {
public:
    explicit NetworkState(Label n_vertices);

    Label size() const { return static_cast<Label>(adjacency_.size()); }
    std::size_t edge_count() const { return pairs_.size(); }

    bool has_edge(Label x, Label y) const;
    /// Returns false if the edge was already present.
    bool add_edge(Label x, Label y);
    /// Returns false if the edge was absent.
    bool remove_edge(Label x, Label y);

    std::span<const Label> neighbors(Label x) const { return adjacency_[x - 1]; }
    std::size_t degree(Label x) const { return adjacency_[x - 1].size(); }

    /// Removes every edge incident to x and returns the former neighbours (sorted).
    std::vector<Label> detach(Label x);
    /// Connects x to each label of `sorted_neighbors` (x itself must not occur).
    void attach(Label x, std::span<const Label> sorted_neighbors);

    /// All edges as (x, y) with x < y, lexicographically sorted.
    std::vector<std::pair<Label, Label>> edges() const;

    /// Symmetry, sortedness, no self-loops, pair set consistent with lists.
    bool check_invariants() const;

    bool operator==(const NetworkState& other) const { return adjacency_ == other.adjacency_; }

private:
    static std::uint64_t key(Label x, Label y);

    std::vector<std::vector<Label>> adjacency_;
    std::unordered_set<std::uint64_t> pairs_;
};

/// Edge-list snapshot: one "x y" line per edge, x < y, sorted.
void write_edge_list(std::ostream& os, const NetworkState& g);

/// Neighbours y of x in [lo, hi] (excluding x), each present independently
/// with probability p_xy. Skip-sampling against the nonincreasing envelope
/// q_xy = beta N^(2 gamma - 1) x^-gamma y^-gamma with per-candidate acceptance
/// p/q; saturated labels (q >= 1) are included directly. Appends to `out` in
/// increasing order.
void sample_neighbors_in_range(Label x, Label lo, Label hi, const ConnectionKernel& kernel, Rng& rng,
                               std::vector<Label>& out);

/// Fresh neighbour set of x over all other labels, sorted.
std::vector<Label> sample_neighbors_fast(Label x, const ConnectionKernel& kernel, Rng& rng);

/// Chung-Lu sample: every pair present independently with p_xy.
/// Expected cost O(N + number of edges).
NetworkState sample_initial_graph(const ConnectionKernel& kernel, Rng& rng);

/// Resamples every pair {x, y}; pairs not involving x are untouched.
void update_vertex(NetworkState& g, Label x, const ConnectionKernel& kernel, Rng& rng);

struct StationarityReport {
    std::vector<std::pair<Label, Label>> pairs;
    std::vector<std::uint64_t> present_counts;
    std::vector<double> expected; ///< p_xy per pair
    std::uint64_t replicas = 0;
    double mean_updates = 0.0;
    double update_count_se = 0.0;
    double expected_updates = 0.0; ///< N kappa t

    double frequency(std::size_t i) const { return static_cast<double>(present_counts[i]) / replicas; }
    /// Binomial standard error of frequency(i) under the null p_xy.
    double standard_error(std::size_t i) const;
};

/// Runs the network evolution alone to `t_snapshot` in each replica (seeds
/// derive_seed(seed, r)) and tallies the presence of each pair in `pairs`.
StationarityReport stationarity_check(const ModelParams& params, double t_snapshot, std::uint64_t replicas,
                                      std::span<const std::pair<Label, Label>> pairs, std::uint64_t seed);

/// Network at time t after evolving an initial sample; used by the check above.
NetworkState evolve_network(const ConnectionKernel& kernel, double t, Rng& rng, std::uint64_t* n_updates = nullptr);

} // namespace episim
