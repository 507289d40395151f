#include "episim/network.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace episim {

NetworkState::NetworkState(Label n_vertices) : adjacency_(n_vertices) {}

std::uint64_t NetworkState::key(Label x, Label y)
{
    if (x > y)
        std::swap(x, y);
    return (static_cast<std::uint64_t>(x) << 32) | y;
}

bool NetworkState::has_edge(Label x, Label y) const { return pairs_.count(key(x, y)) != 0; }

bool NetworkState::add_edge(Label x, Label y)
{
    if (x == y)
        throw std::domain_error("self-loop");
    if (!pairs_.insert(key(x, y)).second)
        return false;
    auto& ax = adjacency_[x - 1];
    ax.insert(std::lower_bound(ax.begin(), ax.end(), y), y);
    auto& ay = adjacency_[y - 1];
    ay.insert(std::lower_bound(ay.begin(), ay.end(), x), x);
    return true;
}

bool NetworkState::remove_edge(Label x, Label y)
{
    if (pairs_.erase(key(x, y)) == 0)
        return false;
    auto& ax = adjacency_[x - 1];
    ax.erase(std::lower_bound(ax.begin(), ax.end(), y));
    auto& ay = adjacency_[y - 1];
    ay.erase(std::lower_bound(ay.begin(), ay.end(), x));
    return true;
}

std::vector<Label> NetworkState::detach(Label x)
{
    std::vector<Label> old;
    old.swap(adjacency_[x - 1]);
    for (Label y : old) {
        pairs_.erase(key(x, y));
        auto& ay = adjacency_[y - 1];
        ay.erase(std::lower_bound(ay.begin(), ay.end(), x));
    }
    return old;
}

void NetworkState::attach(Label x, std::span<const Label> sorted_neighbors)
{
    for (Label y : sorted_neighbors)
        add_edge(x, y);
}

std::vector<std::pair<Label, Label>> NetworkState::edges() const
{
    std::vector<std::pair<Label, Label>> out;
    out.reserve(pairs_.size());
    for (Label x = 1; x <= size(); ++x)
        for (Label y : adjacency_[x - 1])
            if (x < y)
                out.emplace_back(x, y);
    return out;
}

bool NetworkState::check_invariants() const
{
    std::size_t degree_sum = 0;
    for (Label x = 1; x <= size(); ++x) {
        const auto& ax = adjacency_[x - 1];
        if (!std::is_sorted(ax.begin(), ax.end()) || std::adjacent_find(ax.begin(), ax.end()) != ax.end())
            return false;
        for (Label y : ax) {
            if (y == x || y < 1 || y > size())
                return false;
            const auto& ay = adjacency_[y - 1];
            if (!std::binary_search(ay.begin(), ay.end(), x) || !has_edge(x, y))
                return false;
        }
        degree_sum += ax.size();
    }
    return degree_sum == 2 * pairs_.size();
}

void write_edge_list(std::ostream& os, const NetworkState& g)
{
    for (const auto& [x, y] : g.edges())
        os << x << ' ' << y << '\n';
}

void sample_neighbors_in_range(Label x, Label lo, Label hi, const ConnectionKernel& kernel, Rng& rng,
                               std::vector<Label>& out)
{
    if (lo < 1)
        lo = 1;
    if (hi > kernel.size())
        hi = kernel.size();
    if (lo > hi)
        return;

    const Label sat = kernel.saturation_limit(x);
    Label y = lo;
    for (; y <= hi && y <= sat; ++y)
        if (y != x)
            out.push_back(y);
    if (y > hi)
        return;

    double bound = kernel.envelope(x, y); // < 1 and dominates every later label
    while (true) {
        const std::uint64_t skip = rng.geometric_skip(bound, static_cast<std::uint64_t>(hi - y) + 1);
        if (skip > static_cast<std::uint64_t>(hi - y))
            return;
        y += static_cast<Label>(skip);
        const double q = kernel.envelope(x, y);
        if (rng.uniform() * bound < q && y != x)
            out.push_back(y);
        bound = q;
        if (y == hi)
            return;
        ++y;
    }
}

std::vector<Label> sample_neighbors_fast(Label x, const ConnectionKernel& kernel, Rng& rng)
{
    std::vector<Label> out;
    sample_neighbors_in_range(x, 1, kernel.size(), kernel, rng, out);
    return out;
}

NetworkState sample_initial_graph(const ConnectionKernel& kernel, Rng& rng)
{
    NetworkState g(kernel.size());
    std::vector<Label> buffer;
    for (Label x = 1; x < kernel.size(); ++x) {
        buffer.clear();
        sample_neighbors_in_range(x, x + 1, kernel.size(), kernel, rng, buffer);
        for (Label y : buffer)
            g.add_edge(x, y);
    }
    return g;
}

void update_vertex(NetworkState& g, Label x, const ConnectionKernel& kernel, Rng& rng)
{
    g.detach(x);
    const auto fresh = sample_neighbors_fast(x, kernel, rng);
    g.attach(x, fresh);
}

double StationarityReport::standard_error(std::size_t i) const
{
    const double p = expected[i];
    return std::sqrt(p * (1.0 - p) / static_cast<double>(replicas));
}

NetworkState evolve_network(const ConnectionKernel& kernel, double t, Rng& rng, std::uint64_t* n_updates)
{
    NetworkState g = sample_initial_graph(kernel, rng);
    const double rate = kernel.params().kappa * kernel.size();
    std::uint64_t count = 0;
    if (rate > 0.0) {
        double now = rng.exponential(rate);
        while (now <= t) {
            const auto x = static_cast<Label>(rng.index(kernel.size()) + 1);
            update_vertex(g, x, kernel, rng);
            ++count;
            now += rng.exponential(rate);
        }
    }
    if (n_updates)
        *n_updates = count;
    return g;
}

StationarityReport stationarity_check(const ModelParams& params, double t_snapshot, std::uint64_t replicas,
                                      std::span<const std::pair<Label, Label>> pairs, std::uint64_t seed)
{
    if (!(t_snapshot >= 0.0))
        throw std::domain_error("t_snapshot must be nonnegative");
    const ConnectionKernel kernel(params);
    StationarityReport report;
    report.pairs.assign(pairs.begin(), pairs.end());
    report.present_counts.assign(pairs.size(), 0);
    for (const auto& [x, y] : pairs)
        report.expected.push_back(kernel.prob(x, y));
    report.replicas = replicas;
    report.expected_updates = params.kappa * params.n_vertices * t_snapshot;

    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t r = 0; r < replicas; ++r) {
        Rng rng(derive_seed(seed, r));
        std::uint64_t updates = 0;
        const NetworkState g = evolve_network(kernel, t_snapshot, rng, &updates);
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (g.has_edge(pairs[i].first, pairs[i].second))
                ++report.present_counts[i];
        sum += static_cast<double>(updates);
        sum_sq += static_cast<double>(updates) * static_cast<double>(updates);
    }
    if (replicas > 0) {
        const double n = static_cast<double>(replicas);
        report.mean_updates = sum / n;
        const double var = replicas > 1 ? (sum_sq - n * report.mean_updates * report.mean_updates) / (n - 1) : 0.0;
        report.update_count_se = std::sqrt(std::max(var, 0.0) / n);
    }
    return report;
}

} // namespace episim
