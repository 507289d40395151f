#include "episim/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <string>
#include <vector>

namespace episim {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Expected hitting times of the absorbing set: for transient s,
/// sum_{s'} q(s, s') (h(s') - h(s)) = -1 with h = 0 on the absorbing set.
/// `rows(s, emit)` enumerates (target, rate) pairs; `transient` maps a state
/// to its row index or -1.
template <class Transitions>
Eigen::VectorXd solve_hitting_times(std::size_t n_transient, const std::vector<std::size_t>& transient_states,
                                    const std::vector<long>& row_of, Transitions&& transitions)
{
    Triplets triplets;
    for (std::size_t r = 0; r < n_transient; ++r) {
        double out = 0.0;
        transitions(transient_states[r], [&](std::size_t target, double rate) {
            if (rate <= 0.0 || target == transient_states[r])
                return;
            out += rate;
            if (row_of[target] >= 0)
                triplets.emplace_back(static_cast<int>(r), static_cast<int>(row_of[target]), rate);
        });
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(r), -out);
    }
    Eigen::SparseMatrix<double> a(static_cast<int>(n_transient), static_cast<int>(n_transient));
    a.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("oracle: generator factorisation failed");
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(static_cast<int>(n_transient), -1.0);
    Eigen::VectorXd h = lu.solve(b);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("oracle: linear solve failed");
    return h;
}

} // namespace

double joint_chain_states(Label n)
{
    const double pairs = 0.5 * n * (n - 1.0);
    return std::pow(2.0, pairs + n);
}

double meanfield_chain_states(Label n) { return std::pow(3.0, n); }

double contact_extinction_oracle(const ModelParams& params, std::span<const Label> initial_infected,
                                 const OracleLimits& limits)
{
    params.validate();
    const Label n = params.n_vertices;
    if (n > limits.max_joint_vertices)
        throw StateSpaceTooLarge("joint chain for N=" + std::to_string(n) + " exceeds the cap N<=" +
                                     std::to_string(limits.max_joint_vertices) + " (about " +
                                     std::to_string(joint_chain_states(n)) + " states)",
                                 joint_chain_states(n));
    std::size_t h0 = 0;
    for (Label x : initial_infected) {
        if (x < 1 || x > n)
            throw std::domain_error("initial infected label out of range");
        h0 |= std::size_t{1} << (x - 1);
    }
    if (h0 == 0)
        return 0.0;

    // Pair index k <-> (pair_x[k], pair_y[k]).
    std::vector<Label> pair_x, pair_y;
    std::vector<double> pair_p;
    for (Label x = 1; x <= n; ++x)
        for (Label y = x + 1; y <= n; ++y) {
            pair_x.push_back(x);
            pair_y.push_back(y);
            pair_p.push_back(connection_probability(x, y, params));
        }
    const std::size_t n_pairs = pair_x.size();
    const std::size_t n_graphs = std::size_t{1} << n_pairs;
    const std::size_t n_health = std::size_t{1} << n;
    const auto index = [&](std::size_t g, std::size_t h) { return g * n_health + h; };

    std::vector<long> row_of(n_graphs * n_health, -1);
    std::vector<std::size_t> transient;
    for (std::size_t g = 0; g < n_graphs; ++g)
        for (std::size_t h = 1; h < n_health; ++h) {
            row_of[index(g, h)] = static_cast<long>(transient.size());
            transient.push_back(index(g, h));
        }

    // Pairs incident to each vertex, as bit masks over pair indices.
    std::vector<std::size_t> incident(n + 1, 0);
    for (std::size_t k = 0; k < n_pairs; ++k) {
        incident[pair_x[k]] |= std::size_t{1} << k;
        incident[pair_y[k]] |= std::size_t{1} << k;
    }

    auto transitions = [&](std::size_t state, auto&& emit) {
        const std::size_t g = state / n_health;
        const std::size_t h = state % n_health;
        for (Label x = 1; x <= n; ++x) {
            const std::size_t bit = std::size_t{1} << (x - 1);
            if (h & bit)
                emit(index(g, h & ~bit), 1.0);
        }
        for (std::size_t k = 0; k < n_pairs; ++k) {
            if (!(g & (std::size_t{1} << k)))
                continue;
            const std::size_t bx = std::size_t{1} << (pair_x[k] - 1);
            const std::size_t by = std::size_t{1} << (pair_y[k] - 1);
            const bool ix = h & bx, iy = h & by;
            if (ix != iy)
                emit(index(g, h | bx | by), params.lambda);
        }
        if (params.kappa > 0.0) {
            for (Label x = 1; x <= n; ++x) {
                const std::size_t mask = incident[x];
                // Enumerate every configuration `sub` of the pairs in `mask`.
                std::size_t sub = 0;
                while (true) {
                    double prob = 1.0;
                    for (std::size_t k = 0; k < n_pairs; ++k)
                        if (mask & (std::size_t{1} << k))
                            prob *= (sub & (std::size_t{1} << k)) ? pair_p[k] : 1.0 - pair_p[k];
                    emit(index((g & ~mask) | sub, h), params.kappa * prob);
                    if (sub == mask)
                        break;
                    sub = (sub - mask) & mask;
                }
            }
        }
    };

    const Eigen::VectorXd times = solve_hitting_times(transient.size(), transient, row_of, transitions);

    double expected = 0.0;
    for (std::size_t g = 0; g < n_graphs; ++g) {
        double weight = 1.0;
        for (std::size_t k = 0; k < n_pairs; ++k)
            weight *= (g & (std::size_t{1} << k)) ? pair_p[k] : 1.0 - pair_p[k];
        if (weight > 0.0)
            expected += weight * times[row_of[index(g, h0)]];
    }
    return expected;
}

double meanfield_extinction_oracle(const ModelParams& params, const MeanFieldState& initial,
                                   const OracleLimits& limits)
{
    params.validate();
    const Label n = params.n_vertices;
    if (initial.size() != n)
        throw std::domain_error("initial mean-field state has the wrong size");
    if (n > limits.max_meanfield_vertices)
        throw StateSpaceTooLarge("mean-field chain for N=" + std::to_string(n) + " exceeds the cap N<=" +
                                     std::to_string(limits.max_meanfield_vertices) + " (about " +
                                     std::to_string(meanfield_chain_states(n)) + " states)",
                                 meanfield_chain_states(n));
    if (initial.extinct())
        return 0.0;
    if (!(params.kappa > 0.0))
        throw std::domain_error("mean-field chain never leaves state 2 without updates (kappa = 0)");

    std::vector<std::size_t> pow3(n + 1, 1);
    for (Label i = 1; i <= n; ++i)
        pow3[i] = pow3[i - 1] * 3;
    const std::size_t n_states = pow3[n];
    const auto digit = [&](std::size_t s, Label x) { return (s / pow3[x - 1]) % 3; };
    const auto with = [&](std::size_t s, Label x, std::size_t v) { return s - digit(s, x) * pow3[x - 1] + v * pow3[x - 1]; };

    std::vector<long> row_of(n_states, -1);
    std::vector<std::size_t> transient;
    for (std::size_t s = 1; s < n_states; ++s) {
        row_of[s] = static_cast<long>(transient.size());
        transient.push_back(s);
    }

    std::vector<double> pair_rate((n + 1) * (n + 1), 0.0);
    for (Label x = 1; x <= n; ++x)
        for (Label y = x + 1; y <= n; ++y)
            pair_rate[x * (n + 1) + y] = params.lambda * connection_probability(x, y, params);

    auto transitions = [&](std::size_t s, auto&& emit) {
        for (Label x = 1; x <= n; ++x) {
            const auto v = digit(s, x);
            if (v == kInfected)
                emit(with(s, x, kReady), params.kappa);
            else if (v == kReady)
                emit(with(s, x, kHealthy), 1.0);
        }
        for (Label x = 1; x <= n; ++x)
            for (Label y = x + 1; y <= n; ++y)
                if (digit(s, x) != kHealthy || digit(s, y) != kHealthy)
                    emit(with(with(s, x, kInfected), y, kInfected), pair_rate[x * (n + 1) + y]);
    };

    const Eigen::VectorXd times = solve_hitting_times(transient.size(), transient, row_of, transitions);
    std::size_t s0 = 0;
    for (Label x = 1; x <= n; ++x) {
        if (initial(x) > kInfected)
            throw std::domain_error("mean-field state values must be 0, 1 or 2");
        s0 += initial(x) * pow3[x - 1];
    }
    return times[row_of[s0]];
}

} // namespace episim
