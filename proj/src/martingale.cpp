#include "episim/martingale.hpp"

#include "episim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace episim {

double score_total(const MeanFieldState& state, const ScoreTable& scores)
{
    double m = 0.0;
    for (Label x = 1; x <= state.size(); ++x) {
        if (state(x) == kInfected)
            m += scores.s2(x);
        else if (state(x) == kReady)
            m += scores.s1(x);
    }
    return m;
}

namespace {

double score_of(std::uint8_t s, Label x, const ScoreTable& scores)
{
    return s == kInfected ? scores.s2(x) : s == kReady ? scores.s1(x) : 0.0;
}

} // namespace

std::vector<MartingalePoint> martingale_monitor(const MeanFieldTrajectory& trajectory, const ScoreTable& scores,
                                                double nu)
{
    std::vector<MartingalePoint> out;
    out.reserve(trajectory.changes.size() + 1);
    double m = score_total(trajectory.initial, scores);
    std::size_t active = 0;
    for (auto v : trajectory.initial.state)
        active += v != kHealthy;
    out.push_back({0.0, m, std::sqrt(m)});
    for (const auto& c : trajectory.changes) {
        m += score_of(c.to, c.vertex, scores) - score_of(c.from, c.vertex, scores);
        active += (c.to != kHealthy) - (c.from != kHealthy);
        if (active == 0 || m < 0.0)
            m = 0.0; // rounding residue of the incremental sum
        out.push_back({c.time, m, std::sqrt(m) + 0.5 * nu * c.time});
    }
    return out;
}

double stopped_z_at(const std::vector<MartingalePoint>& series, double t, double nu)
{
    // Last point at or before t.
    auto it = std::upper_bound(series.begin(), series.end(), t,
                               [](double v, const MartingalePoint& p) { return v < p.time; });
    const MartingalePoint& p = *(it == series.begin() ? it : std::prev(it));
    if (p.m == 0.0)
        return 0.5 * nu * p.time; // stopped at extinction
    return std::sqrt(p.m) + 0.5 * nu * t;
}

nlohmann::json DriftReport::to_json() const
{
    std::string digits;
    digits.reserve(state.size());
    std::size_t counts[3] = {0, 0, 0};
    for (auto v : state.state) {
        digits.push_back(static_cast<char>('0' + v));
        ++counts[v];
    }
    return {{"N", state.size()},
            {"state", digits},
            {"healthy", counts[0]},
            {"ready", counts[1]},
            {"infected", counts[2]},
            {"M", m},
            {"drift", drift},
            {"nu", nu},
            {"bound", bound},
            {"margin", margin},
            {"holds", margin >= 0.0}};
}

DriftReport exact_drift(const MeanFieldState& state, const ModelParams& params, const ScoreTable& scores,
                        double nu)
{
    if (state.size() != params.n_vertices || scores.size() != params.n_vertices)
        throw std::domain_error("exact_drift: size mismatch");
    const ConnectionKernel kernel(params);
    const Label n = params.n_vertices;

    // Active labels (Y >= 1) in increasing order with suffix sums of y^-gamma.
    std::vector<Label> active;
    for (Label x = 1; x <= n; ++x)
        if (state(x) != kHealthy)
            active.push_back(x);
    std::vector<double> tail(active.size() + 1, 0.0);
    for (std::size_t i = active.size(); i-- > 0;)
        tail[i] = tail[i + 1] + 1.0 / kernel.label_power(active[i]);

    double drift = 0.0;
    for (Label x = 1; x <= n; ++x) {
        const double s1 = scores.s1(x), s2 = scores.s2(x);
        switch (state(x)) {
        case kInfected:
            drift += params.kappa * (s1 - s2);
            break;
        case kReady:
            drift += -s1 + params.lambda * scores.degree_sum(x) * (s2 - s1);
            break;
        default: {
            if (active.empty())
                break;
            const Label sat = kernel.saturation_limit(x);
            const auto split =
                static_cast<std::size_t>(std::upper_bound(active.begin(), active.end(), sat) - active.begin());
            const double exposure = static_cast<double>(split) + kernel.scale() / kernel.label_power(x) * tail[split];
            drift += params.lambda * s2 * exposure;
        }
        }
    }

    DriftReport r{state, score_total(state, scores), drift, nu, 0.0, 0.0};
    r.bound = -nu * std::sqrt(r.m);
    r.margin = r.bound - r.drift;
    return r;
}

double nu_at(const ModelParams& params, double lambda)
{
    const double a = 2.0 * lambda * params.beta / (1.0 - 3.0 * params.gamma);
    const double b = lambda * params.beta / (1.0 - params.gamma);
    return std::min((params.kappa - a) / std::sqrt(2.0), 1.0 - a - b);
}

NuThreshold nu_threshold(const ModelParams& params, const ScoreTable& scores)
{
    params.validate();
    if (!(params.gamma < 1.0 / 3.0))
        throw std::domain_error("nu_threshold requires gamma < 1/3");
    NuThreshold r;
    std::ostringstream d;
    const double a1 = 2.0 * params.beta / (1.0 - 3.0 * params.gamma); // a = a1 lambda
    const double b1 = params.beta / (1.0 - params.gamma);              // b = b1 lambda
    d << "u = (N/x)^gamma ranges over [1, N^gamma], attaining 1 at x = N; a = " << a1 << "*lambda, b = " << b1
      << "*lambda. Update term: (a - kappa) u <= -nu sqrt(u^2 + u) for all u >= 1 iff nu <= (kappa - a)/sqrt(2). "
         "Ready term: a u + (b - 1) u^2 <= -nu u^2 for all u >= 1 iff nu <= 1 - a - b. ";
    if (!(params.kappa > 0.0)) {
        d << "kappa = 0: the update term is nonnegative for every lambda, no nu > 0 exists.";
        r.derivation = d.str();
        return r;
    }
    const double from_update = params.kappa / a1;
    const double from_ready = 1.0 / (a1 + b1);
    r.lambda_critical = std::min(from_update, from_ready);
    r.lambda_max = 0.5 * r.lambda_critical;
    r.nu = nu_at(params, r.lambda_max);
    r.feasible = r.nu > 0.0 && verify_nu(params, scores, r.lambda_max, r.nu);
    d << "Both vanish at lambda = min(kappa/a1, 1/(a1 + b1)) = min(" << from_update << ", " << from_ready
      << ") = " << r.lambda_critical << "; operating at lambda_max = " << r.lambda_max << " gives nu = " << r.nu << ".";
    r.derivation = d.str();
    return r;
}

bool verify_nu(const ModelParams& params, const ScoreTable& scores, double lambda, double nu)
{
    const double a = 2.0 * lambda * params.beta / (1.0 - 3.0 * params.gamma);
    const double b = lambda * params.beta / (1.0 - params.gamma);
    for (Label x = 1; x <= params.n_vertices; ++x) {
        const double u = std::pow(static_cast<double>(params.n_vertices) / x, params.gamma);
        const double lhs_update = (a - params.kappa) * u;
        const double rhs_update = -nu * std::sqrt(scores.s2(x));
        const double lhs_ready = a * u + (b - 1.0) * u * u;
        const double rhs_ready = -nu * scores.s1(x);
        if (lhs_update > rhs_update + kBoundRelTol * std::abs(rhs_update))
            return false;
        if (lhs_ready > rhs_ready + kBoundRelTol * std::abs(rhs_ready))
            return false;
    }
    return true;
}

double meanfield_time_bound(const ModelParams& params, double nu)
{
    return 2.0 / nu * std::sqrt(2.0 * params.n_vertices / (1.0 - 2.0 * params.gamma));
}

BoundCheck meanfield_extinction_bound_check(const ModelParams& params, double nu, std::size_t replicas,
                                            std::uint64_t seed, double horizon, unsigned workers)
{
    BoundCheck out;
    out.samples.resize(replicas);
    std::vector<std::uint8_t> censored(replicas, 0);
    const MeanFieldState start(params.n_vertices, kInfected);
    parallel_for(replicas, workers, [&](std::size_t r) {
        const auto run = run_meanfield_process(params, start, horizon, derive_seed(seed, r));
        out.samples[r] = run.record.extinction_time;
        censored[r] = run.record.censored;
    });
    out.censored = static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1));
    out.extinction = stats::summarize(out.samples);
    out.upper_confidence = out.extinction.mean + 2.576 * out.extinction.se;
    out.bound = meanfield_time_bound(params, nu);
    out.pass = out.censored == 0 && out.upper_confidence <= out.bound;
    return out;
}

} // namespace episim
