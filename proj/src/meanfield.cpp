#include "episim/dynamics.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>

namespace episim {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// Sum tree over label weights split by membership in the active set
/// A = {Y >= 1}. Internal nodes are recomputed from their children on every
/// change, so sums never drift.
class ActiveWeightTree {
public:
    explicit ActiveWeightTree(const ConnectionKernel& kernel) : leaves_(1)
    {
        while (leaves_ < kernel.size())
            leaves_ *= 2;
        active_.assign(2 * leaves_, 0.0);
        active_sq_.assign(2 * leaves_, 0.0);
        inactive_.assign(2 * leaves_, 0.0);
        weight_.resize(kernel.size());
        for (Label x = 1; x <= kernel.size(); ++x) {
            weight_[x - 1] = 1.0 / kernel.label_power(x);
            inactive_[leaves_ + x - 1] = weight_[x - 1];
        }
        for (std::size_t i = leaves_ - 1; i >= 1; --i)
            pull(i);
    }

    void set_active(Label x, bool active)
    {
        std::size_t i = leaves_ + x - 1;
        const double w = weight_[x - 1];
        active_[i] = active ? w : 0.0;
        active_sq_[i] = active ? w * w : 0.0;
        inactive_[i] = active ? 0.0 : w;
        for (i /= 2; i >= 1; i /= 2)
            pull(i);
    }

    double active_sum() const { return active_[1]; }
    double active_sq_sum() const { return active_sq_[1]; }
    double inactive_sum() const { return inactive_[1]; }

    Label sample_active(Rng& rng) const { return descend(active_, rng.uniform() * active_[1]); }
    Label sample_inactive(Rng& rng) const { return descend(inactive_, rng.uniform() * inactive_[1]); }

private:
    void pull(std::size_t i)
    {
        active_[i] = active_[2 * i] + active_[2 * i + 1];
        active_sq_[i] = active_sq_[2 * i] + active_sq_[2 * i + 1];
        inactive_[i] = inactive_[2 * i] + inactive_[2 * i + 1];
    }

    Label descend(const std::vector<double>& sums, double target) const
    {
        std::size_t i = 1;
        while (i < leaves_) {
            const double left = sums[2 * i];
            const double right = sums[2 * i + 1];
            if (left > 0.0 && (target < left || !(right > 0.0))) {
                i = 2 * i;
            } else {
                target -= left;
                i = 2 * i + 1;
            }
        }
        return static_cast<Label>(i - leaves_ + 1);
    }

    std::size_t leaves_;
    std::vector<double> weight_;
    std::vector<double> active_, active_sq_, inactive_;
};

/// State bookkeeping shared by both samplers: index sets of the vertices in
/// state 1 and in state 2.
class MeanFieldBook {
public:
    explicit MeanFieldBook(const MeanFieldState& initial)
        : y_(initial), pos_(initial.size(), kNone)
    {
        for (Label x = 1; x <= initial.size(); ++x) {
            const auto s = initial(x);
            if (s > kInfected)
                throw std::domain_error("mean-field state values must be 0, 1 or 2");
            if (s != kHealthy)
                insert(x, s);
        }
    }

    const MeanFieldState& state() const { return y_; }
    std::size_t count(std::uint8_t s) const { return members_[s].size(); }
    std::size_t active_count() const { return members_[kReady].size() + members_[kInfected].size(); }
    Label random_member(std::uint8_t s, Rng& rng) const { return members_[s][rng.index(members_[s].size())]; }

    /// Returns the previous value.
    std::uint8_t set(Label x, std::uint8_t s)
    {
        const std::uint8_t old = y_(x);
        if (old == s)
            return old;
        if (old != kHealthy)
            erase(x, old);
        y_(x) = s;
        if (s != kHealthy)
            insert(x, s);
        return old;
    }

private:
    void insert(Label x, std::uint8_t s)
    {
        y_(x) = s;
        pos_[x - 1] = members_[s].size();
        members_[s].push_back(x);
    }

    void erase(Label x, std::uint8_t s)
    {
        auto& m = members_[s];
        const std::size_t p = pos_[x - 1];
        m[p] = m.back();
        pos_[m[p] - 1] = p;
        m.pop_back();
        pos_[x - 1] = kNone;
    }

    MeanFieldState y_;
    std::vector<std::size_t> pos_;
    std::vector<Label> members_[3];
};

/// Pair (a, b) of the direct sampler selected by `u` in [0, sum of rates).
std::pair<Label, Label> pick_pair(const std::vector<double>& rates, Label n, double u)
{
    std::pair<Label, Label> chosen{1, 2};
    std::size_t k = 0;
    for (Label i = 1; i <= n; ++i)
        for (Label j = i + 1; j <= n; ++j, ++k) {
            if (!(rates[k] > 0.0))
                continue;
            chosen = {i, j};
            if (u < rates[k])
                return chosen;
            u -= rates[k];
        }
    return chosen;
}

} // namespace

MeanFieldRun run_meanfield_process(const ModelParams& params, const MeanFieldState& initial, double horizon,
                                   std::uint64_t seed, const MeanFieldOptions& options)
{
    if (!(horizon > 0.0))
        throw std::domain_error("horizon must be positive");
    if (initial.size() != params.n_vertices)
        throw std::domain_error("initial mean-field state has the wrong size");
    const auto wall_start = std::chrono::steady_clock::now();
    const ConnectionKernel kernel(params);
    Rng rng(seed);

    MeanFieldRun run;
    RunRecord& rec = run.record;
    rec.seed = seed;
    rec.params = params;
    rec.mode = RunMode::meanfield;
    rec.horizon = horizon;
    if (options.record_trajectory)
        run.trajectory = MeanFieldTrajectory{initial, {}, 0.0};

    MeanFieldBook book(initial);
    const bool aggregated = options.sampler == MeanFieldSampler::aggregated;
    std::optional<ActiveWeightTree> tree;
    if (aggregated) {
        tree.emplace(kernel);
        for (Label x = 1; x <= initial.size(); ++x)
            if (initial(x) != kHealthy)
                tree->set_active(x, true);
    }

    double now = 0.0;
    auto apply = [&](Label x, std::uint8_t s) {
        const std::uint8_t old = book.set(x, s);
        if (old == s)
            return;
        if (tree && ((old == kHealthy) != (s == kHealthy)))
            tree->set_active(x, s != kHealthy);
        if (run.trajectory)
            run.trajectory->changes.push_back({now, x, old, s});
    };
    auto infect_pair = [&](Label x, Label y) {
        ++rec.counts.infections;
        apply(x, kInfected);
        apply(y, kInfected);
    };

    const Label n = params.n_vertices;
    std::vector<double> pair_rates;
    while (book.active_count() > 0) {
        const double upd_rate = params.kappa * static_cast<double>(book.count(kInfected));
        const double rec_rate = static_cast<double>(book.count(kReady));

        double pair_rate = 0.0;
        double cross = 0.0;
        if (aggregated) {
            cross = tree->active_sum() * tree->inactive_sum();
            const double within =
                std::max(0.0, 0.5 * (tree->active_sum() * tree->active_sum() - tree->active_sq_sum()));
            pair_rate = params.lambda * kernel.scale() * (cross + within);
            cross = cross / (cross + within);
        } else {
            pair_rates.clear();
            const auto& y = book.state();
            for (Label a = 1; a <= n; ++a)
                for (Label b = a + 1; b <= n; ++b) {
                    const double r = (y(a) != kHealthy || y(b) != kHealthy) ? params.lambda * kernel.prob(a, b) : 0.0;
                    pair_rates.push_back(r);
                    pair_rate += r;
                }
        }

        const double total = upd_rate + rec_rate + pair_rate;
        if (!(total > 0.0))
            break; // frozen: only state-2 vertices left and kappa = lambda = 0
        now += rng.exponential(total);
        if (now > horizon)
            break;
        double u = rng.uniform() * total;
        if (u < rec_rate || (pair_rate == 0.0 && upd_rate == 0.0)) {
            const Label x = book.random_member(kReady, rng);
            ++rec.counts.recoveries;
            apply(x, kHealthy);
        } else if (u < rec_rate + upd_rate || pair_rate == 0.0) {
            const Label x = book.random_member(kInfected, rng);
            ++rec.counts.updates;
            apply(x, kReady);
        } else if (aggregated) {
            Label a, b;
            if (rng.uniform() < cross) {
                a = tree->sample_active(rng);
                b = tree->sample_inactive(rng);
            } else {
                do {
                    a = tree->sample_active(rng);
                    b = tree->sample_active(rng);
                } while (a == b);
            }
            if (rng.uniform() * kernel.envelope(a, b) < kernel.prob(a, b))
                infect_pair(a, b);
        } else {
            u -= rec_rate + upd_rate;
            const auto [a, b] = pick_pair(pair_rates, n, u);
            infect_pair(a, b);
        }
    }

    if (book.active_count() > 0) {
        rec.censored = true;
        rec.extinction_time = horizon;
    } else {
        rec.extinction_time = now;
    }
    if (run.trajectory)
        run.trajectory->end_time = rec.extinction_time;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return run;
}

} // namespace episim
