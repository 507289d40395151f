#include "episim/dynamics.hpp"
#include "episim/oracle.hpp"
#include "episim/stats.hpp"
#include "oracles.hpp"

#include <doctest.h>

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

} // namespace

TEST_CASE("closed-form cases")
{
    const std::vector<Label> one{1};
    CHECK(contact_extinction_oracle(make(1, 1, 0.5, 1, 0.4), one) == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<Label> both{1, 2};
    CHECK(contact_extinction_oracle(make(2, 1e9, 0.5, 0, 1), both) ==
          doctest::Approx(oracle::two_vertex_complete(1.0)).epsilon(1e-12));
    CHECK(contact_extinction_oracle(make(3, 1, 0.5, 1, 0.0), std::vector<Label>{1, 2, 3}) ==
          doctest::Approx(oracle::harmonic(3)).epsilon(1e-12));
    CHECK(contact_extinction_oracle(make(3, 1, 0.5, 1, 0.5), std::span<const Label>{}) == 0.0);

    // Y from a single 2: an update clock then a recovery clock.
    MeanFieldState y(1, kInfected);
    CHECK(meanfield_extinction_oracle(make(1, 1, 0.25, 2.0, 0.3), y) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_THROWS_AS(meanfield_extinction_oracle(make(1, 1, 0.25, 0.0, 0.3), y), std::domain_error);
}

TEST_CASE("joint chain matches simulation at N = 3")
{
    const auto p = make(3, 1, 0.45, 1, 0.7);
    const std::vector<Label> init{1, 2, 3};
    const double exact = contact_extinction_oracle(p, init);
    std::vector<double> t;
    for (int r = 0; r < 100000; ++r)
        t.push_back(run_contact_process(p, init, 1e9, derive_seed(9, r)).record.extinction_time);
    const auto s = stats::summarize(t);
    CHECK(std::abs(s.mean - exact) <= 3 * s.se);
}

TEST_CASE("mean-field chain matches simulation at N = 4")
{
    const auto p = make(4, 2, 0.25, 1, 0.6);
    MeanFieldState y(4, kInfected);
    y(4) = kReady;
    const double exact = meanfield_extinction_oracle(p, y);
    std::vector<double> t;
    for (int r = 0; r < 50000; ++r)
        t.push_back(run_meanfield_process(p, y, 1e9, derive_seed(10, r)).record.extinction_time);
    const auto s = stats::summarize(t);
    CHECK(std::abs(s.mean - exact) <= 3 * s.se);
}

TEST_CASE("state-space caps")
{
    const std::vector<Label> all4{1, 2, 3, 4};
    try {
        contact_extinction_oracle(make(4, 1, 0.5, 1, 0.5), all4);
        FAIL("expected refusal");
    } catch (const StateSpaceTooLarge& e) {
        CHECK(e.estimated_states() == joint_chain_states(4));
        CHECK(e.estimated_states() == 1024.0);
    }
    try {
        meanfield_extinction_oracle(make(9, 1, 0.25, 1, 0.5), MeanFieldState(9, kInfected));
        FAIL("expected refusal");
    } catch (const StateSpaceTooLarge& e) {
        CHECK(e.estimated_states() == meanfield_chain_states(9));
    }
    OracleLimits wide;
    wide.max_joint_vertices = 4;
    CHECK(contact_extinction_oracle(make(4, 1, 0.5, 1, 0.0), all4, wide) ==
          doctest::Approx(oracle::harmonic(4)).epsilon(1e-12));
}
