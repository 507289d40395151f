#pragma once

#include "episim/dynamics.hpp"
#include "episim/model.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>

namespace episim {

/// Size caps for exact state-space enumeration.
struct OracleLimits {
    Label max_joint_vertices = 3;     ///< joint (graph x infection) chain: 2^(N(N-1)/2) * 2^N states
    Label max_meanfield_vertices = 8; ///< mean-field chain: 3^N states
};

/// Thrown when the requested chain exceeds the configured cap.
class StateSpaceTooLarge : public std::runtime_error {
public:
    StateSpaceTooLarge(const std::string& what, double estimated_states)
        : std::runtime_error(what), estimated_states_(estimated_states) {}
    double estimated_states() const { return estimated_states_; }

private:
    double estimated_states_;
};

double joint_chain_states(Label n_vertices);
double meanfield_chain_states(Label n_vertices);

/// Expected extinction time of the contact process on the evolving network,
/// with the initial network drawn from its stationary law, from the exact
/// generator of the joint chain.
double contact_extinction_oracle(const ModelParams& params, std::span<const Label> initial_infected,
                                 const OracleLimits& limits = {});

/// Expected extinction time of the mean-field process Y from `initial`.
double meanfield_extinction_oracle(const ModelParams& params, const MeanFieldState& initial,
                                   const OracleLimits& limits = {});

} // namespace episim
