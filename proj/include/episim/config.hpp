#pragma once

#include "episim/dynamics.hpp"
#include "episim/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace episim {

enum class Mode { evolving, static_network, meanfield, coupled, oracle, star, sweep, drift, sizebias, connectors, reinfection };

std::string to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view name);

/// Modes whose exit status reflects PASS/FAIL of a check.
bool is_check_mode(Mode mode);

struct RunConfig {
    Mode mode = Mode::evolving;
    ModelParams params;
    std::size_t replicas = 100;
    std::uint64_t seed = 0;
    std::optional<double> horizon; ///< empty means auto: min(exp(horizon_growth N), horizon_cap)
    double horizon_growth = 0.1;
    double horizon_cap = 1e4;
    std::string out; ///< empty writes the main output to stdout
    unsigned workers = 0;
    bool emit_plot_data = false;
    bool emit_events = false;
    Scheduler scheduler = Scheduler::direct;
    std::vector<Label> initial; ///< initially infected labels; empty means all

    std::string oracle_process = "contact"; ///< contact | meanfield

    std::vector<double> grid_gamma;
    std::vector<double> grid_lambda;
    std::vector<Label> grid_n;
    std::vector<double> ladder;

    std::vector<std::size_t> star_k;
    bool star_static = false;

    std::optional<double> alpha;
    std::optional<double> alpha_prime;

    std::size_t drift_states = 100;

    std::vector<double> windows{0.0};
    std::optional<double> eta;
    Label first_connector = 1;

    std::size_t graph_samples = 20;

    double resolved_horizon() const;
    bool operator==(const RunConfig&) const = default;
};

/// Validation or parse failure attributed to one configuration key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key))
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat "key = value" lines; '#' starts a comment, blank lines are ignored.
KeyValues parse_key_values(std::string_view text);

/// EPISIM_<KEY> variables for every known key, read from the process environment.
KeyValues environment_overrides();

/// Applies the layers in order (later wins), then validates. Keys are
/// case-insensitive. A seed is required: "seed = clock" opts into wall-clock
/// seeding and is resolved to a number here.
RunConfig parse_config(const KeyValues& file, const KeyValues& env = {}, const KeyValues& flags = {});

/// Throws ConfigError naming the offending key.
void validate(const RunConfig& config);

/// Key-value text that parse_config maps back to the same config.
std::string serialize(const RunConfig& config);

/// Runs the configured mode. Returns 0 iff the run completed and, for check
/// modes, every check passed. `log` receives PASS/FAIL lines and notes.
int execute(const RunConfig& config, std::ostream& log);

/// Results CSV header shared by all simulation modes.
inline constexpr const char* kResultsHeader =
    "run_id,seed,mode,N,beta,gamma,kappa,lambda,t_ext,censored,n_recoveries,n_updates,n_infections";

void write_results_row(std::ostream& os, std::size_t run_id, const RunRecord& record);

} // namespace episim
