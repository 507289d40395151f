// Command-line front end: each subcommand selects a mode, then the config
// file, EPISIM_* environment variables and flags are layered in that order.

#include "episim/config.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct CommonFlags {
    std::string config;
    std::string seed;
    std::string replicas;
    std::string out;
    std::string workers;
    bool emit_plot_data = false;
    bool emit_events = false;
    std::vector<std::string> set;
    bool print_config = false;
};

void add_common(CLI::App* app, CommonFlags& f)
{
    app->add_option("--config", f.config, "key = value configuration file");
    app->add_option("--seed", f.seed, "master seed (or 'clock')");
    app->add_option("--replicas", f.replicas, "number of replicas");
    app->add_option("--out", f.out, "main output path (stdout if omitted)");
    app->add_option("--workers", f.workers, "worker threads (0 = available parallelism)");
    app->add_flag("--emit-plot-data", f.emit_plot_data, "write tidy long-format plot data next to the output");
    app->add_flag("--emit-events", f.emit_events, "write per-replica event logs (N <= 200)");
    app->add_option("--set", f.set, "extra key=value override, repeatable");
    app->add_flag("--print-config", f.print_config, "print the resolved configuration and exit");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Contact process on evolving scale-free networks: simulation and checks"};
    app.require_subcommand(1);

    struct Command {
        const char* name;
        const char* help;
        const char* mode; ///< nullptr keeps the configured mode
    };
    const Command commands[] = {
        {"run", "run the mode named in the configuration", nullptr},
        {"simulate", "replicas of the contact or mean-field process", nullptr},
        {"sweep", "phase sweep over (gamma, lambda, N)", "sweep"},
        {"oracle", "exact expected extinction time with a Monte Carlo cross-check", "oracle"},
        {"star", "star persistence experiment", "star"},
        {"drift", "exact supermartingale drift on random mean-field states", "drift"},
        {"couple-check", "certify the monotone coupling X <= Y", "coupled"},
        {"sizebias", "degree of newly infected vertices vs the size-biased law", "sizebias"},
        {"connectors", "connector availability windows", "connectors"},
        {"reinfection", "reinfection of a healthy star by persisting stars", "reinfection"},
    };
    CommonFlags flags;
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, flags);
        subs.emplace_back(sub, &c);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const Command* chosen = nullptr;
        for (const auto& [sub, cmd] : subs)
            if (sub->parsed())
                chosen = cmd;

        episim::KeyValues file;
        if (!flags.config.empty()) {
            std::ifstream in(flags.config);
            if (!in) {
                std::cerr << "error: cannot read config file " << flags.config << '\n';
                return 2;
            }
            std::ostringstream text;
            text << in.rdbuf();
            file = episim::parse_key_values(text.str());
        }

        episim::KeyValues over;
        if (chosen->mode)
            over.emplace_back("mode", chosen->mode);
        const std::pair<const char*, const std::string*> values[] = {
            {"seed", &flags.seed}, {"replicas", &flags.replicas}, {"out", &flags.out}, {"workers", &flags.workers}};
        for (const auto& [key, v] : values)
            if (!v->empty())
                over.emplace_back(key, *v);
        if (flags.emit_plot_data)
            over.emplace_back("emit_plot_data", "true");
        if (flags.emit_events)
            over.emplace_back("emit_events", "true");
        for (const auto& kv : flags.set) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
                return 2;
            }
            over.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }

        const auto config = episim::parse_config(file, episim::environment_overrides(), over);
        if (std::string(chosen->name) == "simulate" && config.mode != episim::Mode::evolving &&
            config.mode != episim::Mode::static_network && config.mode != episim::Mode::meanfield) {
            std::cerr << "error: mode: simulate expects evolving, static or meanfield\n";
            return 2;
        }
        if (flags.print_config) {
            std::cout << episim::serialize(config);
            return 0;
        }
        return episim::execute(config, std::cerr);
    } catch (const episim::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
