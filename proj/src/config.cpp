#include "episim/config.hpp"

#include "episim/graphical.hpp"
#include "episim/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

namespace episim {

namespace {

const std::pair<Mode, const char*> kModeNames[] = {
    {Mode::evolving, "evolving"}, {Mode::static_network, "static"}, {Mode::meanfield, "meanfield"},
    {Mode::coupled, "coupled"},   {Mode::oracle, "oracle"},         {Mode::star, "star"},
    {Mode::sweep, "sweep"},       {Mode::drift, "drift"},           {Mode::sizebias, "sizebias"},
    {Mode::connectors, "connectors"}, {Mode::reinfection, "reinfection"},
};

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v)
{
    double x = 0.0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end || !std::isfinite(x))
        throw ConfigError(key, "expected a real number, got '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v)
{
    std::uint64_t x = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end)
        throw ConfigError(key, "expected a nonnegative integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v)
{
    const auto l = lower(v);
    if (l == "1" || l == "true" || l == "yes" || l == "on")
        return true;
    if (l == "0" || l == "false" || l == "no" || l == "off")
        return false;
    throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& v, F&& convert)
{
    std::vector<T> out;
    std::string_view rest(v);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = trim(rest.substr(0, comma));
        if (!item.empty())
            out.push_back(static_cast<T>(convert(item)));
        if (comma == std::string_view::npos)
            break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i)
            out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += fmt(xs[i]);
        else
            out += std::to_string(xs[i]);
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

Label to_label(const std::string& key, const std::string& v)
{
    const auto x = to_u64(key, v);
    if (x > 0xffffffffULL)
        throw ConfigError(key, "label out of range");
    return static_cast<Label>(x);
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"mode",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const auto m = mode_from_string(v);
             if (!m)
                 throw ConfigError(k, "unknown mode '" + v + "'");
             c.mode = *m;
         }},
        {"n", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.n_vertices = to_label(k, v); }},
        {"beta", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.beta = to_double(k, v); }},
        {"gamma", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.gamma = to_double(k, v); }},
        {"kappa", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.kappa = to_double(k, v); }},
        {"lambda", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.lambda = to_double(k, v); }},
        {"replicas", [](RunConfig& c, const std::string& k, const std::string& v) { c.replicas = to_u64(k, v); }},
        {"seed",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (lower(v) == "clock")
                 c.seed = splitmix64(static_cast<std::uint64_t>(
                     std::chrono::system_clock::now().time_since_epoch().count()));
             else
                 c.seed = to_u64(k, v);
         }},
        {"horizon",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (lower(v) == "auto")
                 c.horizon.reset();
             else
                 c.horizon = to_double(k, v);
         }},
        {"horizon_growth",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.horizon_growth = to_double(k, v); }},
        {"horizon_cap", [](RunConfig& c, const std::string& k, const std::string& v) { c.horizon_cap = to_double(k, v); }},
        {"out", [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }},
        {"workers",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.workers = static_cast<unsigned>(std::min<std::uint64_t>(to_u64(k, v), 4096));
         }},
        {"emit_plot_data",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.emit_plot_data = to_bool(k, v); }},
        {"emit_events", [](RunConfig& c, const std::string& k, const std::string& v) { c.emit_events = to_bool(k, v); }},
        {"scheduler",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const auto l = lower(v);
             if (l == "direct")
                 c.scheduler = Scheduler::direct;
             else if (l == "first_reaction")
                 c.scheduler = Scheduler::first_reaction;
             else
                 throw ConfigError(k, "expected direct or first_reaction, got '" + v + "'");
         }},
        {"initial",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.initial = lower(v) == "all" ? std::vector<Label>{}
                                           : to_list<Label>(v, [&](const std::string& s) { return to_label(k, s); });
         }},
        {"oracle_process",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const auto l = lower(v);
             if (l != "contact" && l != "meanfield")
                 throw ConfigError(k, "expected contact or meanfield, got '" + v + "'");
             c.oracle_process = l;
         }},
        {"grid_gamma",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.grid_gamma = to_list<double>(v, [&](const std::string& s) { return to_double(k, s); });
         }},
        {"grid_lambda",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.grid_lambda = to_list<double>(v, [&](const std::string& s) { return to_double(k, s); });
         }},
        {"grid_n",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.grid_n = to_list<Label>(v, [&](const std::string& s) { return to_label(k, s); });
         }},
        {"ladder",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.ladder = to_list<double>(v, [&](const std::string& s) { return to_double(k, s); });
         }},
        {"star_k",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.star_k = to_list<std::size_t>(v, [&](const std::string& s) { return to_u64(k, s); });
         }},
        {"star_static", [](RunConfig& c, const std::string& k, const std::string& v) { c.star_static = to_bool(k, v); }},
        {"alpha",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (lower(v) == "auto")
                 c.alpha.reset();
             else
                 c.alpha = to_double(k, v);
         }},
        {"alpha_prime",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (lower(v) == "auto")
                 c.alpha_prime.reset();
             else
                 c.alpha_prime = to_double(k, v);
         }},
        {"drift_states", [](RunConfig& c, const std::string& k, const std::string& v) { c.drift_states = to_u64(k, v); }},
        {"windows",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.windows = to_list<double>(v, [&](const std::string& s) { return to_double(k, s); });
         }},
        {"eta",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (lower(v) == "auto")
                 c.eta.reset();
             else
                 c.eta = to_double(k, v);
         }},
        {"first_connector",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.first_connector = to_label(k, v); }},
        {"graph_samples",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.graph_samples = to_u64(k, v); }},
    };
    return table;
}

} // namespace

std::string to_string(Mode mode)
{
    for (const auto& [m, name] : kModeNames)
        if (m == mode)
            return name;
    return "unknown";
}

std::optional<Mode> mode_from_string(std::string_view name)
{
    const auto l = lower(name);
    for (const auto& [m, n] : kModeNames)
        if (l == n)
            return m;
    return std::nullopt;
}

bool is_check_mode(Mode mode)
{
    switch (mode) {
    case Mode::coupled:
    case Mode::oracle:
    case Mode::drift:
    case Mode::sizebias:
    case Mode::connectors:
    case Mode::reinfection:
        return true;
    default:
        return false;
    }
}

double RunConfig::resolved_horizon() const
{
    if (horizon)
        return *horizon;
    return std::min(horizon_cap, std::exp(horizon_growth * params.n_vertices));
}

KeyValues parse_key_values(std::string_view text)
{
    KeyValues out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto body = trim(line);
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
        const auto key = trim(std::string_view(body).substr(0, eq));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no), "empty key");
        out.emplace_back(key, trim(std::string_view(body).substr(eq + 1)));
    }
    return out;
}

KeyValues environment_overrides()
{
    KeyValues out;
    for (const auto& [key, setter] : setters()) {
        std::string name = "EPISIM_";
        for (char ch : key)
            name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (const char* v = std::getenv(name.c_str()))
            out.emplace_back(key, v);
    }
    return out;
}

RunConfig parse_config(const KeyValues& file, const KeyValues& env, const KeyValues& flags)
{
    RunConfig config;
    bool seeded = false;
    for (const KeyValues* layer : {&file, &env, &flags})
        for (const auto& [raw_key, value] : *layer) {
            const auto key = lower(raw_key);
            const auto it = setters().find(key);
            if (it == setters().end())
                throw ConfigError(raw_key, "unknown key");
            it->second(config, raw_key, value);
            seeded = seeded || key == "seed";
        }
    if (!seeded)
        throw ConfigError("seed", "required (use seed = clock to opt into wall-clock seeding)");
    validate(config);
    return config;
}

void validate(const RunConfig& c)
{
    const auto& p = c.params;
    const std::pair<const char*, bool> checks[] = {
        {"N", p.n_vertices >= 1},
        {"beta", p.beta > 0.0},
        {"gamma", p.gamma > 0.0 && p.gamma < 1.0},
        {"kappa", p.kappa >= 0.0},
        {"lambda", p.lambda >= 0.0},
    };
    for (const auto& [key, ok] : checks)
        if (!ok)
            throw ConfigError(key, "out of range");
    if (c.replicas == 0)
        throw ConfigError("replicas", "must be positive");
    if (c.horizon && !(*c.horizon > 0.0))
        throw ConfigError("horizon", "must be positive");
    if (!(c.horizon_cap > 0.0))
        throw ConfigError("horizon_cap", "must be positive");
    if (!(c.horizon_growth >= 0.0))
        throw ConfigError("horizon_growth", "must be nonnegative");
    for (Label x : c.initial)
        if (x < 1 || x > p.n_vertices)
            throw ConfigError("initial", "label " + std::to_string(x) + " outside 1..N");

    switch (c.mode) {
    case Mode::static_network:
        if (p.kappa != 0.0)
            throw ConfigError("kappa", "static mode requires kappa = 0");
        break;
    case Mode::oracle: {
        const OracleLimits limits;
        const Label cap = c.oracle_process == "contact" ? limits.max_joint_vertices : limits.max_meanfield_vertices;
        if (p.n_vertices > cap)
            throw ConfigError("N", "oracle N cap exceeded (" + c.oracle_process + " chain allows N <= " +
                                       std::to_string(cap) + ")");
        break;
    }
    case Mode::coupled: {
        const RepresentationBudget budget;
        if (p.n_vertices > budget.max_vertices)
            throw ConfigError("N", "coupled mode allows N <= " + std::to_string(budget.max_vertices));
        break;
    }
    case Mode::drift:
        if (!(p.gamma < 1.0 / 3.0))
            throw ConfigError("gamma", "drift mode requires gamma < 1/3");
        break;
    case Mode::sweep:
        for (double g : c.grid_gamma)
            if (!(g > 0.0 && g < 1.0))
                throw ConfigError("grid_gamma", "entries must lie in (0, 1)");
        for (double l : c.grid_lambda)
            if (!(l >= 0.0))
                throw ConfigError("grid_lambda", "entries must be nonnegative");
        for (Label n : c.grid_n)
            if (n < 1)
                throw ConfigError("grid_N", "entries must be positive");
        break;
    case Mode::star:
        if (c.star_k.empty())
            throw ConfigError("star_k", "star mode needs at least one degree");
        break;
    case Mode::connectors:
        if (c.windows.empty())
            throw ConfigError("windows", "need at least one window start");
        for (double w : c.windows)
            if (!(w >= 0.0))
                throw ConfigError("windows", "window starts must be nonnegative");
        if (c.first_connector < 1 || c.first_connector > p.n_vertices)
            throw ConfigError("first_connector", "outside 1..N");
        break;
    case Mode::reinfection:
        if (!(p.gamma > 1.0 / 3.0))
            throw ConfigError("gamma", "reinfection mode requires gamma > 1/3");
        if (!(p.lambda > 0.0))
            throw ConfigError("lambda", "reinfection mode requires lambda > 0");
        break;
    default:
        break;
    }
    if (c.emit_events && p.n_vertices > 200)
        throw ConfigError("emit_events", "event logs are limited to N <= 200");
}

std::string serialize(const RunConfig& c)
{
    std::ostringstream os;
    const auto line = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
    line("mode", to_string(c.mode));
    line("N", std::to_string(c.params.n_vertices));
    line("beta", fmt(c.params.beta));
    line("gamma", fmt(c.params.gamma));
    line("kappa", fmt(c.params.kappa));
    line("lambda", fmt(c.params.lambda));
    line("replicas", std::to_string(c.replicas));
    line("seed", std::to_string(c.seed));
    line("horizon", c.horizon ? fmt(*c.horizon) : "auto");
    line("horizon_growth", fmt(c.horizon_growth));
    line("horizon_cap", fmt(c.horizon_cap));
    if (!c.out.empty())
        line("out", c.out);
    line("workers", std::to_string(c.workers));
    line("emit_plot_data", c.emit_plot_data ? "true" : "false");
    line("emit_events", c.emit_events ? "true" : "false");
    line("scheduler", c.scheduler == Scheduler::direct ? "direct" : "first_reaction");
    line("initial", c.initial.empty() ? "all" : join(c.initial));
    line("oracle_process", c.oracle_process);
    line("grid_gamma", join(c.grid_gamma));
    line("grid_lambda", join(c.grid_lambda));
    line("grid_N", join(c.grid_n));
    line("ladder", join(c.ladder));
    line("star_k", join(c.star_k));
    line("star_static", c.star_static ? "true" : "false");
    line("alpha", c.alpha ? fmt(*c.alpha) : "auto");
    line("alpha_prime", c.alpha_prime ? fmt(*c.alpha_prime) : "auto");
    line("drift_states", std::to_string(c.drift_states));
    line("windows", join(c.windows));
    line("eta", c.eta ? fmt(*c.eta) : "auto");
    line("first_connector", std::to_string(c.first_connector));
    line("graph_samples", std::to_string(c.graph_samples));
    return os.str();
}

void write_results_row(std::ostream& os, std::size_t run_id, const RunRecord& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, "%zu,%llu,%s,%u,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%llu,%llu,%llu\n", run_id,
                  static_cast<unsigned long long>(r.seed), to_string(r.mode).c_str(), r.params.n_vertices,
                  r.params.beta, r.params.gamma, r.params.kappa, r.params.lambda, r.extinction_time,
                  r.censored ? 1 : 0, static_cast<unsigned long long>(r.counts.recoveries),
                  static_cast<unsigned long long>(r.counts.updates),
                  static_cast<unsigned long long>(r.counts.infections));
    os << buf;
}

} // namespace episim
