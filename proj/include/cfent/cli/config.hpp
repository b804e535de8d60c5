#ifndef CFENT_CLI_CONFIG_HPP
#define CFENT_CLI_CONFIG_HPP

// Flat key-value run configuration, read from JSON and `key=value` overrides.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "../experiments.hpp"

namespace cfent::cli {

using json = nlohmann::json;

/// Invalid or inconsistent configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& number_keys()
{
    static const std::vector<std::string> keys{
        "gamma1", "gamma2", "kappa1", "kappa2",  "G1",      "G2",   "Delta",        "rB",
        "theta",  "thetaPi", "nbar1", "nbar2",   "temperatureK", "omega1", "omega2", "g1",
        "g2",     "P1",     "P2",     "omegaL1", "omegaL2", "tMax", "rwaThreshold"};
    return keys;
}

inline const std::vector<std::string>& integer_keys()
{
    static const std::vector<std::string> keys{"tPoints", "refineLevels", "threads"};
    return keys;
}

inline bool contains(const std::vector<std::string>& keys, const std::string& key)
{
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

/// Parsed configuration. Every field is optional; unset fields take the
/// defaults of `steady_baseline()` when resolved.
struct RunConfig {
    std::optional<double> gamma1, gamma2, kappa1, kappa2, G1, G2, Delta, rB, theta, thetaPi,
        nbar1, nbar2, temperatureK, omega1, omega2, g1, g2, P1, P2, omegaL1, omegaL2, tMax,
        rwaThreshold;
    std::optional<std::int64_t> tPoints, refineLevels, threads;
    std::optional<std::string> mode;
    std::optional<std::vector<Axis>> axes;
    std::optional<bool> detuningLock;

    std::optional<double>* number_field(const std::string& key)
    {
        static const std::vector<std::optional<double> RunConfig::*> fields{
            &RunConfig::gamma1, &RunConfig::gamma2, &RunConfig::kappa1, &RunConfig::kappa2,
            &RunConfig::G1,     &RunConfig::G2,     &RunConfig::Delta,  &RunConfig::rB,
            &RunConfig::theta,  &RunConfig::thetaPi, &RunConfig::nbar1, &RunConfig::nbar2,
            &RunConfig::temperatureK, &RunConfig::omega1, &RunConfig::omega2, &RunConfig::g1,
            &RunConfig::g2,     &RunConfig::P1,     &RunConfig::P2,     &RunConfig::omegaL1,
            &RunConfig::omegaL2, &RunConfig::tMax,  &RunConfig::rwaThreshold};
        const auto& keys = number_keys();
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i] == key) {
                return &(this->*fields[i]);
            }
        }
        return nullptr;
    }

    std::optional<std::int64_t>* integer_field(const std::string& key)
    {
        if (key == "tPoints") return &tPoints;
        if (key == "refineLevels") return &refineLevels;
        if (key == "threads") return &threads;
        return nullptr;
    }
};

inline Axis parse_axis(const json& j)
{
    if (j.is_string()) {
        // name:min:max:count
        const std::string text = j.get<std::string>();
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string part; std::getline(ss, part, ':');) {
            parts.push_back(part);
        }
        if (parts.size() != 4) {
            throw ConfigError("axes: expected name:min:max:count, got '" + text + "'");
        }
        try {
            Axis axis;
            axis.name = parts[0];
            axis.min = std::stod(parts[1]);
            axis.max = std::stod(parts[2]);
            const long long count = std::stoll(parts[3]);
            if (count < 1) {
                throw ConfigError("axes: count must be positive in '" + text + "'");
            }
            axis.count = static_cast<std::size_t>(count);
            return axis;
        } catch (const std::logic_error&) {
            throw ConfigError("axes: cannot parse '" + text + "'");
        }
    }
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
        throw ConfigError("axes: each axis needs a string 'name'");
    }
    Axis axis;
    axis.name = j["name"].get<std::string>();
    for (const auto& [key, value] : j.items()) {
        if (key != "name" && key != "min" && key != "max" && key != "count" && key != "values") {
            throw ConfigError("axes: unknown axis key '" + key + "' on axis '" + axis.name + "'");
        }
    }
    if (j.contains("values")) {
        if (j.contains("min") || j.contains("max") || j.contains("count")) {
            throw ConfigError("axes: axis '" + axis.name + "' gives both values and min/max/count");
        }
        if (!j["values"].is_array()) {
            throw ConfigError("axes: 'values' of axis '" + axis.name + "' must be an array");
        }
        for (const auto& v : j["values"]) {
            if (!v.is_number()) {
                throw ConfigError("axes: non-numeric value on axis '" + axis.name + "'");
            }
            axis.explicitValues.push_back(v.get<double>());
        }
        axis.count = axis.explicitValues.size();
        if (!axis.explicitValues.empty()) {
            axis.min = axis.explicitValues.front();
            axis.max = axis.explicitValues.back();
        }
        return axis;
    }
    if (!j.contains("min") || !j.contains("max") || !j["min"].is_number() ||
        !j["max"].is_number()) {
        throw ConfigError("axes: axis '" + axis.name + "' needs numeric min and max");
    }
    axis.min = j["min"].get<double>();
    axis.max = j["max"].get<double>();
    axis.count = default_grid_points;
    if (j.contains("count")) {
        if (!j["count"].is_number_integer() || j["count"].get<long long>() < 1) {
            throw ConfigError("axes: count of axis '" + axis.name + "' must be a positive integer");
        }
        axis.count = j["count"].get<std::size_t>();
    }
    return axis;
}

inline json axis_to_json(const Axis& axis)
{
    json j;
    j["name"] = axis.name;
    if (!axis.explicitValues.empty()) {
        j["values"] = axis.explicitValues;
    } else {
        j["min"] = axis.min;
        j["max"] = axis.max;
        j["count"] = axis.count;
    }
    return j;
}

/// Builds a RunConfig from a flat JSON object, rejecting unknown keys and
/// wrongly typed values.
inline RunConfig parse_config(const json& j)
{
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (value.is_null()) {
            continue;
        }
        if (auto* field = cfg.number_field(key)) {
            if (!value.is_number()) {
                throw ConfigError("key '" + key + "' must be a number");
            }
            const double x = value.get<double>();
            if (!std::isfinite(x)) {
                throw ConfigError("key '" + key + "' must be finite");
            }
            *field = x;
        } else if (auto* ifield = cfg.integer_field(key)) {
            if (!value.is_number_integer()) {
                throw ConfigError("key '" + key + "' must be an integer");
            }
            *ifield = value.get<std::int64_t>();
        } else if (key == "mode") {
            if (!value.is_string()) {
                throw ConfigError("key 'mode' must be a string");
            }
            cfg.mode = value.get<std::string>();
        } else if (key == "detuningLock") {
            if (!value.is_boolean()) {
                throw ConfigError("key 'detuningLock' must be true or false");
            }
            cfg.detuningLock = value.get<bool>();
        } else if (key == "axes") {
            std::vector<Axis> axes;
            if (value.is_string()) {
                // comma-separated name:min:max:count list
                std::stringstream ss(value.get<std::string>());
                for (std::string item; std::getline(ss, item, ',');) {
                    axes.push_back(parse_axis(json(item)));
                }
            } else if (value.is_array()) {
                for (const auto& a : value) {
                    axes.push_back(parse_axis(a));
                }
            } else {
                throw ConfigError("key 'axes' must be an array or a name:min:max:count list");
            }
            cfg.axes = std::move(axes);
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    return cfg;
}

/// Parses the value of a `key=value` override: JSON literal when possible,
/// otherwise a plain string.
inline json parse_override_value(const std::string& text)
{
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        return json(text);
    }
    return value;
}

/// Applies `key=value` overrides in order (last wins) to a JSON config.
inline void apply_overrides(json& base, const std::vector<std::string>& overrides)
{
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override '" + item + "' is not of the form key=value");
        }
        base[item.substr(0, eq)] = parse_override_value(item.substr(eq + 1));
    }
}

/// Reads a config file. A document previously written by the CLI in JSON
/// format is also accepted; its resolved config under meta.config is used.
inline json load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw ConfigError("config file '" + path + "' is not valid JSON");
    }
    if (j.is_object() && j.contains("meta") && j["meta"].is_object() &&
        j["meta"].contains("config")) {
        return j["meta"]["config"];
    }
    return j;
}

/// Fully resolved settings of a run.
struct ResolvedConfig {
    Scenario scenario;
    SweepMode mode = SweepMode::steady;
    double tMax = default_transient_t_max;
    std::size_t tPoints = default_transient_points;
    std::vector<Axis> axes;
    bool detuningLock = false;
    std::size_t refineLevels = 4;
    unsigned threads = 1;

    std::vector<double> time_grid() const { return linspace(0.0, tMax, tPoints); }

    SweepSpec sweep_spec(bool keep_curves) const
    {
        SweepSpec spec;
        spec.base = scenario;
        spec.axes = axes;
        spec.mode = mode;
        if (mode == SweepMode::evolve) {
            spec.tGrid = time_grid();
        }
        spec.detuningLock = detuningLock;
        spec.keepCurves = keep_curves;
        spec.threads = threads;
        return spec;
    }

    /// Scenario with the detuning lock applied, for single-point commands.
    Scenario point() const
    {
        Scenario s = scenario;
        if (detuningLock) {
            s.Delta = locked_detuning(s.kappa1, s.kappa2, s.feedback);
        }
        return s;
    }
};

/// Validates a parsed config and fills defaults.
inline ResolvedConfig resolve_config(const RunConfig& cfg)
{
    ResolvedConfig out;
    Scenario& s = out.scenario;
    s = steady_baseline();

    const bool has_G = cfg.G1 || cfg.G2;
    const bool has_drive = cfg.g1 || cfg.g2 || cfg.P1 || cfg.P2 || cfg.omegaL1 || cfg.omegaL2;
    if (has_G && has_drive) {
        throw ConfigError("keys 'G1'/'G2' and the drive block (g1, g2, P1, P2, omegaL1, omegaL2) "
                          "are mutually exclusive");
    }
    if (has_drive) {
        if (!(cfg.g1 && cfg.g2 && cfg.P1 && cfg.P2 && cfg.omegaL1 && cfg.omegaL2)) {
            throw ConfigError("drive block needs all of g1, g2, P1, P2, omegaL1, omegaL2");
        }
        s.drive = DriveBlock{*cfg.g1, *cfg.g2, *cfg.P1, *cfg.P2, *cfg.omegaL1, *cfg.omegaL2};
        if (!cfg.omega1 || !cfg.omega2) {
            throw ConfigError("drive block needs 'omega1' and 'omega2'");
        }
    }
    if (cfg.G1) s.G1 = *cfg.G1;
    if (cfg.G2) s.G2 = *cfg.G2;
    if (cfg.theta && cfg.thetaPi) {
        throw ConfigError("keys 'theta' and 'thetaPi' are mutually exclusive");
    }
    if ((cfg.nbar1 || cfg.nbar2) && cfg.temperatureK) {
        throw ConfigError("keys 'nbar1'/'nbar2' and 'temperatureK' are mutually exclusive");
    }
    if (cfg.temperatureK && (!cfg.omega1 || !cfg.omega2)) {
        throw ConfigError("key 'temperatureK' needs 'omega1' and 'omega2'");
    }

    if (cfg.gamma1) s.gamma1 = *cfg.gamma1;
    if (cfg.gamma2) s.gamma2 = *cfg.gamma2;
    if (cfg.kappa1) s.kappa1 = *cfg.kappa1;
    if (cfg.kappa2) s.kappa2 = *cfg.kappa2;
    if (cfg.Delta) s.Delta = *cfg.Delta;
    if (cfg.rB) s.feedback.rB = *cfg.rB;
    if (cfg.theta) s.feedback.theta = *cfg.theta;
    if (cfg.thetaPi) s.feedback.theta = *cfg.thetaPi * std::numbers::pi;
    if (cfg.nbar1) s.nbar1 = *cfg.nbar1;
    if (cfg.nbar2) s.nbar2 = *cfg.nbar2;
    if (cfg.temperatureK) s.temperature = *cfg.temperatureK;
    if (cfg.omega1) s.omega1 = *cfg.omega1;
    if (cfg.omega2) s.omega2 = *cfg.omega2;
    if (cfg.rwaThreshold) {
        if (!(*cfg.rwaThreshold > 0.0)) {
            throw ConfigError("key 'rwaThreshold' must be positive");
        }
        s.rwaThreshold = *cfg.rwaThreshold;
    }

    auto require_nonnegative = [](const char* key, double v) {
        if (!(v >= 0.0)) {
            throw ConfigError(std::string("key '") + key + "' must be non-negative");
        }
    };
    require_nonnegative("gamma1", s.gamma1);
    require_nonnegative("gamma2", s.gamma2);
    require_nonnegative("kappa1", s.kappa1);
    require_nonnegative("kappa2", s.kappa2);
    require_nonnegative("nbar1", s.nbar1);
    require_nonnegative("nbar2", s.nbar2);
    if (!s.drive) {
        require_nonnegative("G1", s.G1);
        require_nonnegative("G2", s.G2);
    }
    if (s.temperature) require_nonnegative("temperatureK", *s.temperature);
    if (s.gamma1 + s.gamma2 + s.kappa1 + s.kappa2 == 0.0) {
        throw ConfigError("keys 'gamma1', 'gamma2', 'kappa1', 'kappa2': zero dissipation is not "
                          "a valid configuration");
    }
    if (!(s.feedback.rB >= 0.0 && s.feedback.rB <= 1.0)) {
        throw ConfigError("key 'rB' must lie in [0, 1]");
    }
    if (s.omega1 && !(*s.omega1 > 0.0)) throw ConfigError("key 'omega1' must be positive");
    if (s.omega2 && !(*s.omega2 > 0.0)) throw ConfigError("key 'omega2' must be positive");

    if (cfg.mode) {
        if (*cfg.mode == "steady") {
            out.mode = SweepMode::steady;
        } else if (*cfg.mode == "evolve") {
            out.mode = SweepMode::evolve;
        } else {
            throw ConfigError("key 'mode' must be 'steady' or 'evolve'");
        }
    }
    if (cfg.tMax) {
        if (!(*cfg.tMax > 0.0)) throw ConfigError("key 'tMax' must be positive");
        out.tMax = *cfg.tMax;
    }
    if (cfg.tPoints) {
        if (*cfg.tPoints < 2) throw ConfigError("key 'tPoints' must be at least 2");
        out.tPoints = static_cast<std::size_t>(*cfg.tPoints);
    }
    if (cfg.refineLevels) {
        if (*cfg.refineLevels < 0) throw ConfigError("key 'refineLevels' must be non-negative");
        out.refineLevels = static_cast<std::size_t>(*cfg.refineLevels);
    }
    if (cfg.threads) {
        if (*cfg.threads < 1) throw ConfigError("key 'threads' must be at least 1");
        out.threads = static_cast<unsigned>(*cfg.threads);
    }
    if (cfg.axes) out.axes = *cfg.axes;
    if (cfg.detuningLock) out.detuningLock = *cfg.detuningLock;
    return out;
}

/// Resolved config as a flat JSON object that `parse_config` accepts back.
inline json to_json(const ResolvedConfig& r)
{
    const Scenario& s = r.scenario;
    json j;
    j["gamma1"] = s.gamma1;
    j["gamma2"] = s.gamma2;
    j["kappa1"] = s.kappa1;
    j["kappa2"] = s.kappa2;
    if (s.drive) {
        j["g1"] = s.drive->g1;
        j["g2"] = s.drive->g2;
        j["P1"] = s.drive->P1;
        j["P2"] = s.drive->P2;
        j["omegaL1"] = s.drive->omegaL1;
        j["omegaL2"] = s.drive->omegaL2;
    } else {
        j["G1"] = s.G1;
        j["G2"] = s.G2;
    }
    j["Delta"] = s.Delta;
    j["rB"] = s.feedback.rB;
    j["theta"] = s.feedback.theta;
    if (s.temperature) {
        j["temperatureK"] = *s.temperature;
    } else {
        j["nbar1"] = s.nbar1;
        j["nbar2"] = s.nbar2;
    }
    if (s.omega1) j["omega1"] = *s.omega1;
    if (s.omega2) j["omega2"] = *s.omega2;
    j["rwaThreshold"] = s.rwaThreshold;
    j["mode"] = r.mode == SweepMode::steady ? "steady" : "evolve";
    j["tMax"] = r.tMax;
    j["tPoints"] = r.tPoints;
    j["axes"] = json::array();
    for (const Axis& axis : r.axes) {
        j["axes"].push_back(axis_to_json(axis));
    }
    j["detuningLock"] = r.detuningLock;
    j["refineLevels"] = r.refineLevels;
    j["threads"] = r.threads;
    return j;
}

}  // namespace cfent::cli

#endif
