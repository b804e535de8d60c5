#ifndef CFENT_CLI_APP_HPP
#define CFENT_CLI_APP_HPP

// Command-line front end. `run` is the whole program; the executable in
// tools/ only forwards argv and the standard streams.
//
// Exit codes: 0 success, 2 configuration error, 3 no steady state
// (unstable or marginal drift), 4 numerical or I/O failure.

#include <exception>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "../dynamics.hpp"
#include "../entanglement.hpp"
#include "../experiments.hpp"
#include "config.hpp"
#include "table.hpp"

namespace cfent::cli {

enum ExitCode : int { ok = 0, config_error = 2, instability = 3, numerical_failure = 4 };

/// Reference parameter sets, as configs.
inline const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{"fig2a", "fig2c",        "fig2d",      "fig3a",
                                                "fig3b", "contour-cold", "contour-hot"};
    return names;
}

inline json preset_config(const std::string& name)
{
    json steady = {{"G1", 0.99e5},   {"G2", 1e5},       {"gamma1", 10.0}, {"gamma2", 10.0},
                   {"kappa1", 5e4},  {"kappa2", 5e4},   {"Delta", 0.0},   {"theta", 0.0},
                   {"nbar1", 0.0},   {"nbar2", 0.0},    {"mode", "steady"}};
    const json ratio_axis = {{"name", "ratio"}, {"min", 0.8}, {"max", 0.999}, {"count", 61}};
    if (name == "fig2a") {
        steady["detuningLock"] = true;
        steady["axes"] = json::array(
            {json{{"name", "theta"}, {"min", -std::numbers::pi}, {"max", std::numbers::pi},
                  {"count", 61}},
             json{{"name", "rB"}, {"min", 0.0}, {"max", 0.99}, {"count", 61}}});
        steady.erase("theta");
        return steady;
    }
    if (name == "fig2c") {
        steady["axes"] = json::array({ratio_axis, json{{"name", "rB"}, {"values", {0.0, 0.95}}}});
        return steady;
    }
    if (name == "fig2d") {
        steady["nbar1"] = 200.0;
        steady["nbar2"] = 100.0;
        steady["axes"] = json::array({ratio_axis, json{{"name", "rB"}, {"values", {0.0, 0.7}}}});
        return steady;
    }
    if (name == "contour-cold" || name == "contour-hot") {
        if (name == "contour-hot") {
            steady["nbar1"] = 200.0;
            steady["nbar2"] = 100.0;
        }
        steady["axes"] = json::array(
            {json{{"name", "ratio"}, {"min", 0.8}, {"max", 1.0}, {"count", 61}},
             json{{"name", "rB"}, {"min", 0.0}, {"max", 0.99}, {"count", 61}}});
        return steady;
    }
    if (name == "fig3a" || name == "fig3b") {
        json evolve = {{"G1", 1e4},        {"G2", 1e4},          {"gamma1", 10.0},
                       {"gamma2", 10.0},   {"kappa1", 5e4},      {"kappa2", 5e4},
                       {"Delta", 1e3},     {"theta", 0.0},       {"mode", "evolve"},
                       {"tMax", default_transient_t_max},
                       {"tPoints", default_transient_points}};
        evolve["nbar1"] = name == "fig3a" ? 0.0 : 20.0;
        evolve["nbar2"] = name == "fig3a" ? 0.0 : 10.0;
        evolve["axes"] =
            json::array({json{{"name", "rB"}, {"values", transient_reflectivities()}}});
        return evolve;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

struct Options {
    std::string command;
    std::string preset;
    std::string configPath;
    std::string outPath;
    std::string format = "csv";
    std::vector<std::string> overrides;
    bool curves = false;
    bool quiet = false;
};

namespace detail {

inline json rwa_json(const ValidityReport& r)
{
    json j;
    j["verdict"] = to_string(r.verdict);
    j["ratio"] = std::isfinite(r.ratio) ? json(r.ratio) : json(nullptr);
    j["threshold"] = r.threshold;
    if (r.phaseG1) j["phaseG1"] = *r.phaseG1;
    if (r.phaseG2) j["phaseG2"] = *r.phaseG2;
    return j;
}

inline Table base_table(const Options& opt, const ResolvedConfig& cfg, const ResolvedPoint& base)
{
    Table t;
    t.meta["command"] = opt.command;
    if (!opt.preset.empty()) t.meta["preset"] = opt.preset;
    t.meta["config"] = to_json(cfg);
    t.meta["kappaTilde"] = base.model.kappaTilde;
    t.meta["DeltaTilde"] = base.model.DeltaTilde;
    t.meta["rwa"] = rwa_json(base.rwa);
    return t;
}

inline Table sweep_table(const SweepResult& result, bool curves)
{
    Table t;
    t.columns = result.axisNames;
    const bool evolve = result.mode == SweepMode::evolve;
    if (evolve && curves) t.columns.push_back("t");
    for (const char* c : {"E_N", "nu_minus", "stable", "stability", "kappaTilde", "DeltaTilde",
                          "rwa"}) {
        t.columns.push_back(c);
    }
    if (evolve && !curves) t.columns.push_back("t_peak");
    t.columns.push_back("error");

    auto common = [](const SweepRow& row, std::vector<Cell>& cells) {
        cells.emplace_back(row.stable());
        cells.emplace_back(to_string(row.stability));
        cells.emplace_back(number(row.kappaTilde));
        cells.emplace_back(number(row.DeltaTilde));
        cells.emplace_back(to_string(row.rwa.verdict));
    };

    for (const SweepRow& row : result.rows) {
        if (evolve && curves && !row.curveLogNeg.empty()) {
            for (std::size_t i = 0; i < row.curveLogNeg.size(); ++i) {
                std::vector<Cell> cells(row.axisValues.begin(), row.axisValues.end());
                cells.emplace_back(result.tGrid[i]);
                cells.emplace_back(row.curveLogNeg[i]);
                cells.emplace_back(row.curveNuMinus[i]);
                common(row, cells);
                cells.emplace_back(row.error);
                t.rows.push_back(std::move(cells));
            }
            continue;
        }
        std::vector<Cell> cells(row.axisValues.begin(), row.axisValues.end());
        if (evolve && curves) cells.emplace_back(std::monostate{});
        cells.push_back(number(row.logNeg));
        cells.push_back(number(row.nuMinus));
        common(row, cells);
        if (evolve && !curves) cells.push_back(number(row.tPeak));
        cells.emplace_back(row.error);
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline void append(Table& into, const Table& from)
{
    into.columns = from.columns;
    into.rows = from.rows;
}

}  // namespace detail

/// Executes one command and returns the process exit code.
inline int execute(const Options& opt, std::ostream& out, std::ostream& err)
{
    ResolvedConfig cfg;
    ResolvedPoint base;
    try {
        json merged = opt.command == "preset" ? preset_config(opt.preset) : json::object();
        if (!opt.configPath.empty()) {
            const json file = load_config_file(opt.configPath);
            if (!file.is_object()) {
                throw ConfigError("config file '" + opt.configPath + "' must hold a JSON object");
            }
            for (const auto& [key, value] : file.items()) {
                merged[key] = value;
            }
        }
        apply_overrides(merged, opt.overrides);
        cfg = resolve_config(parse_config(merged));
        base = resolve(cfg.point());
        if (opt.command == "sweep" || opt.command == "optimize" || opt.command == "preset") {
            validate(cfg.sweep_spec(false), opt.command == "optimize");
        }
        if (opt.command == "optimize" && cfg.mode != SweepMode::steady) {
            throw ConfigError("optimize requires mode 'steady'");
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    }

    Table table = detail::base_table(opt, cfg, base);
    try {
        const StateSpace ss = state_space(base.model);
        const Stability stability = classify_stability(ss.A);

        if (opt.command == "steady") {
            if (stability != Stability::stable) {
                err << "steady: no steady state, drift matrix is " << to_string(stability)
                    << " (spectral abscissa " << format_number(spectral_abscissa(ss.A))
                    << ")\n";
                return instability;
            }
            const Entanglement e = mechanical_entanglement(steady_state_covariance(ss));
            table.columns = {"E_N",        "nu_minus",   "stable", "kappaTilde",
                             "DeltaTilde", "rwa",        "rwa_ratio"};
            table.rows.push_back({e.logNeg, e.nuMinus, true, base.model.kappaTilde,
                                  base.model.DeltaTilde, to_string(base.rwa.verdict),
                                  number(base.rwa.ratio)});
        } else if (opt.command == "evolve") {
            const std::vector<double> times = cfg.time_grid();
            const std::vector<Matrix6> vs =
                propagate(ss, initial_covariance(base.model.nbar1, base.model.nbar2), times);
            const bool is_stable = stability == Stability::stable;
            if (opt.curves) {
                table.columns = {"t", "E_N", "nu_minus", "stable", "kappaTilde", "DeltaTilde",
                                 "rwa"};
                for (std::size_t i = 0; i < vs.size(); ++i) {
                    const Entanglement e = mechanical_entanglement(vs[i]);
                    table.rows.push_back({times[i], e.logNeg, e.nuMinus, is_stable,
                                          base.model.kappaTilde, base.model.DeltaTilde,
                                          to_string(base.rwa.verdict)});
                }
            } else {
                double best = -1.0;
                double t_peak = 0.0;
                double nu_min = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < vs.size(); ++i) {
                    const Entanglement e = mechanical_entanglement(vs[i]);
                    if (e.logNeg > best) {
                        best = e.logNeg;
                        t_peak = times[i];
                    }
                    nu_min = std::min(nu_min, e.nuMinus);
                }
                table.columns = {"E_N_max", "t_peak",     "nu_minus_min", "stable",
                                 "kappaTilde", "DeltaTilde", "rwa"};
                table.rows.push_back({best, t_peak, nu_min, is_stable, base.model.kappaTilde,
                                      base.model.DeltaTilde, to_string(base.rwa.verdict)});
            }
        } else if (opt.command == "stability") {
            Cell analytic = std::monostate{};
            Cell gap = std::monostate{};
            try {
                gap = stability_gap(base.model);
                analytic = stability_analytic(base.model);
            } catch (const UnsupportedRegimeError&) {
            }
            table.columns = {"analytic", "analytic_gap", "eigen", "spectral_abscissa",
                             "kappaTilde", "DeltaTilde", "rwa"};
            table.rows.push_back({analytic, gap, to_string(stability), spectral_abscissa(ss.A),
                                  base.model.kappaTilde, base.model.DeltaTilde,
                                  to_string(base.rwa.verdict)});
        } else if (opt.command == "sweep" || opt.command == "preset") {
            const bool curves =
                opt.curves || (opt.command == "preset" && cfg.mode == SweepMode::evolve);
            const SweepResult result = run_sweep(cfg.sweep_spec(curves));
            detail::append(table, detail::sweep_table(result, curves));
        } else if (opt.command == "optimize") {
            const Optimum best = find_optimum(cfg.sweep_spec(false), cfg.refineLevels);
            for (const Axis& axis : cfg.axes) table.columns.push_back(axis.name);
            for (const char* c : {"E_N", "nu_minus", "stable", "kappaTilde", "DeltaTilde", "rwa",
                                  "evaluations"}) {
                table.columns.push_back(c);
            }
            std::vector<Cell> cells(best.axisValues.begin(), best.axisValues.end());
            cells.emplace_back(best.logNeg);
            cells.push_back(number(best.row.nuMinus));
            cells.emplace_back(best.row.stable());
            cells.emplace_back(best.row.kappaTilde);
            cells.emplace_back(best.row.DeltaTilde);
            cells.emplace_back(to_string(best.row.rwa.verdict));
            cells.emplace_back(static_cast<long long>(best.evaluations));
            table.rows.push_back(std::move(cells));
        }
    } catch (const NoFeasiblePointError& e) {
        err << opt.command << ": " << e.what() << "\n";
        return instability;
    } catch (const StabilityError& e) {
        err << opt.command << ": " << e.what() << "\n";
        return instability;
    } catch (const std::exception& e) {
        err << opt.command << ": numerical failure: " << e.what() << "\n";
        return numerical_failure;
    }

    const std::string text =
        serialize(table, opt.format == "json" ? Format::json : Format::csv);
    if (opt.outPath.empty()) {
        out << text;
    } else {
        std::ofstream file(opt.outPath, std::ios::binary);
        file << text;
        file.flush();
        if (!file) {
            err << "error: cannot write '" << opt.outPath << "'\n";
            return numerical_failure;
        }
        if (!opt.quiet) {
            err << "wrote " << table.rows.size() << " rows to " << opt.outPath << "\n";
        }
    }
    return ok;
}

/// Parses argv and runs the selected subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Coherent-feedback entanglement of two mechanical resonators"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.configPath, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", opt.outPath, "Output path (default: stdout)");
        sub->add_option("--format", opt.format, "Output format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--set", opt.overrides, "key=value overrides (last wins)")
            ->expected(1, CLI::detail::expected_max_vector_size);
        sub->add_flag("--curves", opt.curves, "Emit full E_N(t) curves in evolve mode");
        sub->add_flag("--quiet", opt.quiet, "Suppress informational messages");
    };

    const std::vector<std::pair<std::string, std::string>> commands{
        {"steady", "Steady-state logarithmic negativity of one configuration"},
        {"evolve", "Time evolution from the thermal product state"},
        {"sweep", "Grid sweep over one or two parameters"},
        {"optimize", "Grid search with zoom refinement for maximal steady-state E_N"},
        {"stability", "Closed-form and eigenvalue stability verdicts"},
        {"preset", "Reference parameter sets"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub);
        if (name == "preset") {
            sub->add_option("name", opt.preset, "Preset name")
                ->required()
                ->check(CLI::IsMember(preset_names()));
        }
        sub->callback([&opt, name = name] { opt.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return ok;
        }
        err << "config error: " << e.what() << "\n";
        return config_error;
    }
    return execute(opt, out, err);
}

}  // namespace cfent::cli

#endif
