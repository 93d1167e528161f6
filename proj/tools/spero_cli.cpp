// Command-line front end: simulate, compare, sweep, optimize, fsm-trace.
//
// Exit codes: 0 success, 1 runtime/I-O failure, 2 configuration error,
// 3 simulation divergence (the truncated trace is still written).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "spero/scenario.hpp"

namespace fs = std::filesystem;
using namespace spero;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct CommonOptions {
    std::string config;
    std::string out;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "scenario JSON file (defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory")->required();
    sub->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", o.seed, "random seed (overrides the config)");
}

ScenarioSpec load(const CommonOptions& o) {
    ScenarioSpec spec = o.config.empty() ? scenario_from_json(nlohmann::json::object())
                                         : load_scenario(o.config);
    if (o.seed) spec.seed = *o.seed;
    return spec;
}

std::string output_path(const CommonOptions& o, const std::string& stem) {
    fs::create_directories(o.out);
    return (fs::path(o.out) / (stem + extension(trace_format_from_string(o.format)))).string();
}

std::vector<std::string> header(const ScenarioSpec& spec, const std::string& what) {
    return {what + " for scenario '" + spec.name + "'", "seed " + std::to_string(spec.seed)};
}

template <class R>
void emit(const CommonOptions& o, const std::string& stem, const std::vector<R>& rows,
          const std::vector<std::string>& comments) {
    const auto path = output_path(o, stem);
    export_trace(path, rows, trace_format_from_string(o.format), comments);
    std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
}

int cmd_simulate(const CommonOptions& o) {
    const ScenarioSpec spec = with_resolved_gains(load(o));
    const SimTrace trace = run_mission(spec);
    auto comments = header(spec, "closed-loop mission");
    comments.push_back("dt " + format_double(spec.dt) + " s, feedforward " +
                       (spec.feedforward ? "on" : "off"));
    comments.push_back("z and v_z are positive downward; negate for altitude up");
    for (const auto& tr : trace.transitions) {
        comments.push_back("transition t=" + format_double(tr.t) + " " + to_string(tr.from) + " -> " +
                           to_string(tr.to));
    }
    emit(o, "mission", trace.records, comments);
    if (trace.diverged) {
        std::cerr << "error: " << trace.diagnostic << '\n';
        return kExitDiverged;
    }
    return 0;
}

int cmd_compare(const CommonOptions& o) {
    const ScenarioSpec spec = with_resolved_gains(load(o));
    const ComparisonResult res = run_comparison(spec);
    const auto& c = spec.comparison;
    auto comments = header(spec, "architecture comparison");
    comments.push_back("plant eta " + format_double(spec.vehicle.eta_yaw()) + ", dt " +
                       format_double(c.dt) + " s, step " + format_double(c.step) +
                       ", disturbance " + format_double(c.disturbance) + " at t=" +
                       format_double(c.disturbance_time) + " s, model error " +
                       format_double(c.model_error));
    emit(o, "comparison_step", res.step, comments);
    emit(o, "comparison_model_error", res.model_error, comments);
    emit(o, "comparison_disturbance", res.disturbance, comments);
    emit(o, "comparison_effort", res.effort, comments);
    if (res.diverged) {
        std::cerr << "error: " << res.diagnostic << '\n';
        return kExitDiverged;
    }
    return 0;
}

int cmd_sweep(const CommonOptions& o) {
    const ScenarioSpec spec = load(o);
    const SweepGrid grid = run_sweep(spec);
    auto comments = header(spec, "stability sweep");
    for (const auto& line : sweep_comments(grid)) comments.push_back(line);
    emit(o, "sweep", sweep_rows(grid), comments);
    std::cout << grid.unstable_count() << " of " << grid.cells.size() << " cells unstable\n";
    return 0;
}

int cmd_optimize(const CommonOptions& o) {
    const ScenarioSpec spec = load(o);
    const OptimizationRun run = run_optimize(spec);
    auto comments = header(spec, "gain optimisation");
    comments.push_back("lambda " + format_double(spec.optimize.lambda) + ", horizon " +
                       format_double(spec.optimize.horizon) + " s, dt " +
                       format_double(spec.optimize.dt) + " s");
    emit(o, "optimize", optimize_rows(spec, run), comments);
    return 0;
}

int cmd_fsm_trace(const CommonOptions& o) {
    const ScenarioSpec spec = load(o);
    const FsmTrace trace = run_fsm_trace(spec);
    auto comments = header(spec, "state-machine replay");
    for (const auto& tr : trace.transitions) {
        comments.push_back("transition t=" + format_double(tr.t) + " " + to_string(tr.from) + " -> " +
                           to_string(tr.to));
    }
    emit(o, "fsm_trace", fsm_rows(trace), comments);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stop-rotor UAV simulation and analysis"};
    app.require_subcommand(1);

    CommonOptions opts;
    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const CommonOptions&);
    };
    const Sub subs[] = {
        {"simulate", "closed-loop mission simulation", cmd_simulate},
        {"compare", "single-loop vs cascaded comparison suite", cmd_compare},
        {"sweep", "cascaded stability map over two gains", cmd_sweep},
        {"optimize", "optimise gains for both architectures", cmd_optimize},
        {"fsm-trace", "replay a mission script through the state machine", cmd_fsm_trace},
    };
    std::vector<std::pair<CLI::App*, const Sub*>> handles;
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        add_common(sub, opts);
        handles.emplace_back(sub, &s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        for (const auto& [sub, s] : handles) {
            if (sub->parsed()) return s->run(opts);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
