// Scenario engine. A validated ScenarioSpec drives every runner, and each
// runner emits fixed-schema records for the trace exporters.
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "spero/controllers.hpp"
#include "spero/dynamics.hpp"
#include "spero/errors.hpp"
#include "spero/gain_presets.hpp"
#include "spero/gainopt.hpp"
#include "spero/reconfiguration.hpp"
#include "spero/stability.hpp"
#include "spero/statemachine.hpp"
#include "spero/trace_io.hpp"

namespace spero {

// ---------------------------------------------------------------------------
// Configuration

enum class Channel { Yaw, Altitude };

inline Channel channel_from_string(const std::string& s) {
    if (s == "yaw") return Channel::Yaw;
    if (s == "altitude") return Channel::Altitude;
    throw ConfigError("unknown disturbance channel '" + s + "' (expected yaw or altitude)");
}

/// Step input disturbance added to the channel's input from time t on.
struct Disturbance {
    double t = 0.0;
    Channel channel = Channel::Yaw;
    double magnitude = 0.0;  ///< [N m] for yaw, [N] for altitude
};

enum class GainSourceKind { Preset, File, Optimizer };

struct GainSource {
    GainSourceKind kind = GainSourceKind::Preset;
    std::string preset = "flight";
    std::string file;  ///< resolved path when kind == File
};

struct ComparisonSettings {
    double dt = 1e-3;
    double duration = 60.0;
    double step = 1.0;                  ///< reference step amplitude [rad]
    double disturbance = 1.0;           ///< input disturbance magnitude [N m]
    double disturbance_time = 1.0;      ///< [s]
    double model_error = 0.2;           ///< plant eta scaled by 1 -/+ this
};

struct OptimizeSettings {
    double lambda = 1e-3;
    double horizon = 1.0;
    double dt = 1e-3;
    int restarts = 4;
    int max_evaluations = 4000;
};

struct ScenarioSpec {
    std::string name = "scenario";
    VehicleParams vehicle;
    GainSource gain_source;
    PidGains single_loop = tuned_single_loop_gains();
    CascadedGains cascaded = tuned_cascaded_gains();
    GainPreset flight_gains = flight_gain_preset();
    MissionScript mission;
    ReconfigurationParams rotor;
    GuardThresholds thresholds;
    double dt = 0.005;
    double duration = 40.0;
    std::vector<Disturbance> disturbances;
    bool feedforward = true;
    double hover_altitude = 0.0;  ///< climb above the take-off point [m]
    std::uint64_t seed = 0;
    ComparisonSettings comparison;
    SweepSpec sweep = SweepSpec::defaults();
    std::optional<double> sweep_eta;  ///< defaults to the body inertia
    OptimizeSettings optimize;

    void validate() const {
        vehicle.validate();
        rotor.validate();
        thresholds.validate();
        single_loop.validate();
        cascaded.validate();
        if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be > 0");
        if (!(dt > 0.0) || dt > kMaxStep) throw ConfigError("dt must satisfy 0 < dt <= 0.01 s");
        if (!(comparison.duration > 0.0)) throw ConfigError("comparison duration must be > 0");
        if (!(comparison.dt > 0.0) || comparison.dt > kMaxStep) {
            throw ConfigError("comparison dt must satisfy 0 < dt <= 0.01 s");
        }
        if (!(comparison.model_error >= 0.0) || !(comparison.model_error < 1.0)) {
            throw ConfigError("model_error must lie in [0, 1)");
        }
        for (const auto& d : disturbances) {
            if (!std::isfinite(d.t) || !std::isfinite(d.magnitude)) {
                throw ConfigError("disturbance entries must be finite");
            }
        }
        if (sweep_eta && !(*sweep_eta > 0.0)) throw ConfigError("sweep eta must be > 0");
    }
};

/// Parses "t kill arm cmd [vehicle_speed]" lines; commas or blanks separate
/// fields and '#' starts a comment.
inline MissionScript parse_mission_script(std::istream& is) {
    std::vector<ScriptEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        for (char& c : line) {
            if (c == ',') c = ' ';
        }
        std::istringstream ls(line);
        std::vector<std::string> f;
        for (std::string w; ls >> w;) f.push_back(w);
        if (f.empty()) continue;
        if (f.size() != 4 && f.size() != 5) {
            throw ConfigError("mission script line " + std::to_string(lineno) +
                              ": expected t kill arm cmd [vehicle_speed]");
        }
        auto flag = [&](const std::string& s) {
            if (s == "0") return false;
            if (s == "1") return true;
            throw ConfigError("mission script line " + std::to_string(lineno) + ": flag must be 0 or 1");
        };
        ScriptEntry e;
        e.t = parse_double(f[0]);
        e.inputs.kill = flag(f[1]);
        e.inputs.arm = flag(f[2]);
        if (f[3] == "0") e.inputs.command = StateCommand::Null;
        else if (f[3] == "1") e.inputs.command = StateCommand::VTOL;
        else if (f[3] == "2") e.inputs.command = StateCommand::ForwardFlight;
        else throw ConfigError("mission script line " + std::to_string(lineno) + ": cmd must be 0, 1 or 2");
        if (f.size() == 5) e.vehicle_speed = parse_double(f[4]);
        entries.push_back(e);
    }
    return MissionScript(std::move(entries));
}

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline std::optional<Limits> read_limits(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw ConfigError(std::string(key) + " must be [lo, hi]");
    Limits l{a[0].get<double>(), a[1].get<double>()};
    if (!(l.lo <= l.hi)) throw ConfigError(std::string(key) + " needs lo <= hi");
    return l;
}

inline PidGains read_pid(const json& j, const std::string& where, PidGains g = {}) {
    check_keys(j, where, {"kp", "ki", "kd", "output_limits", "windup_limits"});
    read(j, "kp", g.kp);
    read(j, "ki", g.ki);
    read(j, "kd", g.kd);
    if (j.contains("output_limits")) g.output_limits = read_limits(j, "output_limits");
    if (j.contains("windup_limits")) g.windup_limits = read_limits(j, "windup_limits");
    g.validate();
    return g;
}

inline CascadedGains read_cascaded(const json& j, CascadedGains g) {
    check_keys(j, "cascaded", {"kp1", "ki1", "kp2", "ki2", "kd2"});
    read(j, "kp1", g.outer.kp);
    read(j, "ki1", g.outer.ki);
    read(j, "kp2", g.inner.kp);
    read(j, "ki2", g.inner.ki);
    read(j, "kd2", g.inner.kd);
    g.validate();
    return g;
}

/// Gain tables: inline single_loop / cascaded / loops entries.
inline void read_gain_tables(const json& j, ScenarioSpec& s) {
    if (j.contains("single_loop")) s.single_loop = read_pid(j.at("single_loop"), "single_loop", s.single_loop);
    if (j.contains("cascaded")) s.cascaded = read_cascaded(j.at("cascaded"), s.cascaded);
    if (j.contains("loops")) {
        const auto& loops = j.at("loops");
        if (!loops.is_object()) throw ConfigError("loops must be an object");
        for (auto it = loops.begin(); it != loops.end(); ++it) {
            auto cur = s.flight_gains.loops.find(it.key());
            if (cur == s.flight_gains.loops.end()) {
                throw ConfigError("unknown gain loop '" + it.key() + "'");
            }
            cur->second = read_pid(it.value(), "loops." + it.key(), cur->second);
        }
    }
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

inline SweepAxis read_axis(const json& j, SweepAxis a, const std::string& where) {
    check_keys(j, where, {"gain", "lo", "hi", "n", "log"});
    read(j, "gain", a.gain);
    read(j, "lo", a.lo);
    read(j, "hi", a.hi);
    read(j, "n", a.n);
    read(j, "log", a.log_scale);
    return a;
}

}  // namespace detail

/// Builds a scenario from JSON. Relative file references resolve against
/// `base_dir`. Missing keys keep their defaults; unknown keys are errors.
inline ScenarioSpec scenario_from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir = ".") {
    using detail::read;
    detail::check_keys(j, "scenario",
                       {"name", "vehicle", "gains", "mission", "rotor", "thresholds", "dt",
                        "duration", "disturbances", "feedforward", "hover_altitude", "seed",
                        "comparison", "sweep", "optimize"});
    ScenarioSpec s;
    read(j, "name", s.name);
    read(j, "dt", s.dt);
    read(j, "duration", s.duration);
    read(j, "feedforward", s.feedforward);
    read(j, "hover_altitude", s.hover_altitude);
    read(j, "seed", s.seed);

    if (j.contains("vehicle")) {
        const auto& v = j.at("vehicle");
        detail::check_keys(v, "vehicle", {"i_body", "i_rotor", "rho", "c_d", "c_l", "a_ref", "r", "m", "g"});
        read(v, "i_body", s.vehicle.i_body);
        read(v, "i_rotor", s.vehicle.i_rotor);
        read(v, "rho", s.vehicle.rho);
        read(v, "c_d", s.vehicle.c_d);
        read(v, "c_l", s.vehicle.c_l);
        read(v, "a_ref", s.vehicle.a_ref);
        read(v, "r", s.vehicle.r);
        read(v, "m", s.vehicle.m);
        read(v, "g", s.vehicle.g);
    }

    if (j.contains("gains")) {
        const auto& g = j.at("gains");
        detail::check_keys(g, "gains", {"source", "preset", "file", "single_loop", "cascaded", "loops"});
        std::string source = "preset";
        read(g, "source", source);
        if (source == "preset") {
            s.gain_source.kind = GainSourceKind::Preset;
            read(g, "preset", s.gain_source.preset);
            auto p = builtin_preset(s.gain_source.preset);
            if (!p) throw ConfigError("unknown gain preset '" + s.gain_source.preset + "'");
            s.flight_gains = *p;
        } else if (source == "file") {
            s.gain_source.kind = GainSourceKind::File;
            std::string f;
            read(g, "file", f);
            if (f.empty()) throw ConfigError("gain source 'file' needs a 'file' entry");
            const auto path = detail::resolve(base_dir, f);
            s.gain_source.file = path.string();
            std::ifstream is(path);
            if (!is) throw ConfigError("cannot read gain file '" + path.string() + "'");
            nlohmann::json gf;
            try {
                gf = nlohmann::json::parse(is);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("gain file '" + path.string() + "': " + e.what());
            }
            detail::check_keys(gf, "gain file", {"single_loop", "cascaded", "loops"});
            detail::read_gain_tables(gf, s);
        } else if (source == "optimizer") {
            s.gain_source.kind = GainSourceKind::Optimizer;
        } else {
            throw ConfigError("unknown gain source '" + source + "' (expected preset, file or optimizer)");
        }
        detail::read_gain_tables(g, s);
    }

    if (j.contains("mission")) {
        const auto& m = j.at("mission");
        detail::check_keys(m, "mission", {"script", "script_file"});
        if (m.contains("script") && m.contains("script_file")) {
            throw ConfigError("mission takes either script or script_file, not both");
        }
        if (m.contains("script")) {
            std::ostringstream text;
            for (const auto& row : m.at("script")) {
                if (!row.is_array()) throw ConfigError("mission script rows must be arrays");
                for (std::size_t i = 0; i < row.size(); ++i) {
                    text << (i ? " " : "") << format_double(row[i].get<double>());
                }
                text << '\n';
            }
            std::istringstream is(text.str());
            s.mission = parse_mission_script(is);
        } else if (m.contains("script_file")) {
            const auto path = detail::resolve(base_dir, m.at("script_file").get<std::string>());
            std::ifstream is(path);
            if (!is) throw ConfigError("cannot read mission script '" + path.string() + "'");
            s.mission = parse_mission_script(is);
        }
    }

    if (j.contains("rotor")) {
        const auto& r = j.at("rotor");
        detail::check_keys(r, "rotor",
                           {"nominal_speed", "spinup_time", "deceleration_time", "acceleration_time",
                            "wing_flip_angle", "wing_flip_rate", "cop_stroke", "cop_rate",
                            "counterbalance_rate"});
        read(r, "nominal_speed", s.rotor.nominal_rotor_speed);
        read(r, "spinup_time", s.rotor.spinup_time);
        read(r, "deceleration_time", s.rotor.deceleration_time);
        read(r, "acceleration_time", s.rotor.acceleration_time);
        read(r, "wing_flip_angle", s.rotor.wing_flip_angle);
        read(r, "wing_flip_rate", s.rotor.wing_flip_rate);
        read(r, "cop_stroke", s.rotor.cop_stroke);
        read(r, "cop_rate", s.rotor.cop_rate);
        read(r, "counterbalance_rate", s.rotor.counterbalance_rate);
    }

    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        detail::check_keys(t, "thresholds", {"rotor_speed", "counterbalance", "vehicle_speed"});
        read(t, "rotor_speed", s.thresholds.rotor_speed);
        read(t, "counterbalance", s.thresholds.counterbalance);
        read(t, "vehicle_speed", s.thresholds.vehicle_speed);
    }

    if (j.contains("disturbances")) {
        for (const auto& d : j.at("disturbances")) {
            detail::check_keys(d, "disturbance", {"t", "channel", "magnitude"});
            Disturbance x;
            read(d, "t", x.t);
            std::string ch = "yaw";
            read(d, "channel", ch);
            x.channel = channel_from_string(ch);
            read(d, "magnitude", x.magnitude);
            s.disturbances.push_back(x);
        }
    }

    if (j.contains("comparison")) {
        const auto& c = j.at("comparison");
        detail::check_keys(c, "comparison",
                           {"dt", "duration", "step", "disturbance", "disturbance_time", "model_error"});
        read(c, "dt", s.comparison.dt);
        read(c, "duration", s.comparison.duration);
        read(c, "step", s.comparison.step);
        read(c, "disturbance", s.comparison.disturbance);
        read(c, "disturbance_time", s.comparison.disturbance_time);
        read(c, "model_error", s.comparison.model_error);
    }

    if (j.contains("sweep")) {
        const auto& w = j.at("sweep");
        detail::check_keys(w, "sweep", {"x", "y", "eta", "fixed"});
        if (w.contains("x")) s.sweep.x = detail::read_axis(w.at("x"), s.sweep.x, "sweep.x");
        if (w.contains("y")) s.sweep.y = detail::read_axis(w.at("y"), s.sweep.y, "sweep.y");
        if (w.contains("eta")) s.sweep_eta = w.at("eta").get<double>();
        if (w.contains("fixed")) s.sweep.fixed = detail::read_cascaded(w.at("fixed"), s.sweep.fixed);
    }

    if (j.contains("optimize")) {
        const auto& o = j.at("optimize");
        detail::check_keys(o, "optimize", {"lambda", "horizon", "dt", "restarts", "max_evaluations"});
        read(o, "lambda", s.optimize.lambda);
        read(o, "horizon", s.optimize.horizon);
        read(o, "dt", s.optimize.dt);
        read(o, "restarts", s.optimize.restarts);
        read(o, "max_evaluations", s.optimize.max_evaluations);
    }

    s.validate();
    return s;
}

inline ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    return scenario_from_json(j, path.parent_path());
}

// ---------------------------------------------------------------------------
// Records

struct ComparisonRecord {
    std::string variant;
    std::string architecture;
    double t = 0.0;
    double setpoint = 0.0;
    double y = 0.0;
    double e = 0.0;
    double u = 0.0;
    double disturbance = 0.0;

    static const std::vector<Column>& columns() {
        static const std::vector<Column> c = {
            {"variant", "", ColumnKind::Text}, {"architecture", "", ColumnKind::Text},
            {"t", "s"}, {"setpoint", "rad"}, {"y", "rad"}, {"e", "rad"},
            {"u", "N m"}, {"disturbance", "N m"}};
        return c;
    }
    [[nodiscard]] std::vector<Cell> to_cells() const {
        return {variant, architecture, t, setpoint, y, e, u, disturbance};
    }
    static ComparisonRecord from_cells(const std::vector<Cell>& c) {
        return {text(c[0]), text(c[1]), number(c[2]), number(c[3]),
                number(c[4]), number(c[5]), number(c[6]), number(c[7])};
    }
    friend bool operator==(const ComparisonRecord&, const ComparisonRecord&) = default;
};

/// One closed-loop mission step.
struct MissionRecord {
    double t = 0.0;
    std::string state;
    std::string controller_mode;
    std::string rotor_command;
    std::string wing;
    std::string cop;
    std::string counterbalance;
    double latch = 0.0;
    double alpha_body = 0.0;
    double omega_body = 0.0;
    double z = 0.0;
    double v_z = 0.0;
    double alpha_rotor = 0.0;
    double omega_rotor = 0.0;
    double rotor_accel = 0.0;
    double yaw_setpoint = 0.0;
    double z_setpoint = 0.0;
    double yaw_error = 0.0;
    double z_error = 0.0;
    double tau_u = 0.0;
    double f_u = 0.0;
    double d_yaw = 0.0;
    double d_alt = 0.0;
    double dist_yaw = 0.0;
    double dist_alt = 0.0;

    static const std::vector<Column>& columns() {
        static const std::vector<Column> c = {
            {"t", "s"},
            {"state", "", ColumnKind::Text},
            {"controller_mode", "", ColumnKind::Text},
            {"rotor_command", "", ColumnKind::Text},
            {"wing", "", ColumnKind::Text},
            {"cop", "", ColumnKind::Text},
            {"counterbalance", "", ColumnKind::Text},
            {"latch", ""},
            {"alpha_body", "rad"},
            {"omega_body", "rad/s"},
            {"z", "m"},
            {"v_z", "m/s"},
            {"alpha_rotor", "rad"},
            {"omega_rotor", "rad/s"},
            {"rotor_accel", "rad/s^2"},
            {"yaw_setpoint", "rad"},
            {"z_setpoint", "m"},
            {"yaw_error", "rad"},
            {"z_error", "m"},
            {"tau_u", "N m"},
            {"f_u", "N"},
            {"d_yaw", "N m"},
            {"d_alt", "N"},
            {"dist_yaw", "N m"},
            {"dist_alt", "N"}};
        return c;
    }
    [[nodiscard]] std::vector<Cell> to_cells() const {
        return {t,          state,       controller_mode, rotor_command, wing,
                cop,        counterbalance, latch,        alpha_body,    omega_body,
                z,          v_z,         alpha_rotor,     omega_rotor,   rotor_accel,
                yaw_setpoint, z_setpoint, yaw_error,      z_error,       tau_u,
                f_u,        d_yaw,       d_alt,           dist_yaw,      dist_alt};
    }
    static MissionRecord from_cells(const std::vector<Cell>& c) {
        MissionRecord r;
        r.t = number(c[0]);
        r.state = text(c[1]);
        r.controller_mode = text(c[2]);
        r.rotor_command = text(c[3]);
        r.wing = text(c[4]);
        r.cop = text(c[5]);
        r.counterbalance = text(c[6]);
        double* nums[] = {&r.latch,       &r.alpha_body,  &r.omega_body, &r.z,         &r.v_z,
                          &r.alpha_rotor, &r.omega_rotor, &r.rotor_accel, &r.yaw_setpoint,
                          &r.z_setpoint,  &r.yaw_error,   &r.z_error,    &r.tau_u,     &r.f_u,
                          &r.d_yaw,       &r.d_alt,       &r.dist_yaw,   &r.dist_alt};
        for (std::size_t i = 0; i < std::size(nums); ++i) *nums[i] = number(c[7 + i]);
        return r;
    }
    friend bool operator==(const MissionRecord&, const MissionRecord&) = default;
};

/// State-machine replay row.
struct FsmRow {
    double t = 0.0;
    std::string state;
    double kill = 0.0;
    double arm = 0.0;
    double command = 0.0;
    std::string controller_mode;
    std::string rotor_command;
    std::string wing;
    std::string cop;
    std::string counterbalance;
    double rotor_speed = 0.0;
    double rotor_speed_setpoint = 0.0;
    double counterbalance_error = 0.0;
    double vehicle_speed = 0.0;
    double reconfiguration_complete = 0.0;

    static FsmRow from_record(const FsmRecord& r) {
        FsmRow o;
        o.t = r.t;
        o.state = to_string(r.state);
        o.kill = r.inputs.kill;
        o.arm = r.inputs.arm;
        o.command = static_cast<double>(static_cast<int>(r.inputs.command));
        o.controller_mode = to_string(r.commands.controller_mode);
        o.rotor_command = to_string(r.commands.rotor);
        o.wing = to_string(r.configuration.wing);
        o.cop = to_string(r.configuration.cop);
        o.counterbalance = to_string(r.configuration.counterbalance);
        o.rotor_speed = r.guards.rotor_speed;
        o.rotor_speed_setpoint = r.guards.rotor_speed_setpoint;
        o.counterbalance_error = r.guards.counterbalance_reorient_error;
        o.vehicle_speed = r.guards.vehicle_speed;
        o.reconfiguration_complete = r.guards.reconfiguration_complete;
        return o;
    }

    static const std::vector<Column>& columns() {
        static const std::vector<Column> c = {
            {"t", "s"},
            {"state", "", ColumnKind::Text},
            {"kill", ""},
            {"arm", ""},
            {"command", ""},
            {"controller_mode", "", ColumnKind::Text},
            {"rotor_command", "", ColumnKind::Text},
            {"wing", "", ColumnKind::Text},
            {"cop", "", ColumnKind::Text},
            {"counterbalance", "", ColumnKind::Text},
            {"rotor_speed", "rad/s"},
            {"rotor_speed_setpoint", "rad/s"},
            {"counterbalance_error", "rad"},
            {"vehicle_speed", "m/s"},
            {"reconfiguration_complete", ""}};
        return c;
    }
    [[nodiscard]] std::vector<Cell> to_cells() const {
        return {t,   state, kill, arm, command, controller_mode, rotor_command, wing, cop,
                counterbalance, rotor_speed, rotor_speed_setpoint, counterbalance_error,
                vehicle_speed, reconfiguration_complete};
    }
    static FsmRow from_cells(const std::vector<Cell>& c) {
        FsmRow r;
        r.t = number(c[0]);
        r.state = text(c[1]);
        r.kill = number(c[2]);
        r.arm = number(c[3]);
        r.command = number(c[4]);
        r.controller_mode = text(c[5]);
        r.rotor_command = text(c[6]);
        r.wing = text(c[7]);
        r.cop = text(c[8]);
        r.counterbalance = text(c[9]);
        r.rotor_speed = number(c[10]);
        r.rotor_speed_setpoint = number(c[11]);
        r.counterbalance_error = number(c[12]);
        r.vehicle_speed = number(c[13]);
        r.reconfiguration_complete = number(c[14]);
        return r;
    }
    friend bool operator==(const FsmRow&, const FsmRow&) = default;
};

/// One stability-map cell; gain1 is the column (x) gain, gain2 the row (y) gain.
struct SweepRow {
    double row = 0.0;
    double col = 0.0;
    double gain1 = 0.0;
    double gain2 = 0.0;
    double stable = 0.0;
    double margin = 0.0;

    static const std::vector<Column>& columns() {
        static const std::vector<Column> c = {{"row", ""},   {"col", ""},    {"gain1", ""},
                                              {"gain2", ""}, {"stable", ""}, {"margin", ""}};
        return c;
    }
    [[nodiscard]] std::vector<Cell> to_cells() const { return {row, col, gain1, gain2, stable, margin}; }
    static SweepRow from_cells(const std::vector<Cell>& c) {
        return {number(c[0]), number(c[1]), number(c[2]), number(c[3]), number(c[4]), number(c[5])};
    }
    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Optimiser summary: one row per gain plus the cost values.
struct OptimizeRow {
    std::string architecture;
    std::string quantity;
    double initial = 0.0;
    double optimized = 0.0;

    static const std::vector<Column>& columns() {
        static const std::vector<Column> c = {{"architecture", "", ColumnKind::Text},
                                              {"quantity", "", ColumnKind::Text},
                                              {"initial", ""},
                                              {"optimized", ""}};
        return c;
    }
    [[nodiscard]] std::vector<Cell> to_cells() const { return {architecture, quantity, initial, optimized}; }
    static OptimizeRow from_cells(const std::vector<Cell>& c) {
        return {text(c[0]), text(c[1]), number(c[2]), number(c[3])};
    }
    friend bool operator==(const OptimizeRow&, const OptimizeRow&) = default;
};

// ---------------------------------------------------------------------------
// Comparison suite

inline constexpr double kDivergenceBound = 1e6;

struct LoopRun {
    std::vector<ComparisonRecord> records;
    bool diverged = false;
};

/// Closed loop on the yaw plant 1/(eta s^2) with no rotor drag. The
/// controller samples at dt and holds its output over the step.
inline LoopRun simulate_loop(Architecture arch, const PidGains& single, const CascadedGains& cascaded,
                             double eta_plant, double setpoint, double dist_magnitude,
                             double dist_time, double dt, double duration,
                             const std::string& variant) {
    VehicleParams plant;
    plant.i_body = eta_plant;
    plant.validate();
    const auto profile = RotorProfile::constant_speed(0.0);
    const auto n = static_cast<std::size_t>(std::llround(duration / dt));
    LoopRun run;
    run.records.reserve(n + 1);
    ControllerState st;
    VehicleState s;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * dt;
        s.t = t;
        const double u = arch == Architecture::SingleLoop
                             ? single_loop_step(st, single, setpoint, s.alpha_body, dt)
                             : cascaded_step(st, cascaded, setpoint, s.alpha_body, s.omega_body, dt);
        const double d = t >= dist_time ? dist_magnitude : 0.0;
        run.records.push_back({variant, to_string(arch), t, setpoint, s.alpha_body,
                               setpoint - s.alpha_body, u, d});
        if (k == n) break;
        try {
            s = integrate_step(s, plant, profile, ControlInputs{u + d, 0.0}, dt);
        } catch (const InvalidState&) {
            run.diverged = true;
            break;
        }
        if (std::abs(s.alpha_body) > kDivergenceBound || std::abs(s.omega_body) > kDivergenceBound) {
            run.diverged = true;
            break;
        }
    }
    return run;
}

struct ComparisonResult {
    std::vector<ComparisonRecord> step;          ///< nominal plant, reference step
    std::vector<ComparisonRecord> model_error;   ///< eta scaled low and high
    std::vector<ComparisonRecord> disturbance;   ///< zero reference, input step load
    std::vector<ComparisonRecord> effort;        ///< control effort of the step runs
    bool diverged = false;
    std::string diagnostic;

    /// Records of one variant and architecture, in time order.
    [[nodiscard]] std::vector<ComparisonRecord> select(const std::vector<ComparisonRecord>& panel,
                                                       const std::string& variant,
                                                       Architecture arch) const {
        std::vector<ComparisonRecord> out;
        for (const auto& r : panel) {
            if (r.variant == variant && r.architecture == to_string(arch)) out.push_back(r);
        }
        return out;
    }
};

inline ComparisonResult run_comparison(const ScenarioSpec& spec) {
    spec.validate();
    const auto& c = spec.comparison;
    const double eta = spec.vehicle.eta_yaw();
    ComparisonResult res;
    auto append = [&](std::vector<ComparisonRecord>& panel, const LoopRun& run, const char* label) {
        panel.insert(panel.end(), run.records.begin(), run.records.end());
        if (run.diverged && !res.diverged) {
            res.diverged = true;
            res.diagnostic = std::string("divergence in ") + label + " run";
        }
    };
    for (Architecture arch : {Architecture::SingleLoop, Architecture::Cascaded}) {
        auto sim = [&](double eta_plant, double sp, double dist, const std::string& variant) {
            return simulate_loop(arch, spec.single_loop, spec.cascaded, eta_plant, sp, dist,
                                 c.disturbance_time, c.dt, c.duration, variant);
        };
        const auto step = sim(eta, c.step, 0.0, "step");
        append(res.step, step, "step");
        auto effort = step;
        for (auto& r : effort.records) r.variant = "effort";
        append(res.effort, effort, "effort");
        append(res.model_error, sim(eta * (1.0 - c.model_error), c.step, 0.0, "model_error_low"),
               "model_error_low");
        append(res.model_error, sim(eta * (1.0 + c.model_error), c.step, 0.0, "model_error_high"),
               "model_error_high");
        append(res.disturbance, sim(eta, 0.0, c.disturbance, "disturbance"), "disturbance");
    }
    return res;
}

// ---------------------------------------------------------------------------
// Mission simulation

struct SimTrace {
    std::vector<MissionRecord> records;
    std::vector<FsmTransition> transitions;
    bool diverged = false;
    std::string diagnostic;
};

namespace detail {

/// Yaw and altitude controllers for one controller mode.
struct ModeControllers {
    std::optional<LoopController> yaw;
    std::optional<LoopController> altitude;
};

inline ModeControllers controllers_for(ControllerMode mode, const GainPreset& g) {
    ModeControllers c;
    switch (mode) {
        case ControllerMode::None:
            break;
        case ControllerMode::MC:
        case ControllerMode::HybridMCFWC:
            c.yaw.emplace(g.cascade("mc.yaw", "mc.yaw_rate"));
            c.altitude.emplace(g.cascade("mc.z_position", "mc.z_velocity"));
            break;
        case ControllerMode::FWC:
            c.yaw.emplace(g.cascade("fwc.yaw", "fwc.yaw_rate"));
            c.altitude.emplace(g.cascade("mc.z_position", "mc.z_velocity"));
            break;
    }
    return c;
}

}  // namespace detail

/// Closed-loop mission. The vehicle rests on the ground (body pinned) until
/// it first enters VTOL, where it holds the take-off pose raised by
/// hover_altitude. Yaw input tau_u = d_yaw + c_yaw; altitude input
/// f_u = d_alt - c_alt, since positive z points down. Controllers reset on
/// every mode change. Kill zeroes both inputs.
inline SimTrace run_mission(const ScenarioSpec& spec) {
    spec.validate();
    if (spec.mission.empty()) throw ConfigError("mission simulation needs a mission script");
    const VehicleParams& p = spec.vehicle;
    ReconfigurationModel rm(spec.rotor);
    SimTrace trace;
    const auto n = static_cast<std::size_t>(std::llround(spec.duration / spec.dt));
    trace.records.reserve(n + 1);

    FlightState fs = FlightState::Disarmed;
    bool grounded = true;
    ControllerMode active = ControllerMode::None;
    detail::ModeControllers ctl;
    double yaw_sp = 0.0, z_sp = 0.0;
    VehicleState s;

    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * spec.dt;
        s.t = t;
        const PilotInputs in = spec.mission.inputs_at(t);
        const GuardSignals g = rm.observe(t, spec.mission.vehicle_speed_at(t));
        const StepResult res = step(fs, in, g, spec.thresholds);
        if (res.next != fs) {
            trace.transitions.push_back({t, fs, res.next});
            if (res.next == FlightState::VTOL && grounded) {
                grounded = false;
                yaw_sp = s.alpha_body;
                z_sp = s.z - spec.hover_altitude;
            }
            if (res.next == FlightState::Disarmed) grounded = true;
            fs = res.next;
        }
        rm.command(t, res.commands);

        const ControllerMode mode = grounded ? ControllerMode::None : res.commands.controller_mode;
        if (mode != active) {
            ctl = detail::controllers_for(mode, spec.flight_gains);
            active = mode;
        }

        const RotorProfile& profile = rm.rotor_profile();
        s.omega_rotor = profile.speed(t);
        const double rotor_accel = profile.acceleration(t);
        FeedforwardTerms ff{0.0, 0.0};
        if (spec.feedforward) ff = feedforward(p, s.omega_rotor, rotor_accel);

        double tau = 0.0, force = 0.0;
        if (mode != ControllerMode::None) {
            tau = ff.d_yaw + ctl.yaw->update(yaw_sp, s.alpha_body, s.omega_body, spec.dt);
            force = ff.d_alt - ctl.altitude->update(z_sp, s.z, s.v_z, spec.dt);
        }
        double dist_yaw = 0.0, dist_alt = 0.0;
        for (const auto& d : spec.disturbances) {
            if (t >= d.t) (d.channel == Channel::Yaw ? dist_yaw : dist_alt) += d.magnitude;
        }

        const auto& cfg = rm.configuration();
        MissionRecord r;
        r.t = t;
        r.state = to_string(fs);
        r.controller_mode = to_string(mode);
        r.rotor_command = to_string(res.commands.rotor);
        r.wing = to_string(cfg.wing);
        r.cop = to_string(cfg.cop);
        r.counterbalance = to_string(cfg.counterbalance);
        r.latch = rm.latch_engaged() ? 1.0 : 0.0;
        r.alpha_body = s.alpha_body;
        r.omega_body = s.omega_body;
        r.z = s.z;
        r.v_z = s.v_z;
        r.alpha_rotor = s.alpha_rotor;
        r.omega_rotor = s.omega_rotor;
        r.rotor_accel = rotor_accel;
        r.yaw_setpoint = yaw_sp;
        r.z_setpoint = z_sp;
        r.yaw_error = yaw_sp - s.alpha_body;
        r.z_error = z_sp - s.z;
        r.tau_u = tau;
        r.f_u = force;
        r.d_yaw = ff.d_yaw;
        r.d_alt = ff.d_alt;
        r.dist_yaw = dist_yaw;
        r.dist_alt = dist_alt;
        trace.records.push_back(std::move(r));

        rm.advance(t, spec.dt);
        if (k == n) break;

        VehicleState next;
        try {
            next = integrate_step(s, p, profile, ControlInputs{tau + dist_yaw, force + dist_alt}, spec.dt);
        } catch (const InvalidState& e) {
            trace.diverged = true;
            trace.diagnostic = std::string("state diverged at t=") + format_double(t) + ": " + e.what();
            break;
        }
        if (grounded) {
            next.alpha_body = s.alpha_body;
            next.omega_body = 0.0;
            next.z = s.z;
            next.v_z = 0.0;
        }
        if (std::abs(next.alpha_body) > kDivergenceBound || std::abs(next.omega_body) > kDivergenceBound ||
            std::abs(next.z) > kDivergenceBound || std::abs(next.v_z) > kDivergenceBound) {
            trace.diverged = true;
            trace.diagnostic = "state left the divergence bound at t=" + format_double(t + spec.dt);
            break;
        }
        s = next;
    }
    return trace;
}

/// Pure state-machine replay with the kinematic guard model.
inline FsmTrace run_fsm_trace(const ScenarioSpec& spec) {
    spec.validate();
    if (spec.mission.empty()) throw ConfigError("state-machine replay needs a mission script");
    ReconfigurationModel rm(spec.rotor);
    return mission_trace(spec.mission, rm, spec.duration, spec.dt, spec.thresholds);
}

inline std::vector<FsmRow> fsm_rows(const FsmTrace& trace) {
    std::vector<FsmRow> rows;
    rows.reserve(trace.records.size());
    for (const auto& r : trace.records) rows.push_back(FsmRow::from_record(r));
    return rows;
}

// ---------------------------------------------------------------------------
// Sweeps and optimisation

inline SweepGrid run_sweep(const ScenarioSpec& spec) {
    spec.validate();
    return sweep(PlantEta(spec.sweep_eta.value_or(spec.vehicle.eta_yaw())), spec.sweep);
}

inline std::vector<SweepRow> sweep_rows(const SweepGrid& grid) {
    std::vector<SweepRow> rows;
    rows.reserve(grid.cells.size());
    for (std::size_t r = 0; r < grid.spec.y.n; ++r) {
        for (std::size_t c = 0; c < grid.spec.x.n; ++c) {
            const auto& v = grid.at(r, c);
            rows.push_back({static_cast<double>(r), static_cast<double>(c), grid.spec.x.value(c),
                            grid.spec.y.value(r), v.stable ? 1.0 : 0.0, v.margin});
        }
    }
    return rows;
}

inline std::vector<std::string> sweep_comments(const SweepGrid& grid) {
    auto axis = [](const char* label, const SweepAxis& a) {
        return std::string(label) + " = " + a.gain + ", " + (a.log_scale ? "log" : "linear") + " [" +
               format_double(a.lo) + ", " + format_double(a.hi) + "], n = " + std::to_string(a.n);
    };
    const auto& f = grid.spec.fixed;
    return {"cascaded stability map, plant eta = " + format_double(grid.eta),
            axis("gain1 (col)", grid.spec.x), axis("gain2 (row)", grid.spec.y),
            "fixed kp1=" + format_double(f.outer.kp) + " ki1=" + format_double(f.outer.ki) +
                " kp2=" + format_double(f.inner.kp) + " ki2=" + format_double(f.inner.ki) +
                " kd2=" + format_double(f.inner.kd),
            "stable: 1 if every closed-loop pole is in the open left half-plane"};
}

inline OptProblem optimization_problem(const ScenarioSpec& spec, Architecture arch) {
    OptProblem p;
    p.architecture = arch;
    p.eta = spec.vehicle.eta_yaw();
    p.lambda = spec.optimize.lambda;
    p.horizon = spec.optimize.horizon;
    p.dt = spec.optimize.dt;
    p.restarts = spec.optimize.restarts;
    p.max_evaluations = spec.optimize.max_evaluations;
    p.seed = spec.seed;
    p.initial = arch == Architecture::SingleLoop ? gain_vector(spec.single_loop) : gain_vector(spec.cascaded);
    return p;
}

struct OptimizationRun {
    OptResult single_loop;
    OptResult cascaded;
};

inline OptimizationRun run_optimize(const ScenarioSpec& spec) {
    spec.validate();
    return {optimize(optimization_problem(spec, Architecture::SingleLoop)),
            optimize(optimization_problem(spec, Architecture::Cascaded))};
}

inline std::vector<OptimizeRow> optimize_rows(const ScenarioSpec& spec, const OptimizationRun& run) {
    std::vector<OptimizeRow> rows;
    auto add = [&](Architecture arch, const OptResult& r, std::vector<const char*> names) {
        const auto init = arch == Architecture::SingleLoop ? gain_vector(spec.single_loop)
                                                           : gain_vector(spec.cascaded);
        for (std::size_t i = 0; i < names.size(); ++i) {
            rows.push_back({to_string(arch), names[i], init[i], r.gains[i]});
        }
        rows.push_back({to_string(arch), "J", r.initial_cost, r.cost});
    };
    add(Architecture::SingleLoop, run.single_loop, {"kp", "ki", "kd"});
    add(Architecture::Cascaded, run.cascaded, {"kp1", "ki1", "kp2", "ki2", "kd2"});
    return rows;
}

/// Gains with the optimiser applied when the scenario asks for it.
inline ScenarioSpec with_resolved_gains(ScenarioSpec spec) {
    if (spec.gain_source.kind != GainSourceKind::Optimizer) return spec;
    const auto run = run_optimize(spec);
    spec.single_loop = single_gains_from(run.single_loop.gains);
    spec.cascaded = cascaded_gains_from(run.cascaded.gains);
    return spec;
}

}  // namespace spero
