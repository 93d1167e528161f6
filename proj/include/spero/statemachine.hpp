// Eleven-state flight-mode machine with guarded transitions. Each state maps
// to actuator commands over the discrete configuration lattice.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spero/errors.hpp"

namespace spero {

enum class FlightState {
    Disarmed,
    Armed,
    RotorSpinUp,
    VTOL,
    DecelerationPreparation,
    RotorDeceleration,
    ForwardFlightInitiation,
    ForwardFlight,
    VTOLInitiation,
    RotorAcceleration,
    Kill,
};

inline constexpr std::array<FlightState, 11> kAllFlightStates = {
    FlightState::Disarmed,
    FlightState::Armed,
    FlightState::RotorSpinUp,
    FlightState::VTOL,
    FlightState::DecelerationPreparation,
    FlightState::RotorDeceleration,
    FlightState::ForwardFlightInitiation,
    FlightState::ForwardFlight,
    FlightState::VTOLInitiation,
    FlightState::RotorAcceleration,
    FlightState::Kill,
};

inline const char* to_string(FlightState s) {
    switch (s) {
        case FlightState::Disarmed: return "Disarmed";
        case FlightState::Armed: return "Armed";
        case FlightState::RotorSpinUp: return "RotorSpinUp";
        case FlightState::VTOL: return "VTOL";
        case FlightState::DecelerationPreparation: return "DecelerationPreparation";
        case FlightState::RotorDeceleration: return "RotorDeceleration";
        case FlightState::ForwardFlightInitiation: return "ForwardFlightInitiation";
        case FlightState::ForwardFlight: return "ForwardFlight";
        case FlightState::VTOLInitiation: return "VTOLInitiation";
        case FlightState::RotorAcceleration: return "RotorAcceleration";
        case FlightState::Kill: return "Kill";
    }
    return "?";
}

inline FlightState flight_state_from_string(std::string_view name) {
    for (FlightState s : kAllFlightStates) {
        if (name == to_string(s)) return s;
    }
    throw ConfigError("unknown flight state '" + std::string(name) + "'");
}

enum class StateCommand { Null = 0, VTOL = 1, ForwardFlight = 2 };

struct PilotInputs {
    bool kill = false;
    bool arm = false;
    StateCommand command = StateCommand::Null;

    friend bool operator==(const PilotInputs&, const PilotInputs&) = default;
};

/// Measured quantities the guards look at. Magnitudes are non-negative.
struct GuardSignals {
    double rotor_speed = 0.0;                    ///< [rad/s]
    double rotor_speed_setpoint = 0.0;           ///< [rad/s]
    double counterbalance_reorient_error = 0.0;  ///< remaining CB travel [rad]
    double vehicle_speed = 0.0;                  ///< [m/s]
    double rotor_accel = 0.0;                    ///< [rad/s^2]
    /// Wing flip and CoP shift have reached their commanded positions.
    bool reconfiguration_complete = true;
};

/// "X = 0" conditions are read as |tracking error| below these bands.
struct GuardThresholds {
    double rotor_speed = 0.5;       ///< [rad/s]
    double counterbalance = 0.05;   ///< [rad]
    double vehicle_speed = 10.0;    ///< forward-flight exit gate [m/s]

    void validate() const {
        if (!(rotor_speed > 0.0) || !(counterbalance > 0.0) || !(vehicle_speed > 0.0)) {
            throw ConfigError("guard thresholds must be positive");
        }
    }
};

enum class GuardCondition {
    RotorSpeedSettled,           ///< "Rotor Speed = 0": |speed - setpoint| small
    CounterbalanceSettled,       ///< "Counterbalance Speed = 0"
    VehicleSpeedLow,             ///< "Vehicle Speed = 0": below the exit gate
    RotorAccelerationComplete,   ///< "Rotor Acceleration = 0": reached setpoint speed
};

inline bool guard_satisfied(GuardCondition c, const GuardSignals& s, const GuardThresholds& th) {
    switch (c) {
        case GuardCondition::RotorSpeedSettled:
        case GuardCondition::RotorAccelerationComplete:
            return std::abs(s.rotor_speed - s.rotor_speed_setpoint) < th.rotor_speed;
        case GuardCondition::CounterbalanceSettled:
            return std::abs(s.counterbalance_reorient_error) < th.counterbalance &&
                   s.reconfiguration_complete;
        case GuardCondition::VehicleSpeedLow:
            return std::abs(s.vehicle_speed) < th.vehicle_speed;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Transition table

struct TransitionRow {
    FlightState from;
    bool arm;
    StateCommand command;
    std::optional<GuardCondition> guard;
    FlightState to;
};

/// Rows with kill = 0. Kill = 1 from any state leads to Kill.
inline constexpr std::array<TransitionRow, 12> kTransitionTable = {{
    {FlightState::Disarmed, true, StateCommand::Null, std::nullopt, FlightState::Armed},
    {FlightState::Armed, false, StateCommand::Null, std::nullopt, FlightState::Disarmed},
    {FlightState::Armed, true, StateCommand::VTOL, std::nullopt, FlightState::RotorSpinUp},
    {FlightState::RotorSpinUp, true, StateCommand::VTOL, GuardCondition::RotorSpeedSettled,
     FlightState::VTOL},
    {FlightState::VTOL, true, StateCommand::ForwardFlight, std::nullopt,
     FlightState::DecelerationPreparation},
    {FlightState::DecelerationPreparation, true, StateCommand::ForwardFlight,
     GuardCondition::CounterbalanceSettled, FlightState::RotorDeceleration},
    {FlightState::RotorDeceleration, true, StateCommand::ForwardFlight,
     GuardCondition::RotorSpeedSettled, FlightState::ForwardFlightInitiation},
    {FlightState::ForwardFlightInitiation, true, StateCommand::ForwardFlight,
     GuardCondition::CounterbalanceSettled, FlightState::ForwardFlight},
    {FlightState::ForwardFlight, true, StateCommand::ForwardFlight, GuardCondition::VehicleSpeedLow,
     FlightState::VTOLInitiation},
    {FlightState::VTOLInitiation, true, StateCommand::VTOL, GuardCondition::CounterbalanceSettled,
     FlightState::RotorAcceleration},
    {FlightState::RotorAcceleration, true, StateCommand::VTOL,
     GuardCondition::RotorAccelerationComplete, FlightState::VTOL},
    {FlightState::Kill, true, StateCommand::Null, std::nullopt, FlightState::Disarmed},
}};

/// Next state for one evaluation; unmatched inputs hold the current state.
inline FlightState next_state(FlightState current, const PilotInputs& in, const GuardSignals& g,
                              const GuardThresholds& th = {}) {
    if (in.kill) return FlightState::Kill;
    for (const auto& row : kTransitionTable) {
        if (row.from != current || row.arm != in.arm || row.command != in.command) continue;
        if (row.guard && !guard_satisfied(*row.guard, g, th)) continue;
        return row.to;
    }
    return current;
}

// ---------------------------------------------------------------------------
// Configuration lattice

enum class WingDirection { Opposite, Same };
enum class CopPosition { Forward, Aft };
enum class CounterbalanceOrientation { MinusZOpposite, PlusZOpposite, Forward };

inline const char* to_string(WingDirection w) {
    return w == WingDirection::Opposite ? "Opposite" : "Same";
}
inline const char* to_string(CopPosition c) { return c == CopPosition::Forward ? "Forward" : "Aft"; }
inline const char* to_string(CounterbalanceOrientation c) {
    switch (c) {
        case CounterbalanceOrientation::MinusZOpposite: return "MinusZOpposite";
        case CounterbalanceOrientation::PlusZOpposite: return "PlusZOpposite";
        case CounterbalanceOrientation::Forward: return "Forward";
    }
    return "?";
}

struct ConfigurationState {
    WingDirection wing = WingDirection::Opposite;
    CopPosition cop = CopPosition::Forward;
    CounterbalanceOrientation counterbalance = CounterbalanceOrientation::MinusZOpposite;

    static ConfigurationState vtol() { return {}; }
    static ConfigurationState forward_flight() {
        return {WingDirection::Same, CopPosition::Aft, CounterbalanceOrientation::Forward};
    }

    friend bool operator==(const ConfigurationState&, const ConfigurationState&) = default;
};

/// Lattice moves. R1: -z -> +z (reverse CB torque before the rotor slows),
/// R2: +z -> forward (thrust for cruise), R3: forward -> -z (back to VTOL).
enum class ConfigurationCommand { FlipToSame, FlipToOpposite, ShiftForward, ShiftAft, R1, R2, R3 };

inline const char* to_string(ConfigurationCommand c) {
    switch (c) {
        case ConfigurationCommand::FlipToSame: return "FlipToSame";
        case ConfigurationCommand::FlipToOpposite: return "FlipToOpposite";
        case ConfigurationCommand::ShiftForward: return "ShiftForward";
        case ConfigurationCommand::ShiftAft: return "ShiftAft";
        case ConfigurationCommand::R1: return "R1";
        case ConfigurationCommand::R2: return "R2";
        case ConfigurationCommand::R3: return "R3";
    }
    return "?";
}

struct ConfigurationResult {
    ConfigurationState state;
    bool accepted = true;
    std::string diagnostic;
};

/// Moves one lattice axis. Wing and CoP re-commands are accepted no-ops;
/// counterbalance moves are directed edges and are rejected from any
/// other orientation.
inline ConfigurationResult configuration_transition(const ConfigurationState& cur,
                                                     ConfigurationCommand cmd) {
    using CB = CounterbalanceOrientation;
    ConfigurationResult res{cur, true, {}};
    auto edge = [&](CB from, CB to) {
        if (cur.counterbalance != from) {
            res.accepted = false;
            res.diagnostic = std::string(to_string(cmd)) + " requires counterbalances at " +
                             to_string(from) + ", found " + to_string(cur.counterbalance);
        } else {
            res.state.counterbalance = to;
        }
    };
    switch (cmd) {
        case ConfigurationCommand::FlipToSame: res.state.wing = WingDirection::Same; break;
        case ConfigurationCommand::FlipToOpposite: res.state.wing = WingDirection::Opposite; break;
        case ConfigurationCommand::ShiftForward: res.state.cop = CopPosition::Forward; break;
        case ConfigurationCommand::ShiftAft: res.state.cop = CopPosition::Aft; break;
        case ConfigurationCommand::R1: edge(CB::MinusZOpposite, CB::PlusZOpposite); break;
        case ConfigurationCommand::R2: edge(CB::PlusZOpposite, CB::Forward); break;
        case ConfigurationCommand::R3: edge(CB::Forward, CB::MinusZOpposite); break;
    }
    return res;
}

/// The directed R-edge leaving `from` on the way to `to`, if they differ.
inline std::optional<ConfigurationCommand> next_counterbalance_move(CounterbalanceOrientation from,
                                                                    CounterbalanceOrientation to) {
    if (from == to) return std::nullopt;
    switch (from) {
        case CounterbalanceOrientation::MinusZOpposite: return ConfigurationCommand::R1;
        case CounterbalanceOrientation::PlusZOpposite: return ConfigurationCommand::R2;
        case CounterbalanceOrientation::Forward: return ConfigurationCommand::R3;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Actuator commands

enum class ControllerMode { None, MC, FWC, HybridMCFWC };

inline const char* to_string(ControllerMode m) {
    switch (m) {
        case ControllerMode::None: return "None";
        case ControllerMode::MC: return "MC";
        case ControllerMode::FWC: return "FWC";
        case ControllerMode::HybridMCFWC: return "HybridMCFWC";
    }
    return "?";
}

enum class RotorCommand {
    Off,         ///< motors disabled; rotor spins down
    SpinUp,      ///< ramp to nominal speed
    Hold,        ///< keep the current profile
    Decelerate,  ///< constant-rate ramp to a stop
    Stopped,     ///< rotor homed and locked
    Accelerate,  ///< constant-rate ramp back to nominal speed
};

inline const char* to_string(RotorCommand r) {
    switch (r) {
        case RotorCommand::Off: return "Off";
        case RotorCommand::SpinUp: return "SpinUp";
        case RotorCommand::Hold: return "Hold";
        case RotorCommand::Decelerate: return "Decelerate";
        case RotorCommand::Stopped: return "Stopped";
        case RotorCommand::Accelerate: return "Accelerate";
    }
    return "?";
}

/// Geometric targets are empty when a state leaves the servos where they are.
struct ActuatorCommands {
    ControllerMode controller_mode = ControllerMode::None;
    RotorCommand rotor = RotorCommand::Off;
    std::optional<WingDirection> wing;
    std::optional<CopPosition> cop;
    std::optional<CounterbalanceOrientation> counterbalance;
    bool latch_expected = false;  ///< wing latch engaged (wing in the Same layout)

    friend bool operator==(const ActuatorCommands&, const ActuatorCommands&) = default;
};

/// Commands for a state. `vehicle_speed` picks hybrid vs fixed-wing control
/// in forward flight.
inline ActuatorCommands commands_for(FlightState s, double vehicle_speed,
                                     const GuardThresholds& th = {}) {
    using CB = CounterbalanceOrientation;
    ActuatorCommands c;
    auto layout = [&c](WingDirection w, CopPosition p, CB cb) {
        c.wing = w;
        c.cop = p;
        c.counterbalance = cb;
        c.latch_expected = w == WingDirection::Same;
    };
    switch (s) {
        case FlightState::Disarmed:
        case FlightState::Kill:
            break;
        case FlightState::Armed:
            layout(WingDirection::Opposite, CopPosition::Forward, CB::MinusZOpposite);
            break;
        case FlightState::RotorSpinUp:
            c.controller_mode = ControllerMode::MC;
            c.rotor = RotorCommand::SpinUp;
            layout(WingDirection::Opposite, CopPosition::Forward, CB::MinusZOpposite);
            break;
        case FlightState::VTOL:
            c.controller_mode = ControllerMode::MC;
            c.rotor = RotorCommand::Hold;
            layout(WingDirection::Opposite, CopPosition::Forward, CB::MinusZOpposite);
            break;
        case FlightState::DecelerationPreparation:
            c.controller_mode = ControllerMode::MC;
            c.rotor = RotorCommand::Hold;
            layout(WingDirection::Opposite, CopPosition::Forward, CB::PlusZOpposite);
            break;
        case FlightState::RotorDeceleration:
            c.controller_mode = ControllerMode::MC;
            c.rotor = RotorCommand::Decelerate;
            layout(WingDirection::Opposite, CopPosition::Forward, CB::PlusZOpposite);
            break;
        case FlightState::ForwardFlightInitiation:
            c.controller_mode = ControllerMode::MC;
            c.rotor = RotorCommand::Stopped;
            layout(WingDirection::Same, CopPosition::Aft, CB::Forward);
            break;
        case FlightState::ForwardFlight:
            c.controller_mode = std::abs(vehicle_speed) < th.vehicle_speed
                                    ? ControllerMode::HybridMCFWC
                                    : ControllerMode::FWC;
            c.rotor = RotorCommand::Stopped;
            layout(WingDirection::Same, CopPosition::Aft, CB::Forward);
            break;
        case FlightState::VTOLInitiation:
            c.controller_mode = ControllerMode::MC;
            c.rotor = RotorCommand::Stopped;
            layout(WingDirection::Opposite, CopPosition::Forward, CB::MinusZOpposite);
            break;
        case FlightState::RotorAcceleration:
            c.controller_mode = ControllerMode::MC;
            c.rotor = RotorCommand::Accelerate;
            layout(WingDirection::Opposite, CopPosition::Forward, CB::MinusZOpposite);
            break;
    }
    return c;
}

struct StepResult {
    FlightState next;
    ActuatorCommands commands;
};

/// One table evaluation plus the commands of the resulting state.
inline StepResult step(FlightState current, const PilotInputs& in, const GuardSignals& g,
                       const GuardThresholds& th = {}) {
    const FlightState next = next_state(current, in, g, th);
    return {next, commands_for(next, g.vehicle_speed, th)};
}

// ---------------------------------------------------------------------------
// Mission scripts

struct ScriptEntry {
    double t = 0.0;
    PilotInputs inputs;
    std::optional<double> vehicle_speed;  ///< scripted forward speed [m/s]
};

/// Timed pilot inputs, held between entries. Times strictly increase.
class MissionScript {
public:
    MissionScript() = default;
    explicit MissionScript(std::vector<ScriptEntry> entries) : entries_(std::move(entries)) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (!std::isfinite(entries_[i].t) || entries_[i].t < 0.0) {
                throw ConfigError("mission script times must be finite and non-negative");
            }
            if (i > 0 && !(entries_[i].t > entries_[i - 1].t)) {
                throw ConfigError("mission script times must be strictly increasing");
            }
        }
    }

    [[nodiscard]] const std::vector<ScriptEntry>& entries() const { return entries_; }
    [[nodiscard]] bool empty() const { return entries_.empty(); }

    /// Inputs in force at time t (defaults before the first entry).
    [[nodiscard]] PilotInputs inputs_at(double t) const {
        PilotInputs in;
        for (const auto& e : entries_) {
            if (e.t > t) break;
            in = e.inputs;
        }
        return in;
    }

    /// Most recent scripted vehicle speed at time t (0 before any).
    [[nodiscard]] double vehicle_speed_at(double t) const {
        double v = 0.0;
        for (const auto& e : entries_) {
            if (e.t > t) break;
            if (e.vehicle_speed) v = *e.vehicle_speed;
        }
        return v;
    }

private:
    std::vector<ScriptEntry> entries_;
};

}  // namespace spero
