// Kinematic model of the rotor ramps and reconfiguration servos. Actuator
// commands become guard signals; the configuration lattice changes only
// when a servo reaches its end point.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "spero/dynamics.hpp"
#include "spero/errors.hpp"
#include "spero/statemachine.hpp"

namespace spero {

struct ReconfigurationParams {
    double nominal_rotor_speed = 80.0;   ///< hover rotor speed [rad/s]
    double spinup_time = 3.8;            ///< 0 -> nominal on the ground [s]
    double deceleration_time = 4.2;      ///< nominal -> 0, forward transition [s]
    double acceleration_time = 3.8;      ///< 0 -> nominal, backward transition [s]
    double wing_flip_angle = 190.0 * std::numbers::pi / 180.0;  ///< [rad]
    double wing_flip_rate = 190.0 * std::numbers::pi / 180.0;   ///< [rad/s]
    double cop_stroke = 0.05;            ///< [m]
    double cop_rate = 0.05;              ///< [m/s]
    double counterbalance_rate = std::numbers::pi;  ///< [rad/s]

    void validate() const {
        const double v[] = {nominal_rotor_speed, spinup_time,  deceleration_time,
                            acceleration_time,   wing_flip_angle, wing_flip_rate,
                            cop_stroke,          cop_rate,     counterbalance_rate};
        for (double x : v) {
            if (!std::isfinite(x) || x <= 0.0) {
                throw ConfigError("reconfiguration parameters must be finite and positive");
            }
        }
    }

    [[nodiscard]] double deceleration_rate() const { return nominal_rotor_speed / deceleration_time; }
    [[nodiscard]] double acceleration_rate() const { return nominal_rotor_speed / acceleration_time; }
    [[nodiscard]] double spinup_rate() const { return nominal_rotor_speed / spinup_time; }
};

/// Servo angle of each counterbalance orientation [rad].
inline double counterbalance_angle(CounterbalanceOrientation o) {
    switch (o) {
        case CounterbalanceOrientation::MinusZOpposite: return 0.0;
        case CounterbalanceOrientation::Forward: return std::numbers::pi / 2.0;
        case CounterbalanceOrientation::PlusZOpposite: return std::numbers::pi;
    }
    return 0.0;
}

inline CounterbalanceOrientation edge_target(ConfigurationCommand edge) {
    switch (edge) {
        case ConfigurationCommand::R1: return CounterbalanceOrientation::PlusZOpposite;
        case ConfigurationCommand::R2: return CounterbalanceOrientation::Forward;
        default: return CounterbalanceOrientation::MinusZOpposite;
    }
}

class ReconfigurationModel {
public:
    explicit ReconfigurationModel(ReconfigurationParams params = {},
                                  ConfigurationState initial = ConfigurationState::vtol(),
                                  double initial_rotor_speed = 0.0)
        : p_(params), config_(initial) {
        p_.validate();
        profile_ = RotorProfile::constant_speed(initial_rotor_speed);
        wing_angle_ = initial.wing == WingDirection::Same ? p_.wing_flip_angle : 0.0;
        cop_pos_ = initial.cop == CopPosition::Aft ? p_.cop_stroke : 0.0;
        cb_angle_ = counterbalance_angle(initial.counterbalance);
    }

    /// Applies the commands in force from time t.
    void command(double t, const ActuatorCommands& c) {
        if (!last_rotor_ || *last_rotor_ != c.rotor) {
            start_rotor(t, c.rotor);
            last_rotor_ = c.rotor;
        }
        wing_target_ = c.wing;
        cop_target_ = c.cop;
        cb_target_ = c.counterbalance;
    }

    /// Moves servos over [t, t + dt].
    void advance(double /*t*/, double dt) {
        advance_wing(dt);
        advance_cop(dt);
        advance_counterbalance(dt);
    }

    [[nodiscard]] GuardSignals observe(double t, double vehicle_speed) const {
        GuardSignals g;
        g.rotor_speed = profile_.speed(t);
        g.rotor_accel = profile_.acceleration(t);
        g.rotor_speed_setpoint = rotor_setpoint_;
        g.counterbalance_reorient_error = counterbalance_remaining();
        g.vehicle_speed = vehicle_speed;
        g.reconfiguration_complete = wing_settled() && cop_settled();
        return g;
    }

    [[nodiscard]] const RotorProfile& rotor_profile() const { return profile_; }
    [[nodiscard]] const ConfigurationState& configuration() const { return config_; }
    [[nodiscard]] double wing_angle() const { return wing_angle_; }
    [[nodiscard]] double cop_position() const { return cop_pos_; }
    [[nodiscard]] double counterbalance_servo_angle() const { return cb_angle_; }
    [[nodiscard]] bool latch_engaged() const { return config_.wing == WingDirection::Same; }
    [[nodiscard]] const std::vector<std::string>& diagnostics() const { return diagnostics_; }
    [[nodiscard]] const ReconfigurationParams& params() const { return p_; }

private:
    void start_rotor(double t, RotorCommand cmd) {
        const double w = profile_.speed(t);
        switch (cmd) {
            case RotorCommand::SpinUp:
                profile_ = RotorProfile::constant_acceleration(p_.spinup_rate(), w, false, t,
                                                               p_.nominal_rotor_speed);
                rotor_setpoint_ = p_.nominal_rotor_speed;
                break;
            case RotorCommand::Accelerate:
                profile_ = RotorProfile::constant_acceleration(p_.acceleration_rate(), w, false, t,
                                                               p_.nominal_rotor_speed);
                rotor_setpoint_ = p_.nominal_rotor_speed;
                break;
            case RotorCommand::Decelerate:
            case RotorCommand::Off:
                profile_ = w > 0.0 ? RotorProfile::constant_acceleration(-p_.deceleration_rate(), w,
                                                                         true, t)
                                   : RotorProfile::constant_speed(0.0);
                rotor_setpoint_ = 0.0;
                break;
            case RotorCommand::Hold:
                // Keep the running profile; a spin-up still in progress finishes.
                rotor_setpoint_ = profile_.hold_at.value_or(w);
                break;
            case RotorCommand::Stopped:
                rotor_setpoint_ = 0.0;
                break;
        }
    }

    static double approach(double x, double target, double step) {
        return x < target ? std::min(x + step, target) : std::max(x - step, target);
    }

    [[nodiscard]] bool wing_settled() const {
        return !wing_target_ || (config_.wing == *wing_target_ &&
                                 wing_angle_ == (*wing_target_ == WingDirection::Same
                                                     ? p_.wing_flip_angle
                                                     : 0.0));
    }
    [[nodiscard]] bool cop_settled() const {
        return !cop_target_ ||
               (config_.cop == *cop_target_ &&
                cop_pos_ == (*cop_target_ == CopPosition::Aft ? p_.cop_stroke : 0.0));
    }

    void apply(ConfigurationCommand c) {
        auto r = configuration_transition(config_, c);
        if (!r.accepted) {
            diagnostics_.push_back(r.diagnostic);
            return;
        }
        config_ = r.state;
    }

    void advance_wing(double dt) {
        if (!wing_target_) return;
        const bool same = *wing_target_ == WingDirection::Same;
        const double goal = same ? p_.wing_flip_angle : 0.0;
        wing_angle_ = approach(wing_angle_, goal, p_.wing_flip_rate * dt);
        if (wing_angle_ == goal && config_.wing != *wing_target_) {
            apply(same ? ConfigurationCommand::FlipToSame : ConfigurationCommand::FlipToOpposite);
        }
    }

    void advance_cop(double dt) {
        if (!cop_target_) return;
        const bool aft = *cop_target_ == CopPosition::Aft;
        const double goal = aft ? p_.cop_stroke : 0.0;
        cop_pos_ = approach(cop_pos_, goal, p_.cop_rate * dt);
        if (cop_pos_ == goal && config_.cop != *cop_target_) {
            apply(aft ? ConfigurationCommand::ShiftAft : ConfigurationCommand::ShiftForward);
        }
    }

    void advance_counterbalance(double dt) {
        if (!cb_target_) return;
        double budget = p_.counterbalance_rate * dt;
        while (budget > 0.0) {
            if (!cb_edge_) {
                cb_edge_ = next_counterbalance_move(config_.counterbalance, *cb_target_);
                if (!cb_edge_) return;
            }
            const double goal = counterbalance_angle(edge_target(*cb_edge_));
            const double dist = std::abs(goal - cb_angle_);
            if (dist > budget) {
                cb_angle_ = approach(cb_angle_, goal, budget);
                return;
            }
            cb_angle_ = goal;
            budget -= dist;
            apply(*cb_edge_);
            cb_edge_.reset();
        }
    }

    /// Servo travel left along the directed lattice path to the target.
    [[nodiscard]] double counterbalance_remaining() const {
        if (!cb_target_) return 0.0;
        double remaining = 0.0;
        CounterbalanceOrientation node = config_.counterbalance;
        double angle = cb_angle_;
        if (cb_edge_) {
            node = edge_target(*cb_edge_);
            remaining += std::abs(counterbalance_angle(node) - angle);
            angle = counterbalance_angle(node);
        }
        for (int hops = 0; hops < 3; ++hops) {
            auto e = next_counterbalance_move(node, *cb_target_);
            if (!e) break;
            node = edge_target(*e);
            remaining += std::abs(counterbalance_angle(node) - angle);
            angle = counterbalance_angle(node);
        }
        return remaining;
    }

    ReconfigurationParams p_;
    ConfigurationState config_;
    RotorProfile profile_;
    std::optional<RotorCommand> last_rotor_;
    double rotor_setpoint_ = 0.0;
    double wing_angle_ = 0.0;
    double cop_pos_ = 0.0;
    double cb_angle_ = 0.0;
    std::optional<WingDirection> wing_target_;
    std::optional<CopPosition> cop_target_;
    std::optional<CounterbalanceOrientation> cb_target_;
    std::optional<ConfigurationCommand> cb_edge_;
    std::vector<std::string> diagnostics_;
};

// ---------------------------------------------------------------------------
// State-machine replay

struct FsmRecord {
    double t = 0.0;
    FlightState state = FlightState::Disarmed;
    PilotInputs inputs;
    ConfigurationState configuration;
    ActuatorCommands commands;
    GuardSignals guards;
};

struct FsmTransition {
    double t = 0.0;
    FlightState from;
    FlightState to;
};

struct FsmTrace {
    std::vector<FsmRecord> records;
    std::vector<FsmTransition> transitions;

    /// States in visit order, starting with the initial state.
    [[nodiscard]] std::vector<FlightState> visited() const {
        std::vector<FlightState> out;
        if (!records.empty()) out.push_back(records.front().state);
        for (const auto& tr : transitions) out.push_back(tr.to);
        return out;
    }
};

/// Replays a mission script against a guard source (the reconfiguration
/// model) on a fixed time grid t_k = k dt, k = 0..round(duration / dt).
inline FsmTrace mission_trace(const MissionScript& script, ReconfigurationModel& guards_source,
                              double duration, double dt, const GuardThresholds& th = {},
                              FlightState initial = FlightState::Disarmed) {
    if (!(dt > 0.0) || !(duration > 0.0)) {
        throw ConfigError("mission replay needs dt > 0 and duration > 0");
    }
    th.validate();
    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    FsmTrace trace;
    trace.records.reserve(steps + 1);
    FlightState state = initial;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const PilotInputs in = script.inputs_at(t);
        const GuardSignals g = guards_source.observe(t, script.vehicle_speed_at(t));
        const StepResult res = step(state, in, g, th);
        if (res.next != state) {
            trace.transitions.push_back({t, state, res.next});
            state = res.next;
        }
        guards_source.command(t, res.commands);
        trace.records.push_back({t, state, in, guards_source.configuration(), res.commands, g});
        guards_source.advance(t, dt);
    }
    return trace;
}

}  // namespace spero
