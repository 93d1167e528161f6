// Discrete PID building blocks: single-loop PID on position error and a
// cascaded PI (position) -> PID (rate) pair.
//
// Discrete form, per sample k:
//   I_k = clamp(I_{k-1} + ki * e_k * dt, windup)
//   u_k = clamp(kp * e_k + I_k + kd * (e_k - e_{k-1}) / dt, output)
// with e_{-1} = 0, so a fresh controller sees the full derivative kick of a
// step, as the continuous kd*s term does.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "spero/errors.hpp"

namespace spero {

struct Limits {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double clamp(double v) const { return std::clamp(v, lo, hi); }
    friend bool operator==(const Limits&, const Limits&) = default;
};

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    std::optional<Limits> output_limits;
    std::optional<Limits> windup_limits;

    void validate() const {
        for (double g : {kp, ki, kd}) {
            if (!std::isfinite(g) || g < 0.0) {
                throw ConfigError("PID gains must be finite and non-negative");
            }
        }
        for (const auto& lim : {output_limits, windup_limits}) {
            if (lim && !(lim->lo < lim->hi)) {
                throw ConfigError("limit range requires lo < hi");
            }
        }
    }

    friend bool operator==(const PidGains&, const PidGains&) = default;
};

/// Outer PI on position, inner PID on rate. The outer loop carries no
/// derivative term.
struct CascadedGains {
    PidGains outer;
    PidGains inner;

    static CascadedGains from_values(double kp1, double ki1, double kp2, double ki2, double kd2) {
        CascadedGains g;
        g.outer.kp = kp1;
        g.outer.ki = ki1;
        g.inner.kp = kp2;
        g.inner.ki = ki2;
        g.inner.kd = kd2;
        return g;
    }

    void validate() const {
        outer.validate();
        inner.validate();
        if (outer.kd != 0.0) {
            throw ConfigError("outer loop of a cascaded controller must have kd = 0");
        }
    }

    friend bool operator==(const CascadedGains&, const CascadedGains&) = default;
};

enum class Architecture { SingleLoop, Cascaded };

inline const char* to_string(Architecture a) {
    return a == Architecture::SingleLoop ? "single_loop" : "cascaded";
}

/// Gains from the 1 s IAE + effort tuning run on the yaw plant.
inline PidGains tuned_single_loop_gains() {
    PidGains g;
    g.kp = 0.004;
    g.ki = 0.010;
    g.kd = 0.561;
    return g;
}

inline CascadedGains tuned_cascaded_gains() {
    return CascadedGains::from_values(13.100, 0.002, 13.600, 0.036, 1.370e-5);
}

struct PidState {
    double integral = 0.0;  ///< integral term ki * sum(e dt), after windup clamp
    double prev_error = 0.0;
    double last_output = 0.0;

    friend bool operator==(const PidState&, const PidState&) = default;
};

/// Accumulators for either architecture. Single-loop uses `outer` only.
struct ControllerState {
    PidState outer;
    PidState inner;

    friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

inline double pid_update(PidState& st, const PidGains& g, double error, double dt) {
    if (!(dt > 0.0)) {
        throw ConfigError("controller step requires dt > 0");
    }
    double integral = st.integral + g.ki * error * dt;
    if (g.windup_limits) {
        integral = g.windup_limits->clamp(integral);
    }
    double u = g.kp * error + integral + g.kd * (error - st.prev_error) / dt;
    if (g.output_limits) {
        u = g.output_limits->clamp(u);
    }
    st.integral = integral;
    st.prev_error = error;
    st.last_output = u;
    return u;
}

inline double single_loop_step(ControllerState& st, const PidGains& g, double setpoint,
                               double measurement, double dt) {
    return pid_update(st.outer, g, setpoint - measurement, dt);
}

inline double cascaded_step(ControllerState& st, const CascadedGains& g, double position_setpoint,
                            double position, double rate, double dt) {
    const double rate_setpoint = pid_update(st.outer, g.outer, position_setpoint - position, dt);
    return pid_update(st.inner, g.inner, rate_setpoint - rate, dt);
}

[[nodiscard]] inline ControllerState reset(const ControllerState&) { return {}; }

/// Owns gains and state for one loop of either architecture.
class LoopController {
public:
    explicit LoopController(PidGains single)
        : arch_(Architecture::SingleLoop), single_(std::move(single)) {
        single_.validate();
    }
    explicit LoopController(CascadedGains cascaded)
        : arch_(Architecture::Cascaded), cascaded_(std::move(cascaded)) {
        cascaded_.validate();
    }

    double update(double setpoint, double position, double rate, double dt) {
        return arch_ == Architecture::SingleLoop
                   ? single_loop_step(state_, single_, setpoint, position, dt)
                   : cascaded_step(state_, cascaded_, setpoint, position, rate, dt);
    }

    void reset() { state_ = spero::reset(state_); }

    [[nodiscard]] Architecture architecture() const { return arch_; }
    [[nodiscard]] const ControllerState& state() const { return state_; }

private:
    Architecture arch_;
    PidGains single_;
    CascadedGains cascaded_;
    ControllerState state_;
};

}  // namespace spero
