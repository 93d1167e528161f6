// Flight-controller gain tables (multicopter and fixed-wing loops).
#pragma once

#include <map>
#include <optional>
#include <string>

#include "spero/controllers.hpp"
#include "spero/errors.hpp"

namespace spero {

struct GainPreset {
    std::string name;
    std::map<std::string, PidGains> loops;

    [[nodiscard]] const PidGains& at(const std::string& loop) const {
        auto it = loops.find(loop);
        if (it == loops.end()) {
            throw ConfigError("gain preset '" + name + "' has no loop '" + loop + "'");
        }
        return it->second;
    }

    /// Attitude/position loop feeding its rate/velocity loop.
    [[nodiscard]] CascadedGains cascade(const std::string& outer, const std::string& inner) const {
        return {at(outer), at(inner)};
    }
};

namespace detail {
inline PidGains gains(double kp, double ki, double kd, std::optional<Limits> sat,
                      std::optional<Limits> windup) {
    PidGains g;
    g.kp = kp;
    g.ki = ki;
    g.kd = kd;
    g.output_limits = sat;
    g.windup_limits = windup;
    return g;
}
}  // namespace detail

/// Gains flown on the vehicle. Loops without saturation or windup ranges
/// carry no clamp. The fixed-wing energy loops have no plant in the
/// yaw/altitude model and are stored for completeness only.
inline GainPreset flight_gain_preset() {
    using detail::gains;
    using L = Limits;
    const auto none = std::nullopt;
    GainPreset p;
    p.name = "flight";
    p.loops = {
        {"mc.roll", gains(6.500, 0.000, 0.000, L{-3.840, 3.840}, none)},
        {"mc.roll_rate", gains(0.150, 0.200, 0.003, L{-1.000, 1.000}, L{-0.300, 0.300})},
        {"mc.pitch", gains(6.500, 0.000, 0.000, L{-3.840, 3.840}, none)},
        {"mc.pitch_rate", gains(0.150, 0.200, 0.003, L{-1.000, 1.000}, L{-0.300, 0.300})},
        {"mc.yaw", gains(2.800, 0.000, 0.000, L{-3.840, 3.840}, none)},
        {"mc.yaw_rate", gains(0.200, 0.100, 0.000, L{-1.000, 1.000}, L{-0.300, 0.300})},
        {"mc.xy_position", gains(0.950, 0.000, 0.000, none, none)},
        {"mc.xy_velocity", gains(1.800, 0.400, 0.200, L{-12.000, 12.000}, none)},
        {"mc.z_position", gains(1.000, 0.000, 0.000, L{-1.500, 3.000}, none)},
        {"mc.z_velocity", gains(4.000, 2.000, 0.000, none, none)},
        {"fwc.roll", gains(2.500, 0.000, 0.000, L{-1.221, 1.221}, none)},
        {"fwc.roll_rate", gains(0.050, 0.100, 0.000, none, L{-0.200, 0.200})},
        {"fwc.pitch", gains(2.500, 0.000, 0.000, L{-1.047, 1.047}, none)},
        {"fwc.pitch_rate", gains(0.080, 0.100, 0.000, none, L{-0.400, 0.400})},
        {"fwc.yaw", gains(2.500, 0.000, 0.000, L{-0.873, 0.873}, none)},
        {"fwc.yaw_rate", gains(0.050, 0.100, 0.000, none, L{-0.200, 0.200})},
        {"fwc.energy_rate", gains(0.050, 0.020, 0.000, none, none)},
        {"fwc.energy_balance", gains(0.100, 0.100, 0.000, none, none)},
    };
    return p;
}

inline std::optional<GainPreset> builtin_preset(const std::string& name) {
    if (name == "flight") {
        return flight_gain_preset();
    }
    return std::nullopt;
}

}  // namespace spero
