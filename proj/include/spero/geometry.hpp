// Center-of-gravity shift from the moving rail and wing masses, and the
// resulting CoP-to-CG offset in the forward-flight layout.
#pragma once

#include <cmath>

#include "spero/errors.hpp"

namespace spero {

struct MassLayout {
    double m = 2.7;              ///< total mass [kg]
    double m_wing = 0.34;        ///< both wings [kg]
    double m_rail = 0.51;        ///< rail carriage assembly [kg]
    double r_rail = 0.05;        ///< rail assembly CG offset from body CG [m]
    double r_wing = 0.08;        ///< wing CG offset from body CG [m]
    double servo_stroke = 0.05;  ///< linear CoP servo stroke [m]

    /// Forward-flight layout: rail at full stroke, wing flipped.
    static MassLayout forward_flight() { return {}; }

    /// VTOL layout: rail and wings on the rotation axis.
    static MassLayout vtol() {
        MassLayout l;
        l.r_rail = 0.0;
        l.r_wing = 0.0;
        return l;
    }

    void validate() const {
        if (!(m > 0.0) || !(m_wing > 0.0) || !(m_rail > 0.0)) {
            throw ConfigError("masses must be positive");
        }
        if (!(m_wing + m_rail < m)) {
            throw ConfigError("moving masses must be smaller than the total mass");
        }
        if (!std::isfinite(r_rail) || !std::isfinite(r_wing) || !std::isfinite(servo_stroke)) {
            throw ConfigError("layout distances must be finite");
        }
    }
};

/// C_g,x = (m_rail r_rail + m_wing r_wing) / m.
inline double cg_shift(const MassLayout& l) {
    l.validate();
    return (l.m_rail * l.r_rail + l.m_wing * l.r_wing) / l.m;
}

/// CoP moves by the full servo stroke; the CG follows by cg_shift.
inline double max_cop_cg_offset(const MassLayout& l) { return l.servo_stroke - cg_shift(l); }

}  // namespace spero
