// Yaw and altitude dynamics of a stop-rotor vehicle with rotor-offset
// feedforward. States advance with a fixed-step RK4 integrator.
//
// Sign convention: the altitude equation is implemented literally,
//
//     m z'' = m g - 1/2 rho c_l A r^2 w^2 - F_u
//
// so z grows in the direction of gravity (down). Hover holds when
// lift + F_u = m g. Plots negate z for an "altitude up" display.
#pragma once

#include <cmath>
#include <concepts>
#include <optional>
#include <string>

#include "spero/errors.hpp"

namespace spero {

/// Physical and aerodynamic constants. Defaults are the vehicle's
/// identified values (SI units).
struct VehicleParams {
    double i_body = 0.0345;   ///< body inertia about z [kg m^2]
    double i_rotor = 0.0016;  ///< rotor inertia about z [kg m^2]
    double rho = 1.225;       ///< air density [kg/m^3]
    double c_d = 0.05;        ///< wing drag coefficient
    double c_l = 0.87;        ///< wing lift coefficient
    double a_ref = 0.056;     ///< wing reference area [m^2]
    double r = 0.10;          ///< rotation axis to wing CoP distance [m]
    double m = 2.727;         ///< total mass [kg]
    double g = 9.81;          ///< gravitational acceleration [m/s^2]

    [[nodiscard]] double eta_yaw() const { return i_body; }
    [[nodiscard]] double eta_alt() const { return m; }

    /// Aerodynamic drag torque on the body for a rotor speed [N m].
    [[nodiscard]] double drag_torque(double omega_rotor) const {
        return 0.5 * rho * c_d * a_ref * r * r * r * omega_rotor * omega_rotor;
    }

    /// Rotor lift [N].
    [[nodiscard]] double rotor_lift(double omega_rotor) const {
        return 0.5 * rho * c_l * a_ref * r * r * omega_rotor * omega_rotor;
    }

    void validate() const {
        const double fields[] = {i_body, i_rotor, rho, c_d, c_l, a_ref, r, m, g};
        for (double v : fields) {
            if (!std::isfinite(v) || v <= 0.0) {
                throw ConfigError("vehicle parameters must be finite and strictly positive");
            }
        }
    }
};

struct VehicleState {
    double t = 0.0;            ///< [s]
    double alpha_body = 0.0;   ///< body yaw [rad]
    double omega_body = 0.0;   ///< body yaw rate [rad/s]
    double z = 0.0;            ///< altitude coordinate, gravity-positive [m]
    double v_z = 0.0;          ///< [m/s]
    double alpha_rotor = 0.0;  ///< [rad]
    double omega_rotor = 0.0;  ///< [rad/s]

    [[nodiscard]] bool finite() const {
        return std::isfinite(t) && std::isfinite(alpha_body) && std::isfinite(omega_body) &&
               std::isfinite(z) && std::isfinite(v_z) && std::isfinite(alpha_rotor) &&
               std::isfinite(omega_rotor);
    }

    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// Prescribed rotor speed as a function of time.
///
/// ConstantSpeed holds omega0 with zero acceleration. ConstantAcceleration
/// ramps omega0 + accel * (t - t_start). A ramp optionally stops at zero
/// (clamp_at_zero) or at a hold speed; after stopping the acceleration is 0.
/// Before t_start the profile sits at omega0.
struct RotorProfile {
    enum class Kind { ConstantSpeed, ConstantAcceleration };

    Kind kind = Kind::ConstantSpeed;
    double omega0 = 0.0;
    double accel = 0.0;
    double t_start = 0.0;
    bool clamp_at_zero = false;
    std::optional<double> hold_at;

    static RotorProfile constant_speed(double omega0) {
        RotorProfile p;
        p.kind = Kind::ConstantSpeed;
        p.omega0 = omega0;
        return p;
    }

    static RotorProfile constant_acceleration(double accel, double omega0, bool clamp_at_zero,
                                              double t_start = 0.0,
                                              std::optional<double> hold_at = std::nullopt) {
        RotorProfile p;
        p.kind = Kind::ConstantAcceleration;
        p.omega0 = omega0;
        p.accel = accel;
        p.t_start = t_start;
        p.clamp_at_zero = clamp_at_zero;
        p.hold_at = hold_at;
        return p;
    }

    [[nodiscard]] double speed(double t) const {
        if (kind == Kind::ConstantSpeed || t <= t_start) {
            return omega0;
        }
        double w = omega0 + accel * (t - t_start);
        if (hold_at) {
            if ((accel > 0.0 && w >= *hold_at) || (accel < 0.0 && w <= *hold_at)) {
                w = *hold_at;
            }
        }
        if (clamp_at_zero && w < 0.0) {
            w = 0.0;
        }
        return w;
    }

    [[nodiscard]] double acceleration(double t) const {
        if (kind == Kind::ConstantSpeed || t < t_start) {
            return 0.0;
        }
        const double w = omega0 + accel * (t - t_start);
        if (hold_at && ((accel > 0.0 && w >= *hold_at) || (accel < 0.0 && w <= *hold_at))) {
            return 0.0;
        }
        if (clamp_at_zero && w <= 0.0 && accel < 0.0) {
            return 0.0;
        }
        return accel;
    }

    /// Time at which a ramp stops (zero clamp or hold), if it ever does.
    [[nodiscard]] std::optional<double> stop_time() const {
        if (kind == Kind::ConstantSpeed || accel == 0.0) {
            return std::nullopt;
        }
        std::optional<double> best;
        auto consider = [&](double target) {
            const double dt = (target - omega0) / accel;
            if (dt >= 0.0 && (!best || t_start + dt < *best)) {
                best = t_start + dt;
            }
        };
        if (hold_at) consider(*hold_at);
        if (clamp_at_zero && accel < 0.0) consider(0.0);
        return best;
    }
};

struct ControlInputs {
    double tau_u = 0.0;  ///< yaw control torque [N m]
    double f_u = 0.0;    ///< vertical control force [N]
};

struct FeedforwardTerms {
    double d_yaw = 0.0;  ///< [N m]
    double d_alt = 0.0;  ///< [N]
};

namespace detail {
inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw InvalidState(std::string("non-finite ") + what);
    }
}
}  // namespace detail

/// Body yaw acceleration [rad/s^2].
inline double yaw_acceleration(const VehicleParams& p, double omega_rotor, double rotor_accel,
                               double tau_u) {
    detail::require_finite(omega_rotor, "rotor speed");
    detail::require_finite(rotor_accel, "rotor acceleration");
    detail::require_finite(tau_u, "yaw torque");
    return (-p.i_rotor * rotor_accel - p.drag_torque(omega_rotor) + tau_u) / p.i_body;
}

/// z acceleration [m/s^2], gravity-positive.
inline double altitude_acceleration(const VehicleParams& p, double omega_rotor, double f_u) {
    detail::require_finite(omega_rotor, "rotor speed");
    detail::require_finite(f_u, "vertical force");
    return (p.m * p.g - p.rotor_lift(omega_rotor) - f_u) / p.m;
}

/// Offsets that cancel the rotor-induced yaw torque and the net vertical force.
inline FeedforwardTerms feedforward(const VehicleParams& p, double omega_rotor, double rotor_accel) {
    detail::require_finite(omega_rotor, "rotor speed");
    detail::require_finite(rotor_accel, "rotor acceleration");
    return {p.i_rotor * rotor_accel + p.drag_torque(omega_rotor),
            p.m * p.g - p.rotor_lift(omega_rotor)};
}

inline constexpr double kMaxStep = 0.01;

/// One RK4 step with the input law evaluated at every stage.
/// `law(t, state)` returns ControlInputs.
template <typename InputLaw>
    requires std::invocable<InputLaw&, double, const VehicleState&>
VehicleState integrate_step(const VehicleState& s, const VehicleParams& p,
                            const RotorProfile& profile, InputLaw&& law, double dt) {
    if (!(dt > 0.0) || dt > kMaxStep) {
        throw ConfigError("integration step must satisfy 0 < dt <= 0.01 s");
    }
    if (!s.finite()) {
        throw InvalidState("non-finite vehicle state");
    }

    struct X {
        double a, w, z, v, ar;
    };
    auto deriv = [&](double t, const X& x) -> X {
        VehicleState probe = s;
        probe.t = t;
        probe.alpha_body = x.a;
        probe.omega_body = x.w;
        probe.z = x.z;
        probe.v_z = x.v;
        probe.alpha_rotor = x.ar;
        probe.omega_rotor = profile.speed(t);
        const ControlInputs u = law(t, static_cast<const VehicleState&>(probe));
        const double wr = probe.omega_rotor;
        return {x.w, yaw_acceleration(p, wr, profile.acceleration(t), u.tau_u), x.v,
                altitude_acceleration(p, wr, u.f_u), wr};
    };
    auto axpy = [](const X& x, double h, const X& k) {
        return X{x.a + h * k.a, x.w + h * k.w, x.z + h * k.z, x.v + h * k.v, x.ar + h * k.ar};
    };

    const X x0{s.alpha_body, s.omega_body, s.z, s.v_z, s.alpha_rotor};
    const double t = s.t;
    const X k1 = deriv(t, x0);
    const X k2 = deriv(t + 0.5 * dt, axpy(x0, 0.5 * dt, k1));
    const X k3 = deriv(t + 0.5 * dt, axpy(x0, 0.5 * dt, k2));
    const X k4 = deriv(t + dt, axpy(x0, dt, k3));

    auto comb = [dt](double x, double a, double b, double c, double d) {
        return x + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    };
    VehicleState out;
    out.t = t + dt;
    out.alpha_body = comb(x0.a, k1.a, k2.a, k3.a, k4.a);
    out.omega_body = comb(x0.w, k1.w, k2.w, k3.w, k4.w);
    out.z = comb(x0.z, k1.z, k2.z, k3.z, k4.z);
    out.v_z = comb(x0.v, k1.v, k2.v, k3.v, k4.v);
    out.alpha_rotor = comb(x0.ar, k1.ar, k2.ar, k3.ar, k4.ar);
    out.omega_rotor = profile.speed(out.t);
    if (!out.finite()) {
        throw InvalidState("integration produced a non-finite state");
    }
    return out;
}

/// Zero-order-hold inputs over the step.
inline VehicleState integrate_step(const VehicleState& s, const VehicleParams& p,
                                   const RotorProfile& profile, const ControlInputs& u, double dt) {
    return integrate_step(
        s, p, profile, [&u](double, const VehicleState&) { return u; }, dt);
}

}  // namespace spero
