#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "spero/controllers.hpp"
#include "spero/dynamics.hpp"

using namespace spero;

TEST(Dynamics, DefaultsMatchIdentifiedVehicle) {
    const VehicleParams p;
    EXPECT_DOUBLE_EQ(p.i_body, 0.0345);
    EXPECT_DOUBLE_EQ(p.i_rotor, 0.0016);
    EXPECT_DOUBLE_EQ(p.m, 2.727);
    EXPECT_DOUBLE_EQ(p.eta_yaw(), 0.0345);
    EXPECT_DOUBLE_EQ(p.eta_alt(), 2.727);
}

TEST(Dynamics, AerodynamicTermsMatchHandExpansion) {
    const VehicleParams p;
    for (double w : {0.0, 1.0, 37.5, 80.0}) {
        EXPECT_NEAR(p.drag_torque(w), oracle::kDragPerOmegaSq * w * w, 1e-15 * (1 + w * w));
        EXPECT_NEAR(p.rotor_lift(w), oracle::kLiftPerOmegaSq * w * w, 1e-13 * (1 + w * w));
    }
}

TEST(Dynamics, YawAccelerationAtHoverSpeed) {
    const VehicleParams p;
    // Drag at 80 rad/s is 1.715e-6 * 6400 = 0.010976 N m.
    EXPECT_NEAR(yaw_acceleration(p, 80.0, 0.0, 0.0), -0.010976 / 0.0345, 1e-12);
    EXPECT_NEAR(yaw_acceleration(p, 80.0, 0.0, 0.010976), 0.0, 1e-12);
}

TEST(Dynamics, RotorSpinUpReactsOnBody) {
    const VehicleParams p;
    // Zero speed: only the reaction torque -I_rotor * rotor_accel acts.
    EXPECT_NEAR(yaw_acceleration(p, 0.0, 19.0, 0.0), -0.0016 * 19.0 / 0.0345, 1e-12);
    EXPECT_GT(yaw_acceleration(p, 0.0, -19.0, 0.0), 0.0);
    EXPECT_GT(yaw_acceleration(p, 0.0, 0.0, 0.1), 0.0);
}

TEST(Dynamics, AltitudeAccelerationSigns) {
    const VehicleParams p;
    // Free fall when the rotor is stopped and no thrust is applied.
    EXPECT_NEAR(altitude_acceleration(p, 0.0, 0.0), 9.81, 1e-12);
    const double lift80 = 2.9841e-4 * 6400.0;  // 1.909824 N
    EXPECT_NEAR(altitude_acceleration(p, 80.0, 0.0), (2.727 * 9.81 - lift80) / 2.727, 1e-12);
    EXPECT_LT(altitude_acceleration(p, 0.0, 30.0), 0.0);
}

TEST(Dynamics, FeedforwardCancelsBothChannels) {
    const VehicleParams p;
    for (double w = 0.0; w <= 100.0; w += 12.5) {
        for (double a = -25.0; a <= 25.0; a += 6.25) {
            const auto d = feedforward(p, w, a);
            EXPECT_NEAR(d.d_yaw, 0.0016 * a + oracle::kDragPerOmegaSq * w * w, 1e-12);
            EXPECT_NEAR(d.d_alt, 2.727 * 9.81 - oracle::kLiftPerOmegaSq * w * w, 1e-11);
            EXPECT_LT(std::abs(yaw_acceleration(p, w, a, d.d_yaw)), 1e-12);
            EXPECT_LT(std::abs(altitude_acceleration(p, w, d.d_alt)), 1e-12);
        }
    }
}

TEST(Dynamics, NonFiniteInputsRejected) {
    const VehicleParams p;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_THROW(yaw_acceleration(p, nan, 0.0, 0.0), InvalidState);
    EXPECT_THROW(yaw_acceleration(p, 0.0, inf, 0.0), InvalidState);
    EXPECT_THROW(altitude_acceleration(p, 0.0, nan), InvalidState);
    EXPECT_THROW(feedforward(p, inf, 0.0), InvalidState);
    VehicleState s;
    s.z = nan;
    EXPECT_THROW(integrate_step(s, p, RotorProfile::constant_speed(0.0), ControlInputs{}, 0.001),
                 InvalidState);
}

TEST(Dynamics, InvalidParametersRejected) {
    VehicleParams p;
    p.i_body = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.m = -1.0;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Dynamics, StepSizeBounds) {
    const VehicleParams p;
    const auto prof = RotorProfile::constant_speed(0.0);
    const VehicleState s;
    EXPECT_THROW(integrate_step(s, p, prof, ControlInputs{}, 0.0), ConfigError);
    EXPECT_THROW(integrate_step(s, p, prof, ControlInputs{}, -0.001), ConfigError);
    EXPECT_THROW(integrate_step(s, p, prof, ControlInputs{}, 0.0100001), ConfigError);
    EXPECT_NO_THROW(integrate_step(s, p, prof, ControlInputs{}, 0.01));
}

TEST(Dynamics, ConstantTorqueIsIntegratedExactly) {
    // A quadratic trajectory is inside RK4's exactness class.
    const VehicleParams p;
    const auto prof = RotorProfile::constant_speed(0.0);
    VehicleState s;
    const double tau = 0.069;  // 2 rad/s^2 on the body
    for (int k = 0; k < 300; ++k) s = integrate_step(s, p, prof, ControlInputs{tau, 0.0}, 0.01);
    EXPECT_NEAR(s.t, 3.0, 1e-12);
    EXPECT_NEAR(s.omega_body, 2.0 * 3.0, 1e-10);
    EXPECT_NEAR(s.alpha_body, 0.5 * 2.0 * 9.0, 1e-10);
}

TEST(Dynamics, RotorAngleFollowsProfile) {
    const VehicleParams p;
    const auto prof = RotorProfile::constant_acceleration(20.0, 0.0, false, 0.0, 80.0);
    VehicleState s;
    for (int k = 0; k < 200; ++k) s = integrate_step(s, p, prof, ControlInputs{}, 0.01);
    // At t = 2 s the rotor has turned 0.5 * 20 * 2^2 = 40 rad.
    EXPECT_NEAR(s.alpha_rotor, 40.0, 1e-9);
    EXPECT_DOUBLE_EQ(s.omega_rotor, 40.0);
}

TEST(Dynamics, HoverWithFeedforwardHoldsAltitude) {
    const VehicleParams p;
    const auto prof = RotorProfile::constant_speed(80.0);
    VehicleState s;
    s.omega_rotor = 80.0;
    const auto d = feedforward(p, 80.0, 0.0);
    for (int k = 0; k < 1000; ++k) s = integrate_step(s, p, prof, ControlInputs{d.d_yaw, d.d_alt}, 0.005);
    EXPECT_LT(std::abs(s.z), 1e-12);
    EXPECT_LT(std::abs(s.alpha_body), 1e-12);
}

TEST(Dynamics, FeedforwardKeepsClosedLoopAtSetpoint) {
    // Zero initial error stays below 1e-9 for 10 s with both loops closed.
    const VehicleParams p;
    const auto prof = RotorProfile::constant_speed(80.0);
    VehicleState s;
    s.omega_rotor = 80.0;
    s.alpha_body = 0.3;
    s.z = -1.0;
    ControllerState yaw, alt;
    const auto g = tuned_cascaded_gains();
    const double dt = 0.005;
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
        const auto d = feedforward(p, s.omega_rotor, 0.0);
        const double tau = d.d_yaw + cascaded_step(yaw, g, 0.3, s.alpha_body, s.omega_body, dt);
        const double f = d.d_alt - cascaded_step(alt, g, -1.0, s.z, s.v_z, dt);
        s = integrate_step(s, p, prof, ControlInputs{tau, f}, dt);
        worst = std::max({worst, std::abs(s.alpha_body - 0.3), std::abs(s.z + 1.0)});
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(Dynamics, Rk4IsFourthOrderUnderStateFeedback) {
    // eta x'' = -kp x - kd x' with w = 2 rad/s, zeta = 0.5 has a closed form.
    VehicleParams p;
    const double eta = p.i_body, w = 2.0, zeta = 0.5;
    const double kp = eta * w * w, kd = eta * 2.0 * zeta * w;
    const auto prof = RotorProfile::constant_speed(0.0);
    auto law = [&](double, const VehicleState& s) {
        return ControlInputs{-kp * s.alpha_body - kd * s.omega_body, 0.0};
    };
    auto error_at = [&](double dt) {
        VehicleState s;
        s.alpha_body = 1.0;
        const int n = static_cast<int>(std::lround(2.0 / dt));
        for (int k = 0; k < n; ++k) s = integrate_step(s, p, prof, law, dt);
        return std::abs(s.alpha_body - oracle::damped_position(zeta, w, 2.0));
    };
    const double e1 = error_at(0.01), e2 = error_at(0.005);
    EXPECT_LT(e1, 1e-8);
    const double ratio = e1 / e2;
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
}

TEST(RotorProfile, ConstantSpeed) {
    const auto p = RotorProfile::constant_speed(42.0);
    EXPECT_DOUBLE_EQ(p.speed(0.0), 42.0);
    EXPECT_DOUBLE_EQ(p.speed(100.0), 42.0);
    EXPECT_DOUBLE_EQ(p.acceleration(3.0), 0.0);
    EXPECT_FALSE(p.stop_time().has_value());
}

TEST(RotorProfile, DecelerationClampsAtZero) {
    const auto p = RotorProfile::constant_acceleration(-80.0 / 4.2, 80.0, true, 1.0);
    EXPECT_DOUBLE_EQ(p.speed(0.5), 80.0);
    EXPECT_DOUBLE_EQ(p.acceleration(0.5), 0.0);
    EXPECT_NEAR(p.speed(1.0 + 2.1), 40.0, 1e-12);
    EXPECT_DOUBLE_EQ(p.speed(10.0), 0.0);
    EXPECT_DOUBLE_EQ(p.acceleration(10.0), 0.0);
    ASSERT_TRUE(p.stop_time().has_value());
    EXPECT_NEAR(*p.stop_time(), 5.2, 1e-12);
}

TEST(RotorProfile, AccelerationHoldsAtTarget) {
    const auto p = RotorProfile::constant_acceleration(80.0 / 3.8, 0.0, false, 0.0, 80.0);
    EXPECT_NEAR(p.speed(1.9), 40.0, 1e-12);
    EXPECT_DOUBLE_EQ(p.speed(3.8), 80.0);
    EXPECT_DOUBLE_EQ(p.speed(50.0), 80.0);
    EXPECT_DOUBLE_EQ(p.acceleration(5.0), 0.0);
    EXPECT_NEAR(*p.stop_time(), 3.8, 1e-12);
}
