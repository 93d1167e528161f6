#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "spero/controllers.hpp"
#include "spero/gain_presets.hpp"

using namespace spero;

namespace {
PidGains pid(double kp, double ki, double kd) {
    PidGains g;
    g.kp = kp;
    g.ki = ki;
    g.kd = kd;
    return g;
}
}  // namespace

TEST(Pid, ProportionalOnly) {
    PidState st;
    EXPECT_DOUBLE_EQ(pid_update(st, pid(2.0, 0.0, 0.0), 0.25, 0.01), 0.5);
    EXPECT_DOUBLE_EQ(st.last_output, 0.5);
}

TEST(Pid, IntegralAccumulatesKiErrorDt) {
    PidState st;
    const auto g = pid(0.0, 3.0, 0.0);
    for (int k = 0; k < 10; ++k) pid_update(st, g, 2.0, 0.1);
    // Ten steps of 3 * 2 * 0.1.
    EXPECT_NEAR(st.integral, 6.0, 1e-12);
    EXPECT_NEAR(pid_update(st, g, 0.0, 0.1), 6.0, 1e-12);
}

TEST(Pid, WindupLimitClampsIntegral) {
    PidState st;
    auto g = pid(0.0, 10.0, 0.0);
    g.windup_limits = Limits{-0.3, 0.3};
    for (int k = 0; k < 100; ++k) pid_update(st, g, 1.0, 0.1);
    EXPECT_DOUBLE_EQ(st.integral, 0.3);
    // Recovery starts immediately once the error changes sign.
    pid_update(st, g, -0.1, 0.1);
    EXPECT_NEAR(st.integral, 0.2, 1e-12);
}

TEST(Pid, OutputLimitClampsCommand) {
    PidState st;
    auto g = pid(100.0, 0.0, 0.0);
    g.output_limits = Limits{-1.0, 1.0};
    EXPECT_DOUBLE_EQ(pid_update(st, g, 5.0, 0.01), 1.0);
    EXPECT_DOUBLE_EQ(pid_update(st, g, -5.0, 0.01), -1.0);
}

TEST(Pid, DerivativeKickOnFirstSample) {
    PidState st;
    const auto g = pid(0.0, 0.0, 0.5);
    EXPECT_DOUBLE_EQ(pid_update(st, g, 1.0, 0.001), 500.0);
    EXPECT_DOUBLE_EQ(pid_update(st, g, 1.0, 0.001), 0.0);
    EXPECT_DOUBLE_EQ(pid_update(st, g, 1.5, 0.001), 250.0);
}

TEST(Pid, RejectsNonPositiveStep) {
    PidState st;
    EXPECT_THROW(pid_update(st, pid(1, 0, 0), 1.0, 0.0), ConfigError);
}

TEST(Pid, ValidationRejectsBadGains) {
    EXPECT_THROW(pid(-1.0, 0.0, 0.0).validate(), ConfigError);
    auto g = pid(1.0, 0.0, 0.0);
    g.output_limits = Limits{1.0, -1.0};
    EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Cascade, InnerLoopTracksOuterOutput) {
    const auto g = CascadedGains::from_values(2.0, 0.5, 3.0, 0.25, 0.01);
    ControllerState st;
    PidState outer, inner;
    for (int k = 0; k < 20; ++k) {
        const double x = 0.05 * k, v = 0.3 - 0.01 * k;
        const double u = cascaded_step(st, g, 1.0, x, v, 0.01);
        const double r = pid_update(outer, g.outer, 1.0 - x, 0.01);
        const double expect = pid_update(inner, g.inner, r - v, 0.01);
        EXPECT_DOUBLE_EQ(u, expect);
    }
    EXPECT_EQ(st.outer, outer);
    EXPECT_EQ(st.inner, inner);
}

TEST(Cascade, OuterDerivativeRejected) {
    auto g = CascadedGains::from_values(1, 0, 1, 0, 0);
    g.outer.kd = 0.1;
    EXPECT_THROW(g.validate(), ConfigError);
    EXPECT_THROW(LoopController{g}, ConfigError);
}

TEST(Controller, ResetClearsAccumulators) {
    LoopController c(pid(1.0, 1.0, 1.0));
    c.update(1.0, 0.0, 0.0, 0.01);
    EXPECT_NE(c.state(), ControllerState{});
    c.reset();
    EXPECT_EQ(c.state(), ControllerState{});
    ControllerState st;
    st.outer.integral = 3.0;
    EXPECT_EQ(reset(st), ControllerState{});
}

TEST(Controller, ArchitectureDispatch) {
    LoopController single(tuned_single_loop_gains());
    LoopController cascaded(tuned_cascaded_gains());
    EXPECT_EQ(single.architecture(), Architecture::SingleLoop);
    EXPECT_EQ(cascaded.architecture(), Architecture::Cascaded);
    ControllerState ref;
    const double u = single.update(1.0, 0.2, 5.0, 0.01);
    EXPECT_DOUBLE_EQ(u, single_loop_step(ref, tuned_single_loop_gains(), 1.0, 0.2, 0.01));
}

TEST(Controller, TunedGains) {
    const auto s = tuned_single_loop_gains();
    EXPECT_DOUBLE_EQ(s.kp, 0.004);
    EXPECT_DOUBLE_EQ(s.ki, 0.010);
    EXPECT_DOUBLE_EQ(s.kd, 0.561);
    const auto c = tuned_cascaded_gains();
    EXPECT_DOUBLE_EQ(c.outer.kp, 13.1);
    EXPECT_DOUBLE_EQ(c.outer.ki, 0.002);
    EXPECT_DOUBLE_EQ(c.outer.kd, 0.0);
    EXPECT_DOUBLE_EQ(c.inner.kp, 13.6);
    EXPECT_DOUBLE_EQ(c.inner.ki, 0.036);
    EXPECT_DOUBLE_EQ(c.inner.kd, 1.37e-5);
}

namespace {

constexpr double kYawEta = 0.0345;

/// Exact update of eta x'' = u with u held over dt.
void zoh_step(double& x, double& v, double u, double dt) {
    x += v * dt + 0.5 * u / kYawEta * dt * dt;
    v += u / kYawEta * dt;
}

}  // namespace

TEST(Controller, TunedSingleLoopStepMatchesContinuousOracle) {
    const auto g = tuned_single_loop_gains();
    // Continuous loop: the kd s term turns the unit step into an impulse,
    // so v(0+) = kd / eta. Then eta v' = kp (1 - x) + ki z - kd v, z' = 1 - x.
    auto f = [&](const std::array<double, 3>& y) {
        return std::array<double, 3>{y[1], (g.kp * (1.0 - y[0]) + g.ki * y[2] - g.kd * y[1]) / kYawEta,
                                     1.0 - y[0]};
    };
    std::array<double, 3> y{0.0, g.kd / kYawEta, 0.0};
    const double h = 1e-5;
    double x = 0.0, v = 0.0;
    ControllerState st;
    const double dt = 1e-3;
    const std::array<double, 9> checks{0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 45.0, 60.0};
    std::size_t next = 0;
    for (int k = 1; k <= 60000; ++k) {
        zoh_step(x, v, single_loop_step(st, g, 1.0, x, dt), dt);
        for (int i = 0; i < 100; ++i) {
            const auto k1 = f(y);
            std::array<double, 3> t2, t3, t4;
            for (int j = 0; j < 3; ++j) t2[j] = y[j] + 0.5 * h * k1[j];
            const auto k2 = f(t2);
            for (int j = 0; j < 3; ++j) t3[j] = y[j] + 0.5 * h * k2[j];
            const auto k3 = f(t3);
            for (int j = 0; j < 3; ++j) t4[j] = y[j] + h * k3[j];
            const auto k4 = f(t4);
            for (int j = 0; j < 3; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if (next < checks.size() && k == static_cast<int>(std::lround(checks[next] / dt))) {
            EXPECT_NEAR(x, y[0], 0.02) << "t=" << checks[next];
            ++next;
        }
    }
    EXPECT_EQ(next, checks.size());
}

TEST(Controller, TunedCascadeSettlesOnUnitStep) {
    const auto g = tuned_cascaded_gains();
    ControllerState st;
    double x = 0.0, v = 0.0;
    const double dt = 1e-3;
    for (int k = 0; k < 60000; ++k) zoh_step(x, v, cascaded_step(st, g, 1.0, x, v, dt), dt);
    EXPECT_LT(std::abs(1.0 - x), 1e-3);
    EXPECT_LT(std::abs(v), 1e-3);
}

TEST(Presets, FlightTableRows) {
    const auto p = flight_gain_preset();
    EXPECT_EQ(p.loops.size(), 18u);
    const auto& yr = p.at("mc.yaw_rate");
    EXPECT_DOUBLE_EQ(yr.kp, 0.2);
    EXPECT_DOUBLE_EQ(yr.ki, 0.1);
    ASSERT_TRUE(yr.output_limits && yr.windup_limits);
    EXPECT_DOUBLE_EQ(yr.windup_limits->hi, 0.3);
    const auto& zp = p.at("mc.z_position");
    ASSERT_TRUE(zp.output_limits.has_value());
    EXPECT_DOUBLE_EQ(zp.output_limits->lo, -1.5);
    EXPECT_DOUBLE_EQ(zp.output_limits->hi, 3.0);
    EXPECT_FALSE(p.at("mc.z_velocity").output_limits.has_value());
    EXPECT_THROW(p.at("mc.nope"), ConfigError);
    EXPECT_NO_THROW(p.cascade("mc.yaw", "mc.yaw_rate").validate());
    EXPECT_NO_THROW(p.cascade("fwc.yaw", "fwc.yaw_rate").validate());
    EXPECT_TRUE(builtin_preset("flight").has_value());
    EXPECT_FALSE(builtin_preset("other").has_value());
}
