#include <gtest/gtest.h>

#include <cmath>

#include "spero/geometry.hpp"

using namespace spero;

TEST(Geometry, VtolLayoutHasNoShift) {
    EXPECT_DOUBLE_EQ(cg_shift(MassLayout::vtol()), 0.0);
    EXPECT_DOUBLE_EQ(max_cop_cg_offset(MassLayout::vtol()), 0.05);
}

TEST(Geometry, ForwardFlightShiftFromMassMoments) {
    // (0.51 * 0.05 + 0.34 * 0.08) / 2.7 = 0.0527 / 2.7
    const double expected = 0.0527 / 2.7;
    EXPECT_NEAR(cg_shift(MassLayout::forward_flight()), expected, 1e-15);
    EXPECT_NEAR(max_cop_cg_offset(MassLayout::forward_flight()), 0.05 - expected, 1e-15);
}

TEST(Geometry, RoundsToTwoCentimetres) {
    const auto l = MassLayout::forward_flight();
    EXPECT_DOUBLE_EQ(std::round(cg_shift(l) * 100.0) / 100.0, 0.02);
    EXPECT_DOUBLE_EQ(std::round(max_cop_cg_offset(l) * 100.0) / 100.0, 0.03);
}

TEST(Geometry, ScalingAllMassesLeavesShiftUnchanged) {
    auto l = MassLayout::forward_flight();
    const double base = cg_shift(l);
    l.m *= 2.0;
    l.m_rail *= 2.0;
    l.m_wing *= 2.0;
    EXPECT_NEAR(cg_shift(l), base, 1e-15);
}

TEST(Geometry, LinearInEachRadius) {
    auto at = [](double rr, double rw) {
        auto l = MassLayout::forward_flight();
        l.r_rail = rr;
        l.r_wing = rw;
        return cg_shift(l);
    };
    EXPECT_NEAR(at(0.05, 0.08), at(0.05, 0.0) + at(0.0, 0.08), 1e-12);
    EXPECT_NEAR(at(0.03, 0.0) + at(0.02, 0.0), at(0.05, 0.0), 1e-12);
    EXPECT_NEAR(at(0.0, 0.16), 2.0 * at(0.0, 0.08), 1e-12);
}

TEST(Geometry, OffsetZeroWhenStrokeEqualsShift) {
    auto l = MassLayout::forward_flight();
    l.servo_stroke = cg_shift(l);
    EXPECT_DOUBLE_EQ(max_cop_cg_offset(l), 0.0);
}

TEST(Geometry, CopStaysAftOfCg) { EXPECT_GT(max_cop_cg_offset(MassLayout::forward_flight()), 0.0); }

TEST(Geometry, InvalidLayoutsRejected) {
    auto l = MassLayout::forward_flight();
    l.m_rail = 0.0;
    EXPECT_THROW(cg_shift(l), ConfigError);
    l = MassLayout::forward_flight();
    l.m = 0.8;
    EXPECT_THROW(cg_shift(l), ConfigError);
}
