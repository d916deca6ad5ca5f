#include "pupilbench/ellipse_fit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pupil;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Point2d> sample_ellipse(double cx, double cy, double a, double b, double theta, int n, double phase = 0.0)
{
    std::vector<Point2d> pts;
    for (int i = 0; i < n; ++i) {
        const double phi = phase + 2.0 * kPi * i / n;
        const double u = a * std::cos(phi), v = b * std::sin(phi);
        pts.push_back({cx + u * std::cos(theta) - v * std::sin(theta), cy + u * std::sin(theta) + v * std::cos(theta)});
    }
    return pts;
}

// Difference of two orientations modulo a half turn.
double angle_gap(double t1, double t2)
{
    double d = std::fmod(std::abs(t1 - t2), kPi);
    return std::min(d, kPi - d);
}

} // namespace

TEST(EllipseFit, TwelveExactPoints)
{
    const auto pts = sample_ellipse(100, 80, 30, 20, 0.5, 12);
    const ConicCoefficients c = fit_ellipse_direct(std::span<const Point2d>(pts));
    const Ellipse e = conic_to_ellipse(c);
    EXPECT_NEAR(e.cx, 100, 1e-6);
    EXPECT_NEAR(e.cy, 80, 1e-6);
    EXPECT_NEAR(e.a, 30, 1e-6);
    EXPECT_NEAR(e.b, 20, 1e-6);
    EXPECT_NEAR(angle_gap(e.theta, 0.5), 0.0, 1e-6);
}

TEST(EllipseFit, SmallAxisAlignedEllipse)
{
    const auto pts = sample_ellipse(50, 40, 10, 6, 0.0, 12);
    const Ellipse e = conic_to_ellipse(fit_ellipse_direct(std::span<const Point2d>(pts)));
    EXPECT_NEAR(e.cx, 50, 1e-6);
    EXPECT_NEAR(e.cy, 40, 1e-6);
    EXPECT_NEAR(e.a, 10, 1e-6);
    EXPECT_NEAR(e.b, 6, 1e-6);
    EXPECT_NEAR(angle_gap(e.theta, 0.0), 0.0, 1e-6);
}

TEST(EllipseFit, ConstraintAndResidual)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(20, 300), ax(5, 60), ang(-kPi, kPi), ratio(0.3, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = ax(rng), b = a * ratio(rng);
        const auto pts = sample_ellipse(pos(rng), pos(rng), a, b, ang(rng), 20 + trial, ang(rng));
        const ConicCoefficients c = fit_ellipse_direct(std::span<const Point2d>(pts));
        EXPECT_NEAR(c.discriminant(), 1.0, 1e-9);
        EXPECT_GT(c.a, 0.0);
        // Residual scaled by the conic's magnitude at the data.
        const double scale = std::abs(c.f) + 1.0;
        for (const Point2d& p : pts)
            EXPECT_LE(std::abs(c(p.x, p.y)) / scale, 1e-9) << trial;
    }
}

TEST(EllipseFit, TooFewPoints)
{
    const auto pts = sample_ellipse(0, 0, 5, 3, 0, 5);
    try {
        fit_ellipse_direct(std::span<const Point2d>(pts));
        FAIL();
    } catch (const DetectionError& e) {
        EXPECT_EQ(e.code(), "InsufficientPoints");
    }
}

TEST(EllipseFit, CollinearPointsDegenerate)
{
    std::vector<Point2d> pts;
    for (int i = 0; i < 10; ++i)
        pts.push_back({1.0 + i, 2.0 + 3.0 * i});
    try {
        fit_ellipse_direct(std::span<const Point2d>(pts));
        FAIL();
    } catch (const DetectionError& e) {
        EXPECT_EQ(e.code(), "DegenerateConfiguration");
    }
    const std::vector<Point2d> same(8, Point2d{4.0, 4.0});
    EXPECT_THROW(fit_ellipse_direct(std::span<const Point2d>(same)), DetectionError);
}

TEST(EllipseFit, ExactlyOnePositiveConstraintEigenvector)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.7);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int trial = 0; trial < 50; ++trial) {
        auto pts = sample_ellipse(150, 120, 40, 25, ang(rng), 40);
        for (Point2d& p : pts) {
            p.x += noise(rng);
            p.y += noise(rng);
        }
        EXPECT_EQ(fit_ellipse_direct_detailed(pts).positive_constraint_count, 1) << trial;
    }
}

TEST(EllipseFit, TranslationEquivariance)
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> shift(-200, 200), ang(-kPi, kPi);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (int trial = 0; trial < 50; ++trial) {
        auto pts = sample_ellipse(250, 200, 35, 22, ang(rng), 30);
        for (Point2d& p : pts) {
            p.x += noise(rng);
            p.y += noise(rng);
        }
        const double tx = shift(rng), ty = shift(rng);
        auto moved = pts;
        for (Point2d& p : moved) {
            p.x += tx;
            p.y += ty;
        }
        const Ellipse e1 = conic_to_ellipse(fit_ellipse_direct(std::span<const Point2d>(pts)));
        const Ellipse e2 = conic_to_ellipse(fit_ellipse_direct(std::span<const Point2d>(moved)));
        EXPECT_NEAR(e2.cx, e1.cx + tx, 1e-6);
        EXPECT_NEAR(e2.cy, e1.cy + ty, 1e-6);
        EXPECT_NEAR(e2.a, e1.a, 1e-6);
        EXPECT_NEAR(e2.b, e1.b, 1e-6);
        EXPECT_LE(angle_gap(e2.theta, e1.theta), 1e-6);
    }
}

TEST(EllipseFit, RotationEquivariance)
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (int trial = 0; trial < 50; ++trial) {
        auto pts = sample_ellipse(60, -40, 30, 18, ang(rng), 30);
        for (Point2d& p : pts) {
            p.x += noise(rng);
            p.y += noise(rng);
        }
        const double psi = ang(rng);
        auto turned = pts;
        for (Point2d& p : turned)
            p = {p.x * std::cos(psi) - p.y * std::sin(psi), p.x * std::sin(psi) + p.y * std::cos(psi)};
        const Ellipse e1 = conic_to_ellipse(fit_ellipse_direct(std::span<const Point2d>(pts)));
        const Ellipse e2 = conic_to_ellipse(fit_ellipse_direct(std::span<const Point2d>(turned)));
        EXPECT_NEAR(e2.cx, e1.cx * std::cos(psi) - e1.cy * std::sin(psi), 1e-6);
        EXPECT_NEAR(e2.cy, e1.cx * std::sin(psi) + e1.cy * std::cos(psi), 1e-6);
        EXPECT_NEAR(e2.a, e1.a, 1e-6);
        EXPECT_NEAR(e2.b, e1.b, 1e-6);
        EXPECT_LE(angle_gap(e2.theta, e1.theta + psi), 1e-6);
    }
}

TEST(ConicToEllipse, UnitCircle)
{
    // x^2 + y^2 - 1 scaled to 4ac - b^2 = 1.
    const Ellipse e = conic_to_ellipse({0.5, 0.0, 0.5, 0.0, 0.0, -0.5});
    EXPECT_NEAR(e.cx, 0.0, 1e-12);
    EXPECT_NEAR(e.cy, 0.0, 1e-12);
    EXPECT_NEAR(e.a, 1.0, 1e-12);
    EXPECT_NEAR(e.b, 1.0, 1e-12);
    EXPECT_EQ(e.theta, 0.0);
}

TEST(ConicToEllipse, RadiusFiveCircle)
{
    // x^2 + y^2 - 25, divided by 2 so that 4ac - b^2 = 1.
    const Ellipse e = conic_to_ellipse({0.5, 0.0, 0.5, 0.0, 0.0, -12.5});
    EXPECT_NEAR(e.a, 5.0, 1e-12);
    EXPECT_NEAR(e.b, 5.0, 1e-12);
    EXPECT_EQ(e.theta, 0.0);
}

TEST(ConicToEllipse, TenBySix)
{
    // x^2/100 + y^2/36 = 1  ->  36 x^2 + 100 y^2 - 3600 = 0
    const Ellipse e = conic_to_ellipse({36, 0, 100, 0, 0, -3600});
    EXPECT_NEAR(e.a, 10.0, 1e-12);
    EXPECT_NEAR(e.b, 6.0, 1e-12);
    EXPECT_NEAR(e.theta, 0.0, 1e-12);
}

TEST(ConicToEllipse, AxisAligned)
{
    // (x-3)^2/16 + (y+2)^2/4 = 1  ->  x^2 + 4y^2 - 6x + 16y + 9 = 0
    const Ellipse e = conic_to_ellipse({1, 0, 4, -6, 16, 9});
    EXPECT_NEAR(e.cx, 3.0, 1e-12);
    EXPECT_NEAR(e.cy, -2.0, 1e-12);
    EXPECT_NEAR(e.a, 4.0, 1e-12);
    EXPECT_NEAR(e.b, 2.0, 1e-12);
    EXPECT_NEAR(e.theta, 0.0, 1e-12);

    // Same ellipse with y as the long axis.
    const Ellipse t = conic_to_ellipse({4, 0, 1, 0, 0, -16});
    EXPECT_NEAR(t.a, 4.0, 1e-12);
    EXPECT_NEAR(t.b, 2.0, 1e-12);
    EXPECT_NEAR(angle_gap(t.theta, kPi / 2), 0.0, 1e-12);
    EXPECT_GE(t.theta, -kPi / 2);
    EXPECT_LT(t.theta, kPi / 2);
}

TEST(ConicToEllipse, NegatedCoefficientsSameEllipse)
{
    const Ellipse e = conic_to_ellipse({-1, 0, -4, 6, -16, -9});
    EXPECT_NEAR(e.cx, 3.0, 1e-12);
    EXPECT_NEAR(e.a, 4.0, 1e-12);
}

TEST(ConicToEllipse, Rejections)
{
    const auto code = [](const ConicCoefficients& c) {
        try {
            conic_to_ellipse(c);
        } catch (const DetectionError& e) {
            return e.code();
        }
        return std::string("none");
    };
    EXPECT_EQ(code({1, 0, -1, 0, 0, -1}), "NotAnEllipse"); // hyperbola
    EXPECT_EQ(code({1, 0, 0, 0, -1, 0}), "NotAnEllipse");  // parabola
    EXPECT_EQ(code({1, 0, 1, 0, 0, 1}), "NotAnEllipse");   // no real points
}
