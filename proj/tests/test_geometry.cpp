#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nploc/geometry.hpp"

using namespace nploc;

namespace {

const double pi = std::numbers::pi;

// Total signed curvature by a fine trapezoid rule in t (independent of the mesh code).
double total_curvature(const Curve& c, int n = 200000)
{
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        auto p = c(two_pi * i / n);
        sum += curvature(p) * p.dx.norm();
    }
    return sum * two_pi / n;
}

double signed_area(const Curve& c, int n = 20000)
{
    double a = 0.0;
    for (int i = 0; i < n; ++i) {
        auto p = c(two_pi * i / n);
        a += p.x.x() * p.dx.y() - p.x.y() * p.dx.x();
    }
    return 0.5 * a * two_pi / n;
}

void check_derivatives(const Curve& c)
{
    const double h = 1e-6;
    for (int i = 0; i < 37; ++i) {
        double t = 0.17 * i;
        auto p = c(t), pp = c(t + h), pm = c(t - h);
        Vec2 d1 = (pp.x - pm.x) / (2 * h);
        Vec2 d2 = (pp.dx - pm.dx) / (2 * h);
        EXPECT_LT((d1 - p.dx).norm(), 1e-6 * std::max(1.0, p.dx.norm())) << c.name() << " t=" << t;
        EXPECT_LT((d2 - p.ddx).norm(), 1e-6 * std::max(1.0, p.ddx.norm())) << c.name() << " t=" << t;
    }
}

} // namespace

TEST(Ellipse, PositionAndValidation)
{
    auto e = make_ellipse(1.0, 0.05);
    EXPECT_NEAR(e.position(0.0).x(), std::cosh(0.05), 1e-15);
    EXPECT_NEAR(e.position(0.0).y(), 0.0, 1e-15);
    EXPECT_NEAR(e.position(0.0).x(), 1.00125, 1e-5);
    EXPECT_EQ(e.kind(), CurveKind::ellipse);
    ASSERT_EQ(e.marks().size(), 2u);
    EXPECT_EQ(e.marks()[0].t, 0.0);
    EXPECT_EQ(e.marks()[1].t, pi);
    EXPECT_THROW(make_ellipse(0.0, 1.0), InvalidParameter);
    EXPECT_THROW(make_ellipse(1.0, -1.0), InvalidParameter);
}

TEST(Ellipse, LargeRhoApproachesCircle)
{
    auto e = make_ellipse(1.0, 10.0);
    double radius = std::exp(10.0) / 2.0;
    for (double t : {0.0, 0.7, 2.0, 4.4})
        EXPECT_NEAR(e.position(t).norm() / radius, 1.0, 1e-8);
}

TEST(Ellipse, CurvatureClosedForms)
{
    double rho = 0.05;
    auto e = make_ellipse(1.0, rho);
    double kmax = std::cosh(rho) / (std::sinh(rho) * std::sinh(rho));
    EXPECT_NEAR(curvature(e, 0.0), kmax, 1e-10 * kmax);
    EXPECT_NEAR(curvature(e, 0.0), 400.17, 0.01);
    double s = std::sinh(rho);
    double kmid = std::cosh(rho) * s / std::pow(s * s + 1.0, 1.5);
    EXPECT_NEAR(curvature(e, pi / 2), kmid, 1e-12);
    EXPECT_NEAR(curvature(e, pi / 2), 0.0499, 1e-4);
    double best = 0.0;
    for (int i = 0; i < 100000; ++i)
        best = std::max(best, curvature(e, two_pi * i / 100000));
    EXPECT_NEAR(best / kmax, 1.0, 1e-10);
}

TEST(Radial, UnitCircle)
{
    auto c = make_radial([](double) { return RadialSample {1.0, 0.0, 0.0}; });
    for (double t : {0.0, 1.0, 3.0, 6.0})
        EXPECT_NEAR(curvature(c, t), 1.0, 1e-15);
    EXPECT_THROW(make_radial([](double t) { return RadialSample {std::cos(t), -std::sin(t), -std::cos(t)}; }),
                 InvalidGeometry);
}

TEST(Radial, StarGeometry)
{
    auto s = make_star();
    double rmax = 1.0 + 1e-4 * std::exp(8.0);
    ASSERT_EQ(s.marks().size(), 12u);
    for (const auto& m : s.marks())
        EXPECT_NEAR(s.position(m.t).norm(), rmax, 1e-12);
    // Adjacent cusps subtend pi/6 at the origin.
    Vec2 a = s.position(s.marks()[0].t), b = s.position(s.marks()[1].t);
    EXPECT_NEAR((a - b).norm(), 0.6719, 5e-5);
    EXPECT_NEAR(s.marks()[0].t, pi / 24, 1e-15);
}

TEST(Curvature, DegenerateParametrization)
{
    Curve c(CurveKind::radial, [](double) { return CurvePoint {Vec2(0, 0), Vec2(0, 0), Vec2(0, 0)}; }, {},
            "degenerate", {});
    EXPECT_THROW(curvature(c, 0.0), DegenerateParametrization);
}

TEST(BumpFamily, ConvexCalibration)
{
    for (double k : {50.0, 500.0, 1500.0}) {
        auto c = make_bump_family(1, k);
        double best = 0.0;
        for (int i = 0; i < 400000; ++i)
            best = std::max(best, std::abs(curvature(c, two_pi * i / 400000)));
        EXPECT_NEAR(best, k, 1e-3 * k);
        EXPECT_NEAR(curvature(c, 0.0), k, 1e-3 * k);
        ASSERT_EQ(c.marks().size(), 1u);
        EXPECT_GT(signed_area(c), 0.0);
    }
}

TEST(BumpFamily, GaussianProfileCalibration)
{
    auto c = make_bump_family(1, 500.0, false, BumpProfile::gaussian);
    EXPECT_NEAR(curvature(c, 0.0), 500.0, 0.5);
}

TEST(BumpFamily, ThreeFoldMarks)
{
    auto c = make_bump_family(3, 500.0);
    ASSERT_EQ(c.marks().size(), 3u);
    for (const auto& m : c.marks())
        EXPECT_NEAR(curvature(c, m.t), 500.0, 0.5);
}

TEST(BumpFamily, SymmetryIsExact)
{
    for (int n : {2, 3, 4}) {
        auto c = make_bump_family(n, 200.0);
        for (double t : {0.1, 0.5, 1.3}) {
            double r0 = c.position(t).norm(), r1 = c.position(t + two_pi / n).norm();
            EXPECT_NEAR(r0, r1, 1e-14);
        }
    }
}

TEST(BumpFamily, ConcaveDimple)
{
    auto c = make_bump_family(1, 500.0, true);
    EXPECT_NEAR(curvature(c, 0.0), -500.0, 0.5);
    EXPECT_GT(signed_area(c), 0.0);
}

TEST(BumpFamily, DegenerateMemberIsUnitCircle)
{
    auto c = make_bump_family(1, 1.0);
    for (double t : {0.0, 1.0, 2.0})
        EXPECT_NEAR(c.position(t).norm(), 1.0, 1e-15);
    EXPECT_THROW(make_bump_family(1, 0.5), InvalidParameter);
    EXPECT_THROW(make_bump_family(0, 50.0), InvalidParameter);
}

TEST(Bumps, IndependentCalibration)
{
    auto c = make_bumps(1.0, {{0.4, 0.0, 300.0}, {0.3, 2.5, 120.0}});
    EXPECT_NEAR(curvature(c, 0.0), 300.0, 0.3);
    EXPECT_NEAR(curvature(c, 2.5), 120.0, 0.12);
    EXPECT_EQ(c.kind(), CurveKind::composite);
}

TEST(Curves, InvariantsHoldForEveryKind)
{
    std::vector<Curve> curves {make_circle(1.3), make_ellipse(1.0, 0.3), make_bump_family(1, 50.0),
                               make_bump_family(2, 80.0, true), make_star(),
                               make_bumps(1.0, {{0.4, 1.0, 40.0}})};
    for (const auto& c : curves) {
        EXPECT_NEAR(total_curvature(c), two_pi, 1e-6) << c.name();
        EXPECT_GT(signed_area(c), 0.0) << c.name();
        auto a = c(0.3), b = c(0.3 + two_pi);
        EXPECT_LT((a.x - b.x).norm(), 1e-12);
        EXPECT_LT((a.dx - b.dx).norm(), 1e-9 * std::max(1.0, a.dx.norm()));
        EXPECT_LT((a.ddx - b.ddx).norm(), 1e-9 * std::max(1.0, a.ddx.norm()));
        check_derivatives(c);
    }
}

TEST(Transform, ScaleAndReparametrize)
{
    auto e = make_ellipse(1.0, 0.4);
    auto s = scaled(e, 2.0);
    EXPECT_NEAR(curvature(s, 0.0), 0.5 * curvature(e, 0.0), 1e-12);
    auto r = reparametrized(e, 0.4, 0.3);
    ASSERT_EQ(r.marks().size(), 2u);
    EXPECT_LT((r.position(r.marks()[0].t) - e.position(0.0)).norm(), 1e-12);
    EXPECT_LT((r.position(r.marks()[1].t) - e.position(pi)).norm(), 1e-12);
    for (double t : {0.2, 1.1, 3.3})
        EXPECT_NEAR(curvature(r, t), curvature(e, t + 0.4 + 0.3 * std::sin(t)), 1e-10);
    check_derivatives(r);
}

TEST(Profile, Circle)
{
    auto p = profile(make_circle(1.0), 64);
    EXPECT_NEAR(p.perimeter, two_pi, 1e-10);
    EXPECT_TRUE(p.marks.empty());
    for (std::size_t i = 1; i < p.s.size(); ++i)
        EXPECT_GT(p.s[i], p.s[i - 1]);
    EXPECT_THROW(profile(make_circle(1.0), 8), InvalidParameter);
}

TEST(Profile, EllipseAndBumpMarks)
{
    auto pe = profile(make_ellipse(1.0, 0.05), 512);
    ASSERT_EQ(pe.marks.size(), 2u);
    EXPECT_NEAR(pe.marks[0].kappa, pe.marks[1].kappa, 1e-9);
    auto pb = profile(make_bump_family(4, 500.0), 512);
    ASSERT_EQ(pb.marks.size(), 4u);
    for (const auto& m : pb.marks)
        EXPECT_NEAR(m.kappa / pb.marks[0].kappa, 1.0, 1e-3);
}

TEST(Profile, AutoDetectedMarksAreLocalMaxima)
{
    // A curve without declared marks: an ellipse in radial form.
    double a = 2.0, b = 1.0;
    auto c = make_radial([=](double t) {
        double c = std::cos(t), s = std::sin(t);
        double q = (c * c) / (a * a) + (s * s) / (b * b);
        double dq = 2 * c * s * (1 / (b * b) - 1 / (a * a));
        double ddq = 2 * (c * c - s * s) * (1 / (b * b) - 1 / (a * a));
        double r = std::pow(q, -0.5);
        double dr = -0.5 * std::pow(q, -1.5) * dq;
        double ddr = 0.75 * std::pow(q, -2.5) * dq * dq - 0.5 * std::pow(q, -1.5) * ddq;
        return RadialSample {r, dr, ddr};
    });
    auto p = profile(c, 256);
    ASSERT_EQ(p.marks.size(), 2u);
    EXPECT_NEAR(p.marks[0].t, 0.0, 1e-12);
    EXPECT_NEAR(p.marks[1].t, pi, 1e-12);
    EXPECT_NEAR(p.marks[0].kappa, a / (b * b), 1e-10);
}
