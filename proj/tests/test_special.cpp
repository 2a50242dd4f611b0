#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "nploc/special.hpp"

using namespace nploc;

namespace {

// Reference values from the standard library's real-order Bessel functions.
cplx ref_h0(double x) { return {std::cyl_bessel_j(0.0, x), std::cyl_neumann(0.0, x)}; }
cplx ref_h1(double x) { return {std::cyl_bessel_j(1.0, x), std::cyl_neumann(1.0, x)}; }

} // namespace

TEST(Hankel, MatchesStandardLibraryOnRealAxis)
{
    for (double x : {1e-4, 1e-2, 0.1, 0.5, 1.0, 2.5, 5.0, 7.9, 8.1, 12.0, 16.9, 17.1, 25.0, 50.0}) {
        cplx h0 = hankel_h0(x).value, h1 = hankel_h1(x);
        double tol = 1e-12 * std::max(1.0, std::abs(ref_h0(x)));
        EXPECT_NEAR(h0.real(), ref_h0(x).real(), tol) << x;
        EXPECT_NEAR(h0.imag(), ref_h0(x).imag(), tol) << x;
        double tol1 = 1e-12 * std::max(1.0, std::abs(ref_h1(x)));
        EXPECT_NEAR(h1.real(), ref_h1(x).real(), tol1) << x;
        EXPECT_NEAR(h1.imag(), ref_h1(x).imag(), tol1) << x;
    }
}

TEST(Hankel, KnownValueAtOne)
{
    cplx h = hankel_h0(1.0).value;
    EXPECT_NEAR(h.real(), 0.7651976865579666, 1e-14);
    EXPECT_NEAR(h.imag(), 0.0882569642156769, 1e-14);
}

TEST(Hankel, RouteSwitchIsContinuous)
{
    // Both routes evaluated at the same point on the switch circle.
    // Wavenumbers used by the solvers lie in the closed first quadrant or just past it.
    for (double phase : {0.0, 0.3, 0.8, 1.2, 1.5707963267948966, 1.7, 2.0}) {
        cplx z = std::polar(hankel_switch_radius, phase);
        ASSERT_EQ(hankel_h0(z).route, HankelRoute::series);
        cplx a = hankel_h0(z).value, b = detail::hankel1_asymptotic(0, z);
        EXPECT_LT(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a))) << phase;
        cplx c = hankel_h1(z), d = detail::hankel1_asymptotic(1, z);
        EXPECT_LT(std::abs(c - d), 1e-10 * std::max(1.0, std::abs(c))) << phase;
    }
    EXPECT_EQ(hankel_h0(hankel_switch_radius * 1.001).route, HankelRoute::asymptotic);
}

TEST(Hankel, Wronskian)
{
    for (double x = 0.1; x <= 50.0; x *= 1.37) {
        cplx h0 = hankel_h0(x).value, h1 = hankel_h1(x);
        // J0 Y0' - J0' Y0 with Y0' = -Y1, J0' = -J1
        double w = -h0.real() * h1.imag() + h1.real() * h0.imag();
        EXPECT_NEAR(w, 2.0 / (std::numbers::pi * x), 1e-10) << x;
    }
}

TEST(Hankel, ImaginaryAxisMatchesModifiedBessel)
{
    // H0(i y) = (2 / (i pi)) K0(y)
    for (double y : {0.05, 1.0, 4.0, 10.0, 16.0}) {
        cplx h = hankel_h0(cplx(0.0, y)).value;
        cplx ref = cplx(0.0, -2.0 / std::numbers::pi) * std::cyl_bessel_k(0.0, y);
        EXPECT_LT(std::abs(h - ref), 1e-11 * std::max(1.0, std::abs(ref))) << y;
    }
    // J0(i y) = I0(y)
    for (double y : {0.5, 10.0, 20.0, 30.0}) {
        cplx j = bessel_j0(cplx(0.0, y));
        EXPECT_NEAR(j.real() / std::cyl_bessel_i(0.0, y), 1.0, 1e-12) << y;
        EXPECT_NEAR(j.imag(), 0.0, 1e-12 * std::abs(j));
    }
}

TEST(Hankel, RejectsOriginAndLowerHalfPlane)
{
    EXPECT_THROW(hankel_h0(0.0), InvalidParameter);
    EXPECT_THROW(hankel_h0(cplx(1.0, -0.1)), InvalidParameter);
}

TEST(Hankel, SeriesCoefficients)
{
    EXPECT_NEAR(hankel_series_b(1), -1.0 / (8.0 * std::numbers::pi), 1e-16);
    // c_n from a direct Taylor fit of -(i/4) H0(z) - (1/2pi) ln z - tau_1 at tiny z.
    double z = 1e-3;
    cplx lhs = cplx(0.0, -0.25) * hankel_h0(z).value - std::log(z) / (2 * std::numbers::pi) -
               helmholtz_tau(1.0);
    cplx lead = (hankel_series_b(1) * std::log(z) + hankel_series_c(1)) * z * z;
    EXPECT_LT(std::abs(lhs - lead), 1e-4 * std::abs(lead));
}

TEST(Hankel, QuasiStaticRemainderScalesLikeZSquaredLogZ)
{
    std::vector<double> ratios;
    for (double z : {1e-2, 1e-3, 1e-4}) {
        cplx rem = cplx(0.0, -0.25) * hankel_h0(z).value - std::log(z) / (2 * std::numbers::pi) -
                   helmholtz_tau(1.0);
        ratios.push_back(std::abs(rem) / (z * z * std::abs(std::log(z))));
    }
    for (double r : ratios) {
        EXPECT_GT(r, 0.5 * ratios.front());
        EXPECT_LT(r, 2.0 * ratios.front());
    }
}

TEST(KernelSplit, ReassemblesTheKernels)
{
    for (cplx k : {cplx(10.0, 0.0), cplx(0.01, 0.0), cplx(0.05, 9.9), cplx(3.0, 1.0)}) {
        for (double r : {1e-3, 0.05, 0.4, 1.7, 3.0}) {
            auto s = kernel_split(k, r);
            cplx g = cplx(0.0, -0.25) * hankel_h0(k * r).value;
            cplx d = cplx(0.0, 0.25) * k * hankel_h1(k * r);
            double lr = std::log(r), tp = 2 * std::numbers::pi;
            double scale = std::max(1.0, std::abs(s.j0) * std::abs(lr));
            EXPECT_LT(std::abs(s.j0 * lr / tp + s.g_smooth - g), 1e-12 * scale) << k << " " << r;
            double dscale = std::max(1.0 / r, std::abs(k * s.j1 * lr));
            EXPECT_LT(std::abs(1.0 / (tp * r) - k * s.j1 * lr / tp + s.d_smooth - d), 1e-12 * dscale)
                << k << " " << r;
            EXPECT_LT(std::abs(s.g_minus_static - (g - lr / tp - helmholtz_tau(k))), 1e-12 * scale);
        }
        auto s0 = kernel_split(k, 0.0);
        EXPECT_LT(std::abs(s0.g_smooth - helmholtz_tau(k)), 1e-14);
        EXPECT_LT(std::abs(s0.d_smooth), 1e-14);
    }
}

TEST(KernelSplit, SmallWavenumberDifferenceHasNoCancellation)
{
    // g - static ~ b_1 (kr)^2 ln(kr) at tiny kr; check relative accuracy.
    double k = 1e-4, r = 0.5, z = k * r;
    auto s = kernel_split(k, r);
    cplx lead = (hankel_series_b(1) * std::log(z) + hankel_series_c(1)) * z * z;
    EXPECT_LT(std::abs(s.g_minus_static - lead), 1e-6 * std::abs(lead));
}
