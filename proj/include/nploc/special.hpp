#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "nploc/errors.hpp"

namespace nploc {

using cplx = std::complex<double>;

inline constexpr double euler_gamma = std::numbers::egamma;

/** Below this |z| Bessel functions come from power series, above from asymptotics. */
inline constexpr double hankel_switch_radius = 17.0;

enum class HankelRoute { series, asymptotic };

struct HankelValue {
    cplx z;
    cplx value;
    HankelRoute route;
};

namespace detail {

using lcplx = std::complex<long double>;

inline constexpr long double series_eps = 1e-21L;

// Power series pieces at w = z^2 / 4:
//   J0, J1 / (z/2), and the entire parts of Y0, Y1 left after removing the
//   logarithmic and pole terms.
struct BesselSeries {
    lcplx j0;
    lcplx j0_minus_one;
    lcplx j1_over_half_z;
    lcplx y0_sum; // sum_{m>=1} (-1)^{m+1} H_m w^m / (m!)^2
    lcplx y1_sum; // sum_{m>=0} (-1)^m (psi(m+1) + psi(m+2)) w^m / (m! (m+1)!)
};

inline BesselSeries bessel_series(cplx z)
{
    const long double g = euler_gamma;
    lcplx w = lcplx(z) * lcplx(z) / 4.0L;
    BesselSeries s {1.0L, 0.0L, 1.0L, 0.0L, (-g + 1.0L - g)};
    lcplx term0 = 1.0L; // (-w)^m / (m!)^2
    lcplx term1 = 1.0L; // (-w)^m / (m! (m+1)!)
    long double harm = 0.0L;
    for (int m = 1; m < 200; ++m) {
        term0 *= -w / (long double)(m * m);
        term1 *= -w / (long double)(m * (m + 1));
        harm += 1.0L / m;
        s.j0 += term0;
        s.j0_minus_one += term0;
        s.j1_over_half_z += term1;
        s.y0_sum -= harm * term0;
        s.y1_sum += (2.0L * -g + 2.0L * harm + 1.0L / (m + 1)) * term1;
        long double mag = std::abs(term0) * (1.0L + harm);
        if (mag < series_eps * (1.0L + std::abs(s.j0)) && m > 2)
            break;
    }
    return s;
}

// Hankel asymptotic expansion of H^(1)_nu, nu in {0, 1}.
inline cplx hankel1_asymptotic(int nu, cplx z)
{
    const double mu = 4.0 * nu * nu;
    cplx sum = 1.0, term = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 60; ++k) {
        double a = (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k);
        term *= cplx(0.0, 1.0) * a / z;
        double mag = std::abs(term);
        if (mag > prev)
            break;
        sum += term;
        prev = mag;
        if (mag < 1e-17 * std::abs(sum))
            break;
    }
    const double phase = -(nu * 0.5 + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * z)) * std::exp(cplx(0.0, 1.0) * (z + phase)) * sum;
}

inline cplx hankel2_asymptotic(int nu, cplx z)
{
    return std::conj(hankel1_asymptotic(nu, std::conj(z)));
}

} // namespace detail

inline void require_upper_half_plane(cplx z)
{
    if (z.imag() < 0.0)
        throw InvalidParameter("argument must satisfy Im z >= 0");
}

/** Series coefficient b_n of -(i/4) H0(z) = (1/2pi) ln z + tau_1 + sum (b_n ln z + c_n) z^{2n}. */
inline double hankel_series_b(int n)
{
    double f = 1.0;
    for (int m = 1; m <= n; ++m)
        f *= 4.0 * m * m;
    return (n % 2 ? -1.0 : 1.0) / (2.0 * std::numbers::pi * f);
}

inline cplx hankel_series_c(int n)
{
    double harm = 0.0;
    for (int m = 1; m <= n; ++m)
        harm += 1.0 / m;
    return hankel_series_b(n) *
           cplx(euler_gamma - std::numbers::ln2 - harm, -0.5 * std::numbers::pi);
}

/** The constant in -(i/4) H0(k r) = (1/2pi) ln r + tau(k) + O((kr)^2 ln(kr)). */
inline cplx helmholtz_tau(cplx k)
{
    return (std::log(k) + euler_gamma - std::numbers::ln2) / (2.0 * std::numbers::pi) -
           cplx(0.0, 0.25);
}

inline HankelValue hankel_h0(cplx z)
{
    require_upper_half_plane(z);
    if (z == 0.0)
        throw InvalidParameter("H0 has a logarithmic singularity at z = 0");
    if (std::abs(z) > hankel_switch_radius)
        return {z, detail::hankel1_asymptotic(0, z), HankelRoute::asymptotic};
    using detail::lcplx;
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    lcplx lz = std::log(lcplx(z));
    lcplx z2 = lcplx(z) * lcplx(z);
    lcplx sum = lz / two_pi +
                (std::numbers::egamma_v<long double> - std::numbers::ln2_v<long double>) / two_pi -
                lcplx(0.0L, 0.25L);
    // b_n and c_n are built incrementally in long double.
    long double b = 1.0L / two_pi, harm = 0.0L;
    lcplx p = 1.0L;
    for (int n = 1; n < 200; ++n) {
        b *= -1.0L / (4.0L * n * n);
        harm += 1.0L / n;
        p *= z2;
        lcplx c = b * lcplx(std::numbers::egamma_v<long double> - std::numbers::ln2_v<long double> -
                                harm,
                            -0.5L * std::numbers::pi_v<long double>);
        lcplx term = (b * lz + c) * p;
        sum += term;
        if (std::abs(term) < 1e-21L * std::abs(sum) && n > 2)
            break;
    }
    // -(i/4) H0 = sum  =>  H0 = 4 i sum.
    lcplx h = lcplx(0.0L, 4.0L) * sum;
    return {z, cplx(h), HankelRoute::series};
}

inline cplx hankel_h1(cplx z)
{
    require_upper_half_plane(z);
    if (z == 0.0)
        throw InvalidParameter("H1 has a pole at z = 0");
    if (std::abs(z) > hankel_switch_radius)
        return detail::hankel1_asymptotic(1, z);
    using detail::lcplx;
    auto s = detail::bessel_series(z);
    const long double pi = std::numbers::pi_v<long double>;
    lcplx lz = lcplx(z), half = lz / 2.0L;
    lcplx j1 = half * s.j1_over_half_z;
    lcplx y1 = -2.0L / (pi * lz) + (2.0L / pi) * std::log(half) * j1 - half * s.y1_sum / pi;
    return cplx(j1 + lcplx(0.0L, 1.0L) * y1);
}

inline cplx bessel_j0(cplx z)
{
    if (std::abs(z) > hankel_switch_radius)
        return 0.5 * (detail::hankel1_asymptotic(0, z) + detail::hankel2_asymptotic(0, z));
    return cplx(detail::bessel_series(z).j0);
}

inline cplx bessel_j1(cplx z)
{
    if (std::abs(z) > hankel_switch_radius)
        return 0.5 * (detail::hankel1_asymptotic(1, z) + detail::hankel2_asymptotic(1, z));
    auto s = detail::bessel_series(z);
    return cplx(detail::lcplx(z) / 2.0L * s.j1_over_half_z);
}

/**
 * Smooth parts of the Helmholtz kernels for wavenumber k at distance r > 0:
 *
 *   -(i/4) H0(k r)            = (1/2pi) J0(k r) ln r + g_smooth
 *   (i k / 4) H1(k r)         = 1/(2 pi r) - (k/2pi) J1(k r) ln r + d_smooth
 *
 * Both smooth parts extend analytically to r = 0 where g_smooth = tau(k)
 * and d_smooth = 0.
 */
struct KernelSplit {
    cplx j0;
    cplx g_smooth;
    cplx j1;
    cplx d_smooth;
    // -(i/4) H0(kr) - (1/2pi) ln r - tau(k), accurate for small kr.
    cplx g_minus_static;
    // (i k/4) H1(kr) - 1/(2 pi r), accurate for small kr.
    cplx d_minus_static;
};

inline KernelSplit kernel_split(cplx k, double r)
{
    using detail::lcplx;
    const long double pi = std::numbers::pi_v<long double>;
    const long double two_pi = 2.0L * pi;
    KernelSplit out;
    cplx z = k * r;
    if (r > 0.0 && std::abs(z) > hankel_switch_radius) {
        cplx h0 = detail::hankel1_asymptotic(0, z), h1 = detail::hankel1_asymptotic(1, z);
        out.j0 = bessel_j0(z);
        out.j1 = bessel_j1(z);
        double lr = std::log(r);
        cplx g = cplx(0.0, -0.25) * h0;
        cplx d = cplx(0.0, 0.25) * k * h1;
        out.g_smooth = g - out.j0 * lr / (2.0 * std::numbers::pi);
        out.d_smooth = d - 1.0 / (2.0 * std::numbers::pi * r) + k * out.j1 * lr / (2.0 * std::numbers::pi);
        out.g_minus_static = g - lr / (2.0 * std::numbers::pi) - helmholtz_tau(k);
        out.d_minus_static = d - 1.0 / (2.0 * std::numbers::pi * r);
        return out;
    }
    auto s = detail::bessel_series(z);
    lcplx lk = lcplx(k);
    lcplx half = lcplx(z) / 2.0L;
    lcplx j0 = s.j0, j1 = half * s.j1_over_half_z;
    lcplx lnk2 = std::log(lk / 2.0L);
    const long double g = std::numbers::egamma_v<long double>;
    // Y0 = (2/pi) ln(z/2) J0 + (2/pi)(gamma J0 + y0_sum)
    // -(i/4)H0 = -(i/4) J0 + Y0 / 4
    lcplx g_smooth = j0 * (lnk2 / two_pi - lcplx(0.0L, 0.25L)) + (g * j0 + s.y0_sum) / two_pi;
    // Y1 = -2/(pi z) + (2/pi) ln(z/2) J1 - (z/2) y1_sum / pi
    // (ik/4) H1 = (ik/4) J1 - (k/4) Y1
    lcplx d_smooth = lk * (lcplx(0.0L, 0.25L) * j1 - lnk2 * j1 / two_pi + half * s.y1_sum / (4.0L * pi));
    out.j0 = cplx(j0);
    out.j1 = cplx(j1);
    out.g_smooth = cplx(g_smooth);
    out.d_smooth = cplx(d_smooth);
    if (r > 0.0) {
        long double lr = std::log((long double)r);
        // J0 - 1 and the remainder of g_smooth - tau without cancellation.
        lcplx j0m1 = s.j0_minus_one;
        lcplx gs_minus_tau = j0m1 * (lnk2 / two_pi - lcplx(0.0L, 0.25L)) + (g * j0m1 + s.y0_sum) / two_pi;
        out.g_minus_static = cplx(j0m1 * lr / two_pi + gs_minus_tau);
        out.d_minus_static = cplx(-lk * j1 * lr / two_pi + d_smooth);
    } else {
        out.g_minus_static = 0.0;
        out.d_minus_static = 0.0;
    }
    return out;
}

/** Helmholtz fundamental solution -(i/4) H0(k r). */
inline cplx helmholtz_green(cplx k, double r)
{
    return cplx(0.0, -0.25) * hankel_h0(k * r).value;
}

} // namespace nploc
