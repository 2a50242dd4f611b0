#include <cmath>
#include <complex>
#include <sstream>

#include <gtest/gtest.h>

#include "nploc/scatter.hpp"

using namespace nploc;

namespace {

using lcplx = std::complex<long double>;

// J_n(z) for integer n and complex z by its power series in long double.
cplx bessel_jn(int n, cplx z)
{
    int a = std::abs(n);
    lcplx lz(z), term = 1.0L;
    for (int i = 1; i <= a; ++i)
        term *= lz / (2.0L * i);
    lcplx sum = term, q = -(lz * lz) / 4.0L;
    for (int m = 1; m < 300; ++m) {
        term *= q / (long double)(m * (m + a));
        sum += term;
        if (std::abs(term) < 1e-22L * std::abs(sum))
            break;
    }
    return cplx(n < 0 && a % 2 ? -sum : sum);
}

cplx hankel_n(int n, double x)
{
    int a = std::abs(n);
    cplx v(std::cyl_bessel_j(a, x), std::cyl_neumann(a, x));
    return n < 0 && a % 2 ? -v : v;
}

// Separation-of-variables solution for the disc of radius a centred at the
// origin, lit by exp(i k x.d) with d = (-1, 0).
struct DiscSeries {
    double a, k;
    cplx kc, e;
    int terms;
    std::vector<cplx> inner, outer; // coefficients of J_n(kc r) and H_n(k r)

    DiscSeries(double a_, double k_, double eps, double delta) : a(a_), k(k_)
    {
        kc = k / std::sqrt(cplx(eps, delta));
        if (kc.imag() < 0.0)
            kc = -kc;
        e = cplx(eps, delta);
        terms = int(std::abs(kc) * a + k * a) + 30;
        for (int n = -terms; n <= terms; ++n) {
            cplx in = std::pow(cplx(0.0, -1.0), n);
            double x = k * a;
            cplx j = bessel_jn(n, x), dj = 0.5 * (bessel_jn(n - 1, x) - bessel_jn(n + 1, x));
            cplx h = hankel_n(n, x), dh = 0.5 * (hankel_n(n - 1, x) - hankel_n(n + 1, x));
            cplx jc = bessel_jn(n, kc * a), djc = 0.5 * (bessel_jn(n - 1, kc * a) - bessel_jn(n + 1, kc * a));
            // A jc - B h = in j;  e kc A djc - k B dh = in k dj
            cplx det = -jc * k * dh + h * e * kc * djc;
            inner.push_back((-in * j * k * dh + h * in * k * dj) / det);
            outer.push_back((jc * in * k * dj - e * kc * djc * in * j) / det);
        }
    }

    cplx field(const Vec2& x) const
    {
        double r = x.norm(), th = std::atan2(x.y(), x.x());
        cplx u = r < a ? 0.0 : std::exp(cplx(0.0, -k * x.x()));
        for (int n = -terms; n <= terms; ++n) {
            cplx ang = std::exp(cplx(0.0, n * th));
            u += r < a ? inner[n + terms] * bessel_jn(n, kc * r) * ang
                       : outer[n + terms] * hankel_n(n, k * r) * ang;
        }
        return u;
    }

    // Exterior radial derivative at r = a.
    cplx flux(double th) const
    {
        double c = std::cos(th);
        cplx d = cplx(0.0, -k * c) * std::exp(cplx(0.0, -k * a * c));
        for (int n = -terms; n <= terms; ++n) {
            cplx dh = 0.5 * (hankel_n(n - 1, k * a) - hankel_n(n + 1, k * a));
            d += outer[n + terms] * k * dh * std::exp(cplx(0.0, n * th));
        }
        return d;
    }

    cplx trace(double th) const
    {
        cplx u = 0.0;
        for (int n = -terms; n <= terms; ++n)
            u += inner[n + terms] * bessel_jn(n, kc * a) * std::exp(cplx(0.0, n * th));
        return u;
    }
};

ScatterConfig disc(double radius, double k = 10.0, double delta = 1e-3)
{
    ScatterConfig c(make_circle(radius));
    c.eps = -1.0;
    c.delta = delta;
    c.k = k;
    return c;
}

} // namespace

TEST(InteriorWavenumber, BranchAndDispersion)
{
    for (double eps : {-1.0, -2.48907, 4.0}) {
        for (double delta : {1e-5, 1e-3, 1.0}) {
            cplx kc = interior_wavenumber(10.0, eps, delta);
            EXPECT_GE(kc.imag(), 0.0);
            EXPECT_NEAR(std::abs(kc * kc * cplx(eps, delta) - 100.0), 0.0, 1e-10);
        }
    }
}

TEST(ScatterConfig, Validation)
{
    auto c = disc(1.0);
    c.delta = 0.0;
    EXPECT_THROW(solve_transmission(c), InvalidParameter);
    c = disc(1.0);
    c.k = -1.0;
    EXPECT_THROW(solve_transmission(c), InvalidParameter);
    c = disc(1.0);
    c.direction = {1.0, 1.0};
    EXPECT_THROW(solve_transmission(c), InvalidParameter);
    c = disc(2.0, 100.0);
    c.panels = 8;
    EXPECT_THROW(solve_transmission(c), ResolutionError);
    c.panels = 0;
    c.node_cap = 256;
    EXPECT_THROW(solve_transmission(c), ResolutionError);
}

TEST(SolveTransmission, AutomaticMeshResolvesWavelength)
{
    auto c = disc(2.0, 40.0);
    auto m = scatter_mesh(c);
    double lambda = two_pi / 40.0;
    for (std::size_t p = 0; p < m.panel_count(); ++p)
        EXPECT_GE(panel_order * lambda / m.panel_length[p], 10.0);
}

TEST(SolveTransmission, DiscMatchesModeSeries)
{
    for (double a : {1.0, 0.02}) {
        auto sol = solve_transmission(disc(a));
        DiscSeries ref(a, 10.0, -1.0, 1e-3);
        double worst = 0.0, scale = 0.0, worst_d = 0.0, scale_d = 0.0;
        for (std::size_t i = 0; i < sol.mesh.size(); ++i) {
            double th = std::atan2(sol.mesh.x[i].y(), sol.mesh.x[i].x());
            cplx u = ref.trace(th), d = ref.flux(th);
            worst = std::max(worst, std::abs(u - sol.boundary(i)));
            scale = std::max(scale, std::abs(u));
            worst_d = std::max(worst_d, std::abs(d - sol.normal_derivative(i)));
            scale_d = std::max(scale_d, std::abs(d));
        }
        EXPECT_LT(worst / scale, 1e-8) << "radius " << a;
        EXPECT_LT(worst_d / scale_d, 1e-8) << "radius " << a;
        // Field values away from the boundary on both sides.
        for (Vec2 x : {Vec2(0.3 * a, 0.1 * a), Vec2(-0.5 * a, 0.2 * a), Vec2(2.0 * a, -1.0 * a),
                       Vec2(0.0, 3.0 * a)}) {
            CellMask where = x.norm() < a ? CellMask::interior : CellMask::exterior;
            EXPECT_LT(std::abs(total_field(sol, x, where) - ref.field(x)), 1e-8 * scale);
        }
    }
}

TEST(SolveTransmission, DiscEnhancementGrowsAsDiscShrinks)
{
    double big = boundary_enhancement(solve_transmission(disc(2.0)));
    double small = boundary_enhancement(solve_transmission(disc(0.002)));
    EXPECT_LT(big, 2.0);
    EXPECT_GT(small, 10.0 * big);
}

TEST(SolveTransmission, ScalingInvariance)
{
    // Solving on s D with wavenumber k equals solving on D with s k.
    auto base = make_bump_family(1, 50.0);
    for (double s : {0.5, 2.0}) {
        ScatterConfig a(scaled(base, s)), b(base);
        a.panels = b.panels = 64;
        a.k = 4.0;
        b.k = 4.0 * s;
        auto sa = solve_transmission(a), sb = solve_transmission(b);
        ASSERT_EQ(sa.mesh.size(), sb.mesh.size());
        EXPECT_LT((sa.boundary - sb.boundary).norm() / sb.boundary.norm(), 1e-9);
        EXPECT_LT((s * sa.phi - sb.phi).norm() / sb.phi.norm(), 1e-9);
        Vec2 x(2.5, 0.7);
        cplx ua = total_field(sa, s * x, CellMask::exterior), ub = total_field(sb, x, CellMask::exterior);
        EXPECT_LT(std::abs(ua - ub), 1e-9 * std::abs(ub));
    }
}

TEST(SolveTransmission, OffNodeResiduals)
{
    auto c = disc(1.0);
    auto r = transmission_residual(solve_transmission(c));
    EXPECT_LT(r.value, 1e-8);
    EXPECT_LT(r.flux, 1e-8);
    EXPECT_EQ(r.points, 32u * 15u);

    ScatterConfig b(scaled(make_bump_family(1, 500.0), 1.6));
    auto rb = transmission_residual(solve_transmission(b), 3);
    EXPECT_LT(rb.value, 1e-4);
    EXPECT_LT(rb.flux, 1e-4);
}

TEST(SolveTransmission, LargeLossIsStable)
{
    auto c = disc(1.0, 10.0, 1e6);
    auto sol = solve_transmission(c);
    EXPECT_TRUE(sol.warnings.empty());
    EXPECT_TRUE(sol.boundary.allFinite());
    EXPECT_LT(boundary_enhancement(sol), 3.0);
    EXPECT_LT(transmission_residual(sol, 4).value, 1e-8);
}

TEST(SolveTransmission, ExteriorFieldSolvesHelmholtz)
{
    auto sol = solve_transmission(disc(0.5, 4.0));
    Box box {0.8, 1.6, -0.4, 0.4};
    auto coarse = render_total_field(sol, box, 9, 9);
    auto fine = render_total_field(sol, box, 17, 17);
    double rc = laplacian_residual(coarse, 16.0, CellMask::exterior);
    double rf = laplacian_residual(fine, 16.0, CellMask::exterior);
    EXPECT_GT(rc / rf, 3.0);
    EXPECT_LT(rc / rf, 5.5);
}

TEST(RenderWindows, OneGridPerWindow)
{
    auto c = disc(0.5, 4.0);
    c.windows = {box_around({0.0, 0.0}, 1.0), box_around({0.5, 0.0}, 0.1)};
    c.grid_nx = c.grid_ny = 11;
    auto sol = solve_transmission(c);
    render_windows(sol);
    ASSERT_EQ(sol.grids.size(), 2u);
    EXPECT_EQ(sol.grids[0].source, "total_field");
    EXPECT_EQ(sol.grids[1].values.size(), 121u);
}

TEST(EnergyProxy, ZeroFieldAndLinearInDelta)
{
    auto m = build_mesh(make_circle(1.0), 32);
    FieldGrid g = render(m, box_around({0.0, 0.0}, 1.0), 41, 41, [](const Vec2&, CellMask) { return cplx(0.0); });
    EXPECT_EQ(energy_proxy(g, m, 1e-3).energy, 0.0);

    // u = x inside the unit disc: |grad u|^2 = 1.
    FieldGrid h = render(m, box_around({0.0, 0.0}, 1.0), 81, 81,
                         [](const Vec2& x, CellMask) { return cplx(x.x(), 0.0); });
    auto e1 = energy_proxy(h, m, 1e-3), e2 = energy_proxy(h, m, 2e-3);
    EXPECT_NEAR(e2.energy, 2.0 * e1.energy, 1e-15);
    EXPECT_NEAR(e1.energy, 0.5e-3 * std::numbers::pi * e1.coverage, 0.1e-3);
    EXPECT_FALSE(e1.warnings.empty()); // 32 panels leave a wide excluded band
    EXPECT_LT(e1.coverage, 0.8);
    EXPECT_THROW(energy_proxy(h, m, 0.0), InvalidParameter);
}

TEST(EnergyProxy, UpsamplingRaisesCoverage)
{
    auto sol = solve_transmission(disc(1.0, 2.0));
    auto g0 = interior_grid(sol, 41, 0);
    auto e0 = energy_proxy(g0, sol.mesh, sol.config.delta);
    auto e2 = energy_proxy(sol, 41, 2);
    EXPECT_LT(e0.coverage, 0.8);
    EXPECT_GT(e2.coverage, 0.8);
    EXPECT_TRUE(e2.warnings.empty());
    EXPECT_GE(e2.energy, 0.0);
}

TEST(EnergyProxy, VanishesWithLossOffResonance)
{
    double prev = std::numeric_limits<double>::infinity();
    for (double delta : {1e-2, 1e-3, 1e-4}) {
        auto sol = solve_transmission(disc(2.0, 10.0, delta));
        auto e = energy_proxy(sol, 41, 2);
        EXPECT_GE(e.energy, 0.0);
        EXPECT_LT(e.energy, prev);
        prev = e.energy;
    }
}

TEST(Upsampled, InterpolatesSmoothDensity)
{
    auto c = make_ellipse(1.0, 0.5);
    auto m = build_mesh(c, 16);
    Eigen::VectorXcd f(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        f(i) = std::cos(3.0 * m.t[i]);
    auto [fine, g] = upsampled(c, m, f, 1);
    ASSERT_EQ(fine.size(), 2 * m.size());
    for (std::size_t i = 0; i < fine.size(); ++i)
        EXPECT_NEAR(g(i).real(), std::cos(3.0 * fine.t[i]), 1e-12);
}

TEST(Localization, CircleIsFlatBumpConcentrates)
{
    ScatterConfig tmpl(make_circle(1.0));
    auto rows = localization_experiment([](double k) { return make_bump_family(1, k); }, {1.0, 50.0}, tmpl);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_NEAR(rows[0].ratio, 1.0, 0.05);
    EXPECT_NEAR(rows[0].scale, 2.0, 1e-3);
    EXPECT_GT(rows[1].ratio, 5.0);
    EXPECT_LT(rows[1].peak_panels, 2.0);
    EXPECT_THROW(localization_experiment([](double k) { return make_bump_family(1, k); }, {50.0, 10.0}, tmpl),
                 InvalidParameter);
}

TEST(Localization, EllipseIlluminatedVertexDominates)
{
    ScatterConfig c(make_ellipse(1.0, 0.05));
    c.delta = 1e-4;
    auto sol = solve_transmission(c);
    double star = 0.0, circ = 0.0, middle = 0.0;
    for (std::size_t i = 0; i < sol.mesh.size(); ++i) {
        double v = std::abs(sol.boundary(i)), x = sol.mesh.x[i].x();
        if (x > 0.8)
            star = std::max(star, v);
        else if (x < -0.8)
            circ = std::max(circ, v);
        else if (std::abs(x) < 1.0 / 3.0)
            middle = std::max(middle, v);
    }
    EXPECT_GE(star, circ);
    EXPECT_GT(circ, middle);
}

TEST(StarDemo, ReportedLengths)
{
    EXPECT_EQ(fixed_text(two_pi / 0.01, 2), "628.32");
    double r = 1.0 + 1e-4 * std::exp(8.0);
    auto star = make_star();
    Vec2 a = star.position(star.marks()[0].t), b = star.position(star.marks()[1].t);
    EXPECT_NEAR(a.norm(), r, 1e-12);
    EXPECT_EQ(fixed_text((a - b).norm(), 4), "0.6719");
}

TEST(Reports, RunSummaryCsv)
{
    std::ostringstream os;
    RunSummaryRow r;
    r.label = "disc";
    r.kappa_max = 0.5;
    r.energy = 1e-3;
    r.nodes = 512;
    write_run_summary(os, {r});
    std::istringstream in(os.str());
    std::string head, row;
    std::getline(in, head);
    std::getline(in, row);
    EXPECT_EQ(head, "label,kappa_max,energy,coverage,enhancement,localization_ratio,rcond,nodes");
    EXPECT_EQ(row.substr(0, 9), "disc,0.5,");
    EXPECT_EQ(row.substr(row.size() - 4), ",512");
}
