#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nploc/errors.hpp"
#include "nploc/fieldeval.hpp"
#include "nploc/geometry.hpp"
#include "nploc/lapack.hpp"
#include "nploc/layerpot.hpp"
#include "nploc/legendre.hpp"
#include "nploc/quadrature.hpp"
#include "nploc/special.hpp"
#include "nploc/spectral.hpp"
#include "nploc/sweep.hpp"

namespace nploc {

/**
 * Plasmonic inclusion with permittivity eps + i delta inside the curve and 1
 * outside, lit by the plane wave exp(i k x.d).
 */
struct ScatterConfig {
    explicit ScatterConfig(Curve c) : curve(std::move(c)) {}

    Curve curve;
    double eps = -1.0;
    double delta = 1e-3;
    double k = 10.0;
    Vec2 direction {-1.0, 0.0};
    // Rendered into ScatterSolution::grids when non-empty.
    std::vector<Box> windows;
    int grid_nx = 81;
    int grid_ny = 81;
    // 0 starts from 32 graded panels and refines until resolved.
    int panels = 0;
    bool graded = true;
    // Graded meshes split panels while max kappa times arc length exceeds this.
    double grade_threshold = 0.5;
    double nodes_per_wavelength = 10.0;
    // Upper bound on max kappa times arc length per panel.
    double curvature_resolution = 1.0;
    std::size_t node_cap = 4096;
    // rcond below this adds a near-singular warning.
    double rcond_warning = 1e-12;
};

struct ScatterSolution {
    explicit ScatterSolution(ScatterConfig c) : config(std::move(c)) {}

    ScatterConfig config;
    PanelMesh mesh;
    cplx kc;
    Eigen::VectorXcd psi;      // interior density, u = S^{kc}[psi] inside
    Eigen::VectorXcd phi;      // exterior density, u = u_i + S^k[phi] outside
    Eigen::VectorXcd incident; // u_i at the nodes
    Eigen::VectorXcd boundary; // total field at the nodes
    Eigen::VectorXcd normal_derivative; // du/dn on the exterior side
    double rcond = 0.0;
    std::vector<FieldGrid> grids;
    std::vector<std::string> warnings;

    cplx permittivity() const { return {config.eps, config.delta}; }
};

/** k / sqrt(eps + i delta) on the branch with non-negative imaginary part. */
inline cplx interior_wavenumber(double k, double eps, double delta)
{
    cplx kc = k / std::sqrt(cplx(eps, delta));
    return kc.imag() < 0.0 ? -kc : kc;
}

inline cplx plane_wave(const ScatterConfig& c, const Vec2& x)
{
    return std::exp(cplx(0.0, c.k * x.dot(c.direction)));
}

inline cplx plane_wave_normal(const ScatterConfig& c, const Vec2& x, const Vec2& nu)
{
    return cplx(0.0, c.k * c.direction.dot(nu)) * plane_wave(c, x);
}

inline void validate(const ScatterConfig& c)
{
    if (!(c.delta > 0.0) || !std::isfinite(c.delta))
        throw InvalidParameter("loss delta must be positive");
    if (!(c.k > 0.0) || !std::isfinite(c.k))
        throw InvalidParameter("wavenumber k must be positive");
    if (!std::isfinite(c.eps))
        throw InvalidParameter("permittivity must be finite");
    if (std::abs(c.direction.norm() - 1.0) > 1e-12)
        throw InvalidParameter("incident direction must be a unit vector");
    if (c.panels < 0 || !(c.nodes_per_wavelength > 0.0) || !(c.curvature_resolution > 0.0) ||
        !(c.grade_threshold > 0.0))
        throw InvalidParameter("mesh knobs must be positive");
    if (c.grid_nx < 2 || c.grid_ny < 2)
        throw InvalidParameter("grid needs at least 2 points per direction");
}

namespace detail {

// Panels that fail either the wavelength or the curvature criterion.
inline std::vector<bool> unresolved_panels(const Curve& c, const PanelMesh& m, double wavenumber,
                                           const ScatterConfig& cfg)
{
    std::vector<bool> bad(m.panel_count(), false);
    double lambda = two_pi / wavenumber;
    for (std::size_t p = 0; p < m.panel_count(); ++p) {
        double len = m.panel_length[p];
        bool waves = panel_order * lambda / len < cfg.nodes_per_wavelength;
        bool bend = panel_max_kappa(c, m.panels[p]) * len > cfg.curvature_resolution;
        bad[p] = waves || bend;
    }
    return bad;
}

} // namespace detail

/**
 * Mesh for a transmission solve. With cfg.panels == 0 a 32-panel graded
 * mesh is split until every panel carries nodes_per_wavelength nodes per
 * wavelength of the faster of k and kc; an explicit panel count is only
 * checked.
 */
inline PanelMesh scatter_mesh(const ScatterConfig& cfg)
{
    validate(cfg);
    double wavenumber = std::max(cfg.k, std::abs(interior_wavenumber(cfg.k, cfg.eps, cfg.delta)));
    MeshOptions opt;
    opt.graded = cfg.graded;
    opt.grade_threshold = cfg.grade_threshold;
    if (cfg.panels > 0) {
        PanelMesh m = build_mesh(cfg.curve, cfg.panels, opt);
        auto bad = detail::unresolved_panels(cfg.curve, m, wavenumber, cfg);
        if (std::find(bad.begin(), bad.end(), true) != bad.end())
            throw ResolutionError("mesh with " + std::to_string(cfg.panels) +
                                  " panels under-resolves the wavelength or the curvature");
        return m;
    }
    int start = cfg.graded ? 32 : default_panel_count(kappa_max_of(cfg.curve));
    PanelMesh m = build_mesh(cfg.curve, start, opt);
    for (;;) {
        if (m.size() > cfg.node_cap)
            throw ResolutionError("resolving the curve and the wavelength needs " +
                                  std::to_string(m.size()) + " nodes, above the cap of " +
                                  std::to_string(cfg.node_cap));
        auto bad = detail::unresolved_panels(cfg.curve, m, wavenumber, cfg);
        if (std::find(bad.begin(), bad.end(), true) == bad.end())
            return m;
        m = build_mesh(cfg.curve, detail::split(m.panels, bad));
    }
}

/**
 * Solves the transmission problem with u = S^{kc}[psi] inside and
 * u = u_i + S^k[phi] outside. Continuity of u and of the flux
 * (eps + i delta) du/dn from inside = du/dn from outside give
 *   S^{kc} psi - S^k phi = u_i
 *   (eps + i delta)(-1/2 + K^{kc*}) psi - (1/2 + K^{k*}) phi = du_i/dn.
 */
inline ScatterSolution solve_transmission(const ScatterConfig& cfg)
{
    ScatterSolution sol(cfg);
    sol.mesh = scatter_mesh(cfg);
    const PanelMesh& m = sol.mesh;
    const Eigen::Index n = static_cast<Eigen::Index>(m.size());
    sol.kc = interior_wavenumber(cfg.k, cfg.eps, cfg.delta);
    cplx e = sol.permittivity();

    Eigen::MatrixXcd a(2 * n, 2 * n);
    {
        auto s_in = assemble_sl_k(m, sol.kc);
        a.topLeftCorner(n, n) = s_in.matrix;
    }
    {
        auto s_out = assemble_sl_k(m, cfg.k);
        a.topRightCorner(n, n) = -s_out.matrix;
    }
    {
        auto k_in = assemble_np_k(m, sol.kc);
        k_in.matrix.diagonal().array() -= 0.5;
        a.bottomLeftCorner(n, n) = e * k_in.matrix;
    }
    {
        auto k_out = assemble_np_k(m, cfg.k);
        k_out.matrix.diagonal().array() += 0.5;
        a.bottomRightCorner(n, n) = -k_out.matrix;
    }

    Eigen::VectorXcd rhs(2 * n);
    sol.incident.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        sol.incident(i) = plane_wave(cfg, m.x[i]);
        rhs(i) = sol.incident(i);
        rhs(n + i) = plane_wave_normal(cfg, m.x[i], m.normal[i]);
    }

    Eigen::MatrixXcd s_in = a.topLeftCorner(n, n);
    Eigen::MatrixXcd k_out = a.bottomRightCorner(n, n);
    lapack::ComplexLU lu(std::move(a));
    if (lu.singular())
        throw NumericalFailure("transmission system is exactly singular");
    sol.rcond = lu.rcond();
    if (sol.rcond < cfg.rcond_warning) {
        std::ostringstream w;
        w << "near-singular transmission system, rcond = " << sol.rcond;
        sol.warnings.push_back(w.str());
    }
    Eigen::VectorXcd x = lu.solve(rhs);
    sol.psi = x.head(n);
    sol.phi = x.tail(n);
    sol.boundary = s_in * sol.psi;
    sol.normal_derivative = rhs.tail(n) - k_out * sol.phi;
    return sol;
}

// ---------------------------------------------------------------------------
// Fields

/** Total field at x: transmitted inside, incident plus scattered outside. */
inline cplx total_field(const ScatterSolution& sol, const Vec2& x, CellMask where)
{
    if (where == CellMask::interior)
        return single_layer_at(sol.mesh, sol.psi, x, sol.kc);
    return plane_wave(sol.config, x) + single_layer_at(sol.mesh, sol.phi, x, sol.config.k);
}

inline FieldGrid render_total_field(const ScatterSolution& sol, const Box& box, int nx, int ny)
{
    return render(
        sol.mesh, box, nx, ny, [&](const Vec2& x, CellMask c) { return total_field(sol, x, c); },
        "total_field");
}

/** Renders every configured window into sol.grids. */
inline void render_windows(ScatterSolution& sol)
{
    sol.grids.clear();
    for (const auto& b : sol.config.windows)
        sol.grids.push_back(render_total_field(sol, b, sol.config.grid_nx, sol.config.grid_ny));
}

/** |grad u| at the nodes from the tangential and exterior normal derivatives. */
inline Eigen::VectorXd boundary_gradient(const ScatterSolution& sol)
{
    Eigen::VectorXcd ds = conormal_derivative(sol.mesh, sol.boundary);
    return (ds.cwiseAbs2() + sol.normal_derivative.cwiseAbs2()).cwiseSqrt();
}

/** Largest |u| / |u_i| over the boundary nodes; |u_i| = 1. */
inline double boundary_enhancement(const ScatterSolution& sol)
{
    return sol.boundary.cwiseAbs().maxCoeff();
}

namespace detail {

// Lagrange weights of the 16 Gauss nodes at local coordinate tau.
inline std::array<double, panel_order> interpolation_row(double tau)
{
    const auto& g = gauss_legendre_16();
    std::array<double, panel_order> p {}, pj {}, out {};
    legendre_values(tau, panel_order - 1, p.data());
    for (int j = 0; j < panel_order; ++j) {
        legendre_values(g.nodes[j], panel_order - 1, pj.data());
        double s = 0.0;
        for (int k = 0; k < panel_order; ++k)
            s += 0.5 * (2 * k + 1) * pj[k] * p[k];
        out[j] = s * g.weights[j];
    }
    return out;
}

inline std::size_t panel_containing(const PanelMesh& m, double t)
{
    t -= two_pi * std::floor(t / two_pi);
    for (std::size_t p = 0; p < m.panel_count(); ++p)
        if (t >= m.panels[p].t0 && t < m.panels[p].t1)
            return p;
    return m.panel_count() - 1;
}

inline cplx interpolate(const PanelMesh& m, const Eigen::VectorXcd& v, double t)
{
    std::size_t p = panel_containing(m, t);
    auto row = interpolation_row(local_coordinate(m, p, t));
    cplx s = 0.0;
    for (int j = 0; j < panel_order; ++j)
        s += row[j] * v(p * panel_order + j);
    return s;
}

struct BoundaryRows {
    Eigen::RowVectorXcd sl;
    Eigen::RowVectorXcd np;
};

/**
 * Rows of S^k and K^{k*} for a target x(t) on the curve that is not a
 * node. The target's panel and its neighbours use log product integration.
 */
inline BoundaryRows boundary_rows(const Curve& c, const PanelMesh& m, double t, cplx k)
{
    const std::size_t n = m.size();
    CurvePoint cp = c(t);
    Vec2 x = cp.x;
    Vec2 nu = Vec2(cp.dx.y(), -cp.dx.x()) / cp.dx.norm();
    BoundaryRows rows {Eigen::RowVectorXcd(n), Eigen::RowVectorXcd(n)};
    for (std::size_t j = 0; j < n; ++j) {
        Vec2 d = x - m.x[j];
        double r = d.norm();
        double cs = d.dot(nu) / r;
        rows.sl(j) = helmholtz_green(k, r) * m.weight[j];
        rows.np(j) = cplx(0.0, 0.25) * k * hankel_h1(k * r) * cs * m.weight[j];
    }
    const auto& g = gauss_legendre_16();
    std::size_t p = panel_containing(m, t), np_ = m.panel_count();
    for (std::size_t q : {p, (p + np_ - 1) % np_, (p + 1) % np_}) {
        double hw = 0.5 * (m.panels[q].t1 - m.panels[q].t0);
        double tau = local_coordinate(m, q, t);
        auto logw = log_weights(tau);
        for (int jj = 0; jj < panel_order; ++jj) {
            std::size_t j = q * panel_order + jj;
            Vec2 d = x - m.x[j];
            double r = d.norm();
            double cs = d.dot(nu) / r;
            double smooth = std::log(r / std::abs(tau - g.nodes[jj]));
            auto s = kernel_split(k, r);
            cplx lw = logw[jj] + g.weights[jj] * smooth;
            rows.sl(j) = hw * m.speed[j] * (s.j0 * lw / two_pi + g.weights[jj] * s.g_smooth);
            rows.np(j) = np_kernel(x, nu, m.x[j]) * m.weight[j] +
                         hw * m.speed[j] * (-k * s.j1 * cs / two_pi * lw + g.weights[jj] * s.d_smooth * cs);
        }
    }
    return rows;
}

} // namespace detail

struct TransmissionResidual {
    double value;    // max |u_- - u_+| / max |u|
    double flux;     // max |eps du_-/dn - du_+/dn| / max |du_+/dn|
    std::size_t points;
};

/**
 * Both transmission conditions at the parameter midpoints between
 * consecutive nodes of a panel, with densities interpolated per panel and
 * the layer potentials evaluated there directly. Every stride-th midpoint
 * is used.
 */
inline TransmissionResidual transmission_residual(const ScatterSolution& sol, std::size_t stride = 1)
{
    if (stride == 0)
        throw InvalidParameter("stride must be positive");
    const PanelMesh& m = sol.mesh;
    const auto& cfg = sol.config;
    cplx e = sol.permittivity();
    double worst_v = 0.0, worst_f = 0.0, scale_v = 0.0, scale_f = 0.0;
    std::size_t count = 0;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        // The gap between panels would put the target on a panel end.
        if (i % panel_order == panel_order - 1 || seen++ % stride != 0)
            continue;
        double t = 0.5 * (m.t[i] + m.t[i + 1]);
        auto in = detail::boundary_rows(cfg.curve, m, t, sol.kc);
        auto out = detail::boundary_rows(cfg.curve, m, t, cfg.k);
        CurvePoint cp = cfg.curve(t);
        Vec2 nu = Vec2(cp.dx.y(), -cp.dx.x()) / cp.dx.norm();
        cplx psi = detail::interpolate(m, sol.psi, t), phi = detail::interpolate(m, sol.phi, t);
        cplx ui = plane_wave(cfg, cp.x);
        cplx u_minus = (in.sl * sol.psi)(0);
        cplx u_plus = ui + (out.sl * sol.phi)(0);
        cplx f_minus = e * (-0.5 * psi + (in.np * sol.psi)(0));
        cplx f_plus = plane_wave_normal(cfg, cp.x, nu) + 0.5 * phi + (out.np * sol.phi)(0);
        worst_v = std::max(worst_v, std::abs(u_minus - u_plus));
        worst_f = std::max(worst_f, std::abs(f_minus - f_plus));
        scale_v = std::max(scale_v, std::abs(u_plus));
        scale_f = std::max(scale_f, std::abs(f_plus));
        ++count;
    }
    return {scale_v > 0.0 ? worst_v / scale_v : worst_v, scale_f > 0.0 ? worst_f / scale_f : worst_f,
            count};
}

// ---------------------------------------------------------------------------
// Resonance energy

/**
 * The mesh with every panel bisected `levels` times and the density
 * interpolated onto it. The near-boundary exclusion band shrinks with the
 * panel length.
 */
inline std::pair<PanelMesh, Eigen::VectorXcd> upsampled(const Curve& c, const PanelMesh& m,
                                                        const Eigen::VectorXcd& density, int levels)
{
    if (levels < 0)
        throw InvalidParameter("upsampling levels must be non-negative");
    std::vector<Panel> panels = m.panels;
    for (int l = 0; l < levels; ++l)
        panels = bisect(panels);
    PanelMesh fine = build_mesh(c, panels);
    Eigen::VectorXcd v(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i)
        v(i) = detail::interpolate(m, density, fine.t[i]);
    return {std::move(fine), std::move(v)};
}

struct EnergyReport {
    double energy = 0.0;
    // Interior cells with a full centered-difference stencil over grid
    // nodes inside the curve.
    double coverage = 0.0;
    std::size_t cells = 0;
    std::vector<std::string> warnings;
};

/**
 * (delta / 2) sum over interior cells of |grad u|^2 * cell area, gradient
 * by centered differences. Cells next to excluded or exterior nodes are
 * skipped and counted against the coverage.
 */
inline EnergyReport energy_proxy(const FieldGrid& g, const PanelMesh& m, double delta)
{
    if (!(delta > 0.0))
        throw InvalidParameter("loss delta must be positive");
    EnergyReport rep;
    std::size_t inside = 0;
    double hx = g.hx(), hy = g.hy(), sum = 0.0;
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            auto c = g.index(ix, iy);
            bool in = g.mask[c] == CellMask::interior ||
                      (g.mask[c] == CellMask::excluded && winding_number(m, g.point(ix, iy)) != 0);
            if (!in)
                continue;
            ++inside;
            if (ix == 0 || iy == 0 || ix + 1 == g.nx || iy + 1 == g.ny || g.mask[c] != CellMask::interior)
                continue;
            auto e = g.index(ix + 1, iy), w = g.index(ix - 1, iy);
            auto n = g.index(ix, iy + 1), s = g.index(ix, iy - 1);
            if (g.mask[e] != CellMask::interior || g.mask[w] != CellMask::interior ||
                g.mask[n] != CellMask::interior || g.mask[s] != CellMask::interior)
                continue;
            cplx ux = (g.values[e] - g.values[w]) / (2.0 * hx);
            cplx uy = (g.values[n] - g.values[s]) / (2.0 * hy);
            sum += std::norm(ux) + std::norm(uy);
            ++rep.cells;
        }
    }
    rep.energy = 0.5 * delta * sum * hx * hy;
    rep.coverage = inside ? double(rep.cells) / double(inside) : 0.0;
    if (rep.coverage < 0.8) {
        std::ostringstream w;
        w << "unreliable energy: coverage " << rep.coverage << " below 0.8";
        rep.warnings.push_back(w.str());
    }
    return rep;
}

/**
 * Interior field of a solution on an n-by-n grid over the bounding box of
 * the curve, evaluated through the mesh upsampled `levels` times.
 */
inline FieldGrid interior_grid(const ScatterSolution& sol, int n, int levels = 2)
{
    const PanelMesh& m = sol.mesh;
    Box b {m.x[0].x(), m.x[0].x(), m.x[0].y(), m.x[0].y()};
    for (const auto& p : m.x) {
        b.xmin = std::min(b.xmin, p.x());
        b.xmax = std::max(b.xmax, p.x());
        b.ymin = std::min(b.ymin, p.y());
        b.ymax = std::max(b.ymax, p.y());
    }
    auto [fine, psi] = upsampled(sol.config.curve, m, sol.psi, levels);
    FieldGrid g = render(
        fine, b, n, n,
        [&, &fine = fine, &psi = psi](const Vec2& x, CellMask c) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            return c == CellMask::interior ? single_layer_at(fine, psi, x, sol.kc) : cplx(nan, nan);
        },
        "transmitted_field");
    return g;
}

inline EnergyReport energy_proxy(const ScatterSolution& sol, int n = 61, int levels = 2)
{
    FieldGrid g = interior_grid(sol, n, levels);
    auto [fine, psi] = upsampled(sol.config.curve, sol.mesh, sol.psi, levels);
    return energy_proxy(g, fine, sol.config.delta);
}

// ---------------------------------------------------------------------------
// Localization

struct LocalizationOptions {
    // Each member is scaled about the origin to this diameter.
    double target_diameter = 4.0;
    // Half-width of the square zoom window centred at the marked point.
    double zoom_halfwidth = 0.4;
    // Grid resolution for the rendered global and zoom windows; 0 skips them.
    int grid = 0;
    // Interior energy grid resolution; 0 skips the energy proxy.
    int energy_grid = 0;
};

struct LocalizationRow {
    double kappa_max = 0.0; // of the unscaled member
    double scale = 1.0;
    double zoom_max = 0.0;
    double elsewhere_max = 0.0;
    double ratio = 0.0;
    Vec2 peak {0.0, 0.0};
    double peak_panels = 0.0; // arc distance from the mark in local panel lengths
    double energy = std::numeric_limits<double>::quiet_NaN();
    double coverage = std::numeric_limits<double>::quiet_NaN();
    double rcond = 0.0;
    std::size_t nodes = 0;
    std::vector<FieldGrid> grids; // global, zoom
    std::vector<std::string> warnings;
};

using CurveFamily = std::function<Curve(double)>;

/** Zoom window around the first mark (t = 0 when the curve has none). */
inline LocalizationRow localize(const ScatterSolution& sol, double zoom_halfwidth)
{
    const PanelMesh& m = sol.mesh;
    const Curve& c = sol.config.curve;
    double t_mark = c.marks().empty() ? 0.0 : c.marks().front().t;
    Vec2 mark = c.position(t_mark);
    Box zoom = box_around(mark, zoom_halfwidth);
    LocalizationRow row;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double v = std::abs(sol.boundary(i));
        const Vec2& p = m.x[i];
        bool in = p.x() >= zoom.xmin && p.x() <= zoom.xmax && p.y() >= zoom.ymin && p.y() <= zoom.ymax;
        if (in && v > row.zoom_max) {
            row.zoom_max = v;
            arg = i;
        }
        if (!in)
            row.elsewhere_max = std::max(row.elsewhere_max, v);
    }
    if (row.zoom_max == 0.0)
        throw InvalidParameter("zoom window contains no boundary nodes");
    row.ratio = row.elsewhere_max > 0.0 ? row.zoom_max / row.elsewhere_max
                                        : std::numeric_limits<double>::infinity();
    row.peak = m.x[arg];
    std::size_t near = detail::nearest_node(m, t_mark);
    double s_mark = m.arclength[near];
    row.peak_panels = detail::periodic_arc_distance(m, m.arclength[arg], s_mark) / m.local_length(arg);
    row.rcond = sol.rcond;
    row.nodes = m.size();
    row.warnings = sol.warnings;
    return row;
}

/**
 * For each kappa: build the member, scale it to the target diameter, solve
 * with the template's material and wave, and compare the largest boundary
 * |u| inside the zoom window with the largest outside it.
 */
inline std::vector<LocalizationRow> localization_experiment(const CurveFamily& family,
                                                            const std::vector<double>& kappas,
                                                            const ScatterConfig& tmpl,
                                                            const LocalizationOptions& opt = {})
{
    if (kappas.empty())
        throw InvalidParameter("kappa list is empty");
    for (std::size_t i = 1; i < kappas.size(); ++i)
        if (!(kappas[i] > kappas[i - 1]))
            throw InvalidParameter("kappa list must be strictly increasing");
    if (!(opt.target_diameter > 0.0) || !(opt.zoom_halfwidth > 0.0))
        throw InvalidParameter("diameter and zoom half-width must be positive");
    std::vector<LocalizationRow> rows;
    for (double kappa : kappas) {
        Curve base = family(kappa);
        double diam = mesh_diameter(build_mesh(base, 32));
        double s = opt.target_diameter / diam;
        ScatterConfig cfg = tmpl;
        cfg.curve = scaled(base, s);
        cfg.windows.clear();
        auto sol = solve_transmission(cfg);
        auto row = localize(sol, opt.zoom_halfwidth);
        row.kappa_max = kappa;
        row.scale = s;
        if (opt.grid > 0) {
            double r = 0.5 * opt.target_diameter * 1.25;
            row.grids.push_back(render_total_field(sol, box_around({0.0, 0.0}, r), opt.grid, opt.grid));
            row.grids.push_back(render_total_field(sol, box_around(row.peak, opt.zoom_halfwidth), opt.grid,
                                                   opt.grid));
        }
        if (opt.energy_grid > 0) {
            auto e = energy_proxy(sol, opt.energy_grid);
            row.energy = e.energy;
            row.coverage = e.coverage;
            row.warnings.insert(row.warnings.end(), e.warnings.begin(), e.warnings.end());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct RunSummaryRow {
    std::string label;
    double kappa_max = 0.0;
    double energy = std::numeric_limits<double>::quiet_NaN();
    double coverage = std::numeric_limits<double>::quiet_NaN();
    double enhancement = 0.0;
    double localization_ratio = std::numeric_limits<double>::quiet_NaN();
    double rcond = 0.0;
    std::size_t nodes = 0;
};

// Columns: label, kappa_max, energy, coverage, enhancement, localization_ratio, rcond, nodes.
inline void write_run_summary(std::ostream& os, const std::vector<RunSummaryRow>& rows)
{
    os.precision(17);
    os << "label,kappa_max,energy,coverage,enhancement,localization_ratio,rcond,nodes\n";
    for (const auto& r : rows)
        os << r.label << ',' << r.kappa_max << ',' << r.energy << ',' << r.coverage << ','
           << r.enhancement << ',' << r.localization_ratio << ',' << r.rcond << ',' << r.nodes << '\n';
}

// ---------------------------------------------------------------------------
// Star demo

struct StarOptions {
    double eps = -2.48907;
    double delta = 1e-5;
    double k = 0.01;
    Vec2 direction {-1.0, 0.0};
    double amplitude = 1e-4;
    double exponent = 8.0;
    int lobes = 12;
    int panels = 0;
    // Each lobe carries a tip and two feet of high curvature; the default
    // 0.5 would need about 6700 nodes.
    double grade_threshold = 4.0;
    // Also compute the NP eigenvalue closest to lambda(eps).
    bool spectrum = false;
    int grid = 0;
};

struct StarPeak {
    int cusp = 0;
    double t_cusp = 0.0;
    Vec2 cusp_point {0.0, 0.0};
    Vec2 peak {0.0, 0.0};
    double gradient = 0.0; // |grad u| at the peak
    double value = 0.0;    // |u| at the peak
    double panels = 0.0;   // arc distance peak to cusp in local panel lengths
};

struct StarReport {
    double eps = 0.0;
    double delta = 0.0;
    double k = 0.0;
    double lambda_target = 0.0; // (eps + 1) / (2 (eps - 1))
    double lambda_nearest = std::numeric_limits<double>::quiet_NaN();
    double wavelength = 0.0;
    std::string wavelength_text;
    double d_tilde = 0.0;
    std::string d_tilde_text;
    double subwavelength_ratio = 0.0;
    double r_max = 0.0;
    std::vector<StarPeak> peaks;
    double min_separation = 0.0;
    double max_separation = 0.0;
    double max_field = 0.0;
    double max_gradient = 0.0;
    double rcond = 0.0;
    std::size_t nodes = 0;
    std::vector<FieldGrid> grids;
    std::vector<std::string> warnings;
};

inline std::string fixed_text(double v, int digits)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

/**
 * The cusped star r = 1 + a exp(b sin(m t)) lit at a wavelength far above
 * the cusp spacing. One peak of boundary |grad u| is taken per cusp sector
 * of angular width 2 pi / m; at this wavelength |u| itself stays close to
 * the incident modulus 1.
 */
inline StarReport star_demo(const StarOptions& opt = {})
{
    Curve star = make_star(opt.amplitude, opt.exponent, opt.lobes);
    ScatterConfig cfg(star);
    cfg.eps = opt.eps;
    cfg.delta = opt.delta;
    cfg.k = opt.k;
    cfg.direction = opt.direction;
    cfg.panels = opt.panels;
    cfg.grade_threshold = opt.grade_threshold;
    cfg.curvature_resolution = 2.0 * opt.grade_threshold;
    auto sol = solve_transmission(cfg);
    const PanelMesh& m = sol.mesh;

    StarReport rep;
    rep.eps = opt.eps;
    rep.delta = opt.delta;
    rep.k = opt.k;
    rep.lambda_target = permittivity_to_eigenvalue(opt.eps);
    rep.wavelength = two_pi / opt.k;
    rep.wavelength_text = fixed_text(rep.wavelength, 2);
    rep.r_max = 1.0 + opt.amplitude * std::exp(opt.exponent);
    rep.d_tilde = 2.0 * rep.r_max * std::sin(std::numbers::pi / opt.lobes);
    rep.d_tilde_text = fixed_text(rep.d_tilde, 4);
    rep.subwavelength_ratio = rep.d_tilde / rep.wavelength;
    rep.rcond = sol.rcond;
    rep.nodes = m.size();
    rep.warnings = sol.warnings;
    Eigen::VectorXd grad = boundary_gradient(sol);
    rep.max_field = sol.boundary.cwiseAbs().maxCoeff();
    rep.max_gradient = grad.maxCoeff();

    double sector = two_pi / opt.lobes;
    for (int j = 0; j < opt.lobes; ++j) {
        const auto& mk = star.marks()[j];
        StarPeak pk;
        pk.cusp = j;
        pk.t_cusp = mk.t;
        pk.cusp_point = star.position(mk.t);
        std::size_t arg = m.size();
        for (std::size_t i = 0; i < m.size(); ++i) {
            double d = m.t[i] - mk.t;
            d -= two_pi * std::round(d / two_pi);
            if (std::abs(d) > 0.5 * sector)
                continue;
            if (arg == m.size() || grad(i) > pk.gradient) {
                pk.gradient = grad(i);
                arg = i;
            }
        }
        if (arg == m.size())
            throw NumericalFailure("cusp sector holds no boundary nodes");
        pk.peak = m.x[arg];
        pk.value = std::abs(sol.boundary(arg));
        double s_mark = m.arclength[detail::nearest_node(m, mk.t)];
        pk.panels = detail::periodic_arc_distance(m, m.arclength[arg], s_mark) / m.local_length(arg);
        rep.peaks.push_back(pk);
    }
    rep.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rep.peaks.size(); ++j) {
        double d = (rep.peaks[j].peak - rep.peaks[(j + 1) % rep.peaks.size()].peak).norm();
        rep.min_separation = std::min(rep.min_separation, d);
        rep.max_separation = std::max(rep.max_separation, d);
    }
    if (opt.spectrum) {
        auto ev = np_eigenvalues(assemble_np(m));
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (std::abs(ev(i).real() - rep.lambda_target) < std::abs(best - rep.lambda_target))
                best = ev(i).real();
        rep.lambda_nearest = best;
    }
    if (opt.grid > 0) {
        double r = 1.2 * rep.r_max;
        rep.grids.push_back(render_total_field(sol, box_around({0.0, 0.0}, r), opt.grid, opt.grid));
    }
    return rep;
}

// Key/value lines of a star report followed by one CSV block of peaks.
inline void write_star_report(std::ostream& os, const StarReport& r)
{
    os.precision(17);
    os << "eps," << r.eps << "\ndelta," << r.delta << "\nk," << r.k << "\nlambda_target,"
       << r.lambda_target << "\nlambda_nearest," << r.lambda_nearest << "\nwavelength,"
       << r.wavelength_text << "\nd_tilde," << r.d_tilde_text << "\nsubwavelength_ratio,"
       << r.subwavelength_ratio << "\nmin_separation," << r.min_separation << "\nmax_separation,"
       << r.max_separation << "\nmax_abs_u," << r.max_field << "\nmax_abs_grad_u," << r.max_gradient
       << "\nrcond," << r.rcond << "\nnodes," << r.nodes << "\n";
    os << "cusp,t_cusp,cusp_x,cusp_y,peak_x,peak_y,abs_grad_u,abs_u,panels\n";
    for (const auto& p : r.peaks)
        os << p.cusp << ',' << p.t_cusp << ',' << p.cusp_point.x() << ',' << p.cusp_point.y() << ','
           << p.peak.x() << ',' << p.peak.y() << ',' << p.gradient << ',' << p.value << ',' << p.panels
           << '\n';
}

} // namespace nploc
