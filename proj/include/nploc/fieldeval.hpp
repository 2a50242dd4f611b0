#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nploc/errors.hpp"
#include "nploc/legendre.hpp"
#include "nploc/quadrature.hpp"
#include "nploc/special.hpp"

namespace nploc {

// ---------------------------------------------------------------------------
// Point evaluation of single-layer potentials

/**
 * True when x lies closer to some node than that node's panel arc length.
 * Plain Gauss quadrature of the potential is not trusted there.
 */
inline bool near_boundary(const PanelMesh& m, const Vec2& x)
{
    for (std::size_t j = 0; j < m.size(); ++j)
        if ((x - m.x[j]).squaredNorm() < m.local_length(j) * m.local_length(j))
            return true;
    return false;
}

/**
 * S[phi](x) = sum_j G(x - y_j) phi_j w_j with G the Laplace kernel (k == 0)
 * or -(i/4) H0(k r). The caller is responsible for keeping x off the boundary.
 */
inline cplx single_layer_at(const PanelMesh& m, const Eigen::VectorXcd& density, const Vec2& x,
                            cplx k = 0.0)
{
    if (static_cast<std::size_t>(density.size()) != m.size())
        throw LengthMismatch("density length does not match the mesh");
    cplx sum = 0.0;
    if (k == 0.0) {
        for (std::size_t j = 0; j < m.size(); ++j)
            sum += std::log((x - m.x[j]).norm()) * density(j) * m.weight[j];
        return sum / two_pi;
    }
    for (std::size_t j = 0; j < m.size(); ++j)
        sum += helmholtz_green(k, (x - m.x[j]).norm()) * density(j) * m.weight[j];
    return sum;
}

struct PointValues {
    Eigen::VectorXcd values;   // NaN where excluded
    std::vector<bool> excluded;
};

inline PointValues eval_single_layer(const PanelMesh& m, const Eigen::VectorXcd& density,
                                     const std::vector<Vec2>& points, cplx k = 0.0)
{
    if (k != 0.0)
        require_upper_half_plane(k);
    PointValues out;
    out.values.resize(points.size());
    out.excluded.resize(points.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t p = 0; p < points.size(); ++p) {
        out.excluded[p] = near_boundary(m, points[p]);
        out.values(p) = out.excluded[p] ? cplx(nan, nan) : single_layer_at(m, density, points[p], k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Boundary traces

/** Derivative in t divided by the speed, per panel by Legendre interpolation. */
inline Eigen::VectorXcd conormal_derivative(const PanelMesh& m, const Eigen::VectorXcd& values)
{
    if (static_cast<std::size_t>(values.size()) != m.size())
        throw LengthMismatch("trace length does not match the mesh");
    const auto& d = gauss_differentiation_16();
    Eigen::VectorXcd out(values.size());
    for (std::size_t p = 0; p < m.panel_count(); ++p) {
        double hw = 0.5 * (m.panels[p].t1 - m.panels[p].t0);
        out.segment<panel_order>(p * panel_order) =
            d.cast<cplx>() * values.segment<panel_order>(p * panel_order) / hw;
    }
    for (std::size_t i = 0; i < m.size(); ++i)
        out(i) /= m.speed[i];
    return out;
}

struct BoundaryTrace {
    std::vector<double> s;
    std::vector<double> t;
    Eigen::VectorXcd values;
    Eigen::VectorXcd derivative; // empty unless requested
};

inline BoundaryTrace make_trace(const PanelMesh& m, const Eigen::VectorXcd& values,
                                bool with_derivative = true)
{
    if (static_cast<std::size_t>(values.size()) != m.size())
        throw LengthMismatch("trace length does not match the mesh");
    BoundaryTrace tr {m.arclength, m.t, values, {}};
    if (with_derivative)
        tr.derivative = conormal_derivative(m, values);
    return tr;
}

// Columns: s, t, re, im, abs, d_re, d_im, d_abs (derivative columns only if present).
inline void write_trace_csv(std::ostream& os, const BoundaryTrace& tr)
{
    os.precision(17);
    bool d = tr.derivative.size() == tr.values.size();
    os << "s,t,re,im,abs" << (d ? ",d_re,d_im,d_abs" : "") << "\n";
    for (Eigen::Index i = 0; i < tr.values.size(); ++i) {
        os << tr.s[i] << ',' << tr.t[i] << ',' << tr.values(i).real() << ',' << tr.values(i).imag()
           << ',' << std::abs(tr.values(i));
        if (d)
            os << ',' << tr.derivative(i).real() << ',' << tr.derivative(i).imag() << ','
               << std::abs(tr.derivative(i));
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Point classification

enum class CellMask : std::uint8_t { interior, exterior, excluded };

inline const char* to_string(CellMask c)
{
    switch (c) {
    case CellMask::interior: return "interior";
    case CellMask::exterior: return "exterior";
    case CellMask::excluded: return "excluded";
    }
    return "?";
}

/** Winding number of the closed polygon through the mesh nodes around x. */
inline int winding_number(const PanelMesh& m, const Vec2& x)
{
    int wn = 0;
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = m.x[i];
        const Vec2& b = m.x[(i + 1) % n];
        double cross = (b.x() - a.x()) * (x.y() - a.y()) - (x.x() - a.x()) * (b.y() - a.y());
        if (a.y() <= x.y()) {
            if (b.y() > x.y() && cross > 0.0)
                ++wn;
        } else if (b.y() <= x.y() && cross < 0.0) {
            --wn;
        }
    }
    return wn;
}

inline CellMask classify(const PanelMesh& m, const Vec2& x)
{
    if (near_boundary(m, x))
        return CellMask::excluded;
    return winding_number(m, x) != 0 ? CellMask::interior : CellMask::exterior;
}

// ---------------------------------------------------------------------------
// Grids

struct Box {
    double xmin = -1.0;
    double xmax = 1.0;
    double ymin = -1.0;
    double ymax = 1.0;
};

/** Square box of half-width r centred at c. */
inline Box box_around(const Vec2& c, double r) { return {c.x() - r, c.x() + r, c.y() - r, c.y() + r}; }

/**
 * Values on the nx-by-ny node lattice of a box, x fastest. Excluded cells
 * hold NaN.
 */
struct FieldGrid {
    Box box;
    int nx = 0;
    int ny = 0;
    std::vector<cplx> values;
    std::vector<CellMask> mask;
    std::string source;

    double hx() const { return (box.xmax - box.xmin) / (nx - 1); }
    double hy() const { return (box.ymax - box.ymin) / (ny - 1); }
    std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx + ix; }
    Vec2 point(int ix, int iy) const { return {box.xmin + ix * hx(), box.ymin + iy * hy()}; }
};

/** Grid with mask filled and no values yet. */
inline FieldGrid make_grid(const PanelMesh& m, const Box& box, int nx, int ny)
{
    if (nx < 2 || ny < 2)
        throw InvalidParameter("grid needs at least 2 points per direction");
    if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin))
        throw InvalidParameter("grid box is empty");
    FieldGrid g;
    g.box = box;
    g.nx = nx;
    g.ny = ny;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    g.values.assign(std::size_t(nx) * ny, cplx(nan, nan));
    g.mask.resize(g.values.size());
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            g.mask[g.index(ix, iy)] = classify(m, g.point(ix, iy));
    return g;
}

using PointField = std::function<cplx(const Vec2&, CellMask)>;

/** Grid whose non-excluded cells are filled by f. */
inline FieldGrid render(const PanelMesh& m, const Box& box, int nx, int ny, const PointField& f,
                        std::string source = {})
{
    FieldGrid g = make_grid(m, box, nx, ny);
    g.source = std::move(source);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            auto idx = g.index(ix, iy);
            if (g.mask[idx] != CellMask::excluded)
                g.values[idx] = f(g.point(ix, iy), g.mask[idx]);
        }
    return g;
}

inline FieldGrid render_field(const PanelMesh& m, const Eigen::VectorXcd& density, const Box& box,
                              int nx, int ny, cplx k = 0.0)
{
    if (k != 0.0)
        require_upper_half_plane(k);
    return render(
        m, box, nx, ny, [&](const Vec2& x, CellMask) { return single_layer_at(m, density, x, k); },
        k == 0.0 ? "single_layer_laplace" : "single_layer_helmholtz");
}

/**
 * Largest 5-point residual of (Laplacian + k2) u over cells of the given
 * kind whose four neighbours are of the same kind, divided by the largest
 * |u| over those cells.
 */
inline double laplacian_residual(const FieldGrid& g, cplx k2, CellMask kind,
                                 std::size_t min_cells = 4)
{
    double hx2 = g.hx() * g.hx(), hy2 = g.hy() * g.hy();
    double worst = 0.0, scale = 0.0;
    std::size_t count = 0;
    for (int iy = 1; iy + 1 < g.ny; ++iy) {
        for (int ix = 1; ix + 1 < g.nx; ++ix) {
            auto c = g.index(ix, iy);
            auto e = g.index(ix + 1, iy), w = g.index(ix - 1, iy);
            auto n = g.index(ix, iy + 1), s = g.index(ix, iy - 1);
            if (g.mask[c] != kind || g.mask[e] != kind || g.mask[w] != kind || g.mask[n] != kind ||
                g.mask[s] != kind)
                continue;
            cplx lap = (g.values[e] + g.values[w] - 2.0 * g.values[c]) / hx2 +
                       (g.values[n] + g.values[s] - 2.0 * g.values[c]) / hy2 + k2 * g.values[c];
            worst = std::max(worst, std::abs(lap));
            scale = std::max(scale, std::abs(g.values[c]));
            ++count;
        }
    }
    if (count < min_cells)
        throw InsufficientGrid("only " + std::to_string(count) +
                               " cells have four same-kind neighbours");
    return scale > 0.0 ? worst / scale : worst;
}

inline double harmonicity_check(const FieldGrid& g)
{
    return laplacian_residual(g, 0.0, CellMask::interior);
}

// Columns: x, y, re, im, abs, mask. Excluded cells carry empty value fields.
inline void write_grid_csv(std::ostream& os, const FieldGrid& g)
{
    os.precision(17);
    os << "x,y,re,im,abs,mask\n";
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            auto idx = g.index(ix, iy);
            Vec2 p = g.point(ix, iy);
            os << p.x() << ',' << p.y() << ',';
            if (g.mask[idx] == CellMask::excluded)
                os << ",,";
            else
                os << g.values[idx].real() << ',' << g.values[idx].imag() << ','
                   << std::abs(g.values[idx]);
            os << ',' << to_string(g.mask[idx]) << '\n';
        }
}

struct ImageScale {
    double min = 0.0;
    double max = 0.0;
};

/**
 * Binary graymap of |u|, linearly mapped from [min, max] over valued cells
 * to [0, 255]; excluded cells are black. Top row is the largest y.
 */
inline ImageScale write_grid_pgm(std::ostream& os, const FieldGrid& g)
{
    ImageScale sc {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < g.values.size(); ++i)
        if (g.mask[i] != CellMask::excluded) {
            sc.min = std::min(sc.min, std::abs(g.values[i]));
            sc.max = std::max(sc.max, std::abs(g.values[i]));
        }
    if (!(sc.max >= sc.min))
        sc = {0.0, 0.0};
    os << "P5\n" << g.nx << ' ' << g.ny << "\n255\n";
    double span = sc.max - sc.min;
    for (int iy = g.ny - 1; iy >= 0; --iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            auto idx = g.index(ix, iy);
            unsigned char v = 0;
            if (g.mask[idx] != CellMask::excluded && span > 0.0)
                v = static_cast<unsigned char>(
                    std::lround(255.0 * (std::abs(g.values[idx]) - sc.min) / span));
            os.put(static_cast<char>(v));
        }
    return sc;
}

inline void write_pgm_sidecar(std::ostream& os, const FieldGrid& g, const ImageScale& sc)
{
    os.precision(17);
    os << "quantity=abs\nscale=linear\nmin=" << sc.min << "\nmax=" << sc.max << "\nnx=" << g.nx
       << "\nny=" << g.ny << "\nxmin=" << g.box.xmin << "\nxmax=" << g.box.xmax
       << "\nymin=" << g.box.ymin << "\nymax=" << g.box.ymax << "\nexcluded=0\nsource=" << g.source
       << "\n";
}

} // namespace nploc
