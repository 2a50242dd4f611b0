#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "nploc/errors.hpp"
#include "nploc/geometry.hpp"
#include "nploc/legendre.hpp"

namespace nploc {

struct Panel {
    double t0;
    double t1;
};

/**
 * Composite 16-point Gauss-Legendre discretization of a curve. Node i lies on
 * panel panel_of[i]; nodes of a panel are contiguous and ascending in t.
 */
struct PanelMesh {
    std::vector<Panel> panels;
    std::vector<double> t;
    std::vector<Vec2> x;
    std::vector<Vec2> dx;
    std::vector<Vec2> ddx;
    std::vector<Vec2> normal;
    std::vector<double> speed;
    std::vector<double> weight;
    std::vector<double> kappa;
    std::vector<double> arclength;
    std::vector<int> panel_of;
    std::vector<double> panel_length;
    double perimeter = 0.0;

    std::size_t size() const { return t.size(); }
    std::size_t panel_count() const { return panels.size(); }

    // Arc length of the panel containing node i.
    double local_length(std::size_t i) const { return panel_length[panel_of[i]]; }
};

struct MeshOptions {
    bool graded = false;
    // Split a panel while max kappa * panel length exceeds this.
    double grade_threshold = 0.5;
    // Neighbouring panels differ in parameter length by at most this factor.
    double balance_ratio = 2.0;
    std::size_t max_panels = 1024;
};

/** Default panel count: 32 up to kappa_max = 10, doubling per decade beyond. */
inline int default_panel_count(double kappa_max)
{
    int p = 32;
    for (double k = 10.0; kappa_max > k * (1.0 + 1e-12); k *= 10.0)
        p *= 2;
    return p;
}

namespace detail {

inline double panel_max_kappa(const Curve& c, const Panel& p)
{
    const auto& g = gauss_legendre_16();
    double mid = 0.5 * (p.t0 + p.t1), hw = 0.5 * (p.t1 - p.t0);
    double m = std::max(std::abs(curvature(c, p.t0)), std::abs(curvature(c, p.t1)));
    for (int i = 0; i < panel_order; ++i)
        m = std::max(m, std::abs(curvature(c, mid + hw * g.nodes[i])));
    return m;
}

inline std::vector<Panel> split(const std::vector<Panel>& in, const std::vector<bool>& flag)
{
    std::vector<Panel> out;
    out.reserve(in.size() * 2);
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (flag[i]) {
            double m = 0.5 * (in[i].t0 + in[i].t1);
            out.push_back({in[i].t0, m});
            out.push_back({m, in[i].t1});
        } else {
            out.push_back(in[i]);
        }
    }
    return out;
}

inline std::vector<Panel> grade_panels(const Curve& c, std::vector<Panel> panels,
                                       const MeshOptions& opt)
{
    for (;;) {
        std::vector<bool> flag(panels.size(), false);
        bool any = false;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            double len = arc_length(c, panels[i].t0, panels[i].t1);
            if (panel_max_kappa(c, panels[i]) * len > opt.grade_threshold) {
                flag[i] = true;
                any = true;
            }
        }
        if (!any)
            break;
        panels = split(panels, flag);
        if (panels.size() > opt.max_panels)
            throw ResolutionError("curvature grading exceeds the panel cap");
    }
    for (;;) {
        std::size_t n = panels.size();
        std::vector<double> len(n);
        for (std::size_t i = 0; i < n; ++i)
            len[i] = panels[i].t1 - panels[i].t0;
        std::vector<bool> flag(n, false);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            double l = len[(i + n - 1) % n], r = len[(i + 1) % n];
            if (len[i] > opt.balance_ratio * std::min(l, r) * (1.0 + 1e-9)) {
                flag[i] = true;
                any = true;
            }
        }
        if (!any)
            break;
        panels = split(panels, flag);
        if (panels.size() > opt.max_panels)
            throw ResolutionError("panel balancing exceeds the panel cap");
    }
    return panels;
}

} // namespace detail

/** Mesh on an explicit panel layout covering [0, 2pi) in order. */
inline PanelMesh build_mesh(const Curve& c, const std::vector<Panel>& panels)
{
    if (panels.size() < 4)
        throw InvalidParameter("a mesh needs at least 4 panels");
    for (std::size_t p = 0; p < panels.size(); ++p)
        if (!(panels[p].t1 > panels[p].t0) ||
            (p > 0 && panels[p].t0 != panels[p - 1].t1))
            throw InvalidParameter("panels must be ordered, contiguous and non-empty");
    if (panels.front().t0 != 0.0 || std::abs(panels.back().t1 - two_pi) > 1e-12)
        throw InvalidParameter("panels must cover [0, 2pi)");

    const auto& g = gauss_legendre_16();
    PanelMesh m;
    m.panels = panels;
    std::size_t n = panels.size() * panel_order;
    m.t.reserve(n);
    double s = 0.0;
    for (std::size_t p = 0; p < panels.size(); ++p) {
        double t0 = panels[p].t0, t1 = panels[p].t1;
        double mid = 0.5 * (t0 + t1), hw = 0.5 * (t1 - t0);
        double plen = 0.0;
        for (int q = 0; q < panel_order; ++q) {
            double t = mid + hw * g.nodes[q];
            auto pt = c(t);
            double sp = pt.dx.norm();
            if (!(sp > 1e-14))
                throw DegenerateParametrization("curve speed vanishes at a mesh node");
            m.t.push_back(t);
            m.x.push_back(pt.x);
            m.dx.push_back(pt.dx);
            m.ddx.push_back(pt.ddx);
            m.normal.push_back(Vec2(pt.dx.y(), -pt.dx.x()) / sp);
            m.speed.push_back(sp);
            m.weight.push_back(g.weights[q] * hw * sp);
            m.kappa.push_back(curvature(pt));
            m.arclength.push_back(s + arc_length(c, t0, t));
            m.panel_of.push_back(int(p));
            plen += g.weights[q] * hw * sp;
        }
        m.panel_length.push_back(plen);
        s += plen;
    }
    m.perimeter = s;
    return m;
}

inline PanelMesh build_mesh(const Curve& c, int panel_count, const MeshOptions& opt = {})
{
    if (panel_count < 4)
        throw InvalidParameter("a mesh needs at least 4 panels");
    std::vector<Panel> panels(panel_count);
    for (int p = 0; p < panel_count; ++p)
        panels[p] = {two_pi * p / panel_count, two_pi * (p + 1) / panel_count};
    if (opt.graded)
        panels = detail::grade_panels(c, std::move(panels), opt);
    return build_mesh(c, panels);
}

/** Every panel split at its parameter midpoint. */
inline std::vector<Panel> bisect(const std::vector<Panel>& panels)
{
    return detail::split(panels, std::vector<bool>(panels.size(), true));
}

template <typename T>
T integrate(const PanelMesh& m, std::span<const T> samples)
{
    if (samples.size() != m.size())
        throw LengthMismatch("sample count does not match mesh node count");
    T sum {};
    for (std::size_t i = 0; i < samples.size(); ++i)
        sum += samples[i] * m.weight[i];
    return sum;
}

inline double integrate(const PanelMesh& m, const std::vector<double>& samples)
{
    return integrate<double>(m, std::span<const double>(samples));
}

inline std::complex<double> integrate(const PanelMesh& m,
                                      const std::vector<std::complex<double>>& samples)
{
    return integrate<std::complex<double>>(m, std::span<const std::complex<double>>(samples));
}

/**
 * Per-panel estimate of the relative quadrature error of a nodal function:
 * size of its top Legendre coefficients relative to the largest one.
 */
inline double tail_estimate(const PanelMesh& m, const Eigen::VectorXd& f)
{
    const auto& c = gauss_to_legendre_16();
    double worst = 0.0;
    for (std::size_t p = 0; p < m.panel_count(); ++p) {
        Eigen::Matrix<double, panel_order, 1> v = f.segment<panel_order>(p * panel_order);
        Eigen::Matrix<double, panel_order, 1> a = c * v;
        double top = a.cwiseAbs().maxCoeff();
        if (top == 0.0)
            continue;
        double tail = std::max(std::abs(a(panel_order - 1)), std::abs(a(panel_order - 2)));
        worst = std::max(worst, tail / top);
    }
    return worst;
}

} // namespace nploc
