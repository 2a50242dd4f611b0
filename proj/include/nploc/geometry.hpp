#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "nploc/errors.hpp"
#include "nploc/legendre.hpp"

namespace nploc {

using Vec2 = Eigen::Vector2d;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct CurvePoint {
    Vec2 x;
    Vec2 dx;
    Vec2 ddx;
};

enum class CurveKind { ellipse, radial, composite };

inline const char* to_string(CurveKind k)
{
    switch (k) {
    case CurveKind::ellipse: return "ellipse";
    case CurveKind::radial: return "radial";
    case CurveKind::composite: return "composite";
    }
    return "?";
}

/** A designated boundary point, usually a curvature maximum. */
struct MarkedPoint {
    std::string label;
    double t = 0.0;
};

/**
 * Closed, counterclockwise, twice differentiable planar curve over the
 * parameter interval [0, 2pi).
 */
class Curve {
public:
    using Evaluator = std::function<CurvePoint(double)>;

    Curve(CurveKind kind, Evaluator eval, std::vector<MarkedPoint> marks,
          std::string name, std::map<std::string, double> params)
        : kind_(kind), eval_(std::move(eval)), marks_(std::move(marks)),
          name_(std::move(name)), params_(std::move(params))
    {
    }

    CurvePoint operator()(double t) const { return eval_(t); }
    Vec2 position(double t) const { return eval_(t).x; }

    CurveKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const std::vector<MarkedPoint>& marks() const { return marks_; }
    const std::map<std::string, double>& parameters() const { return params_; }
    const Evaluator& evaluator() const { return eval_; }

private:
    CurveKind kind_;
    Evaluator eval_;
    std::vector<MarkedPoint> marks_;
    std::string name_;
    std::map<std::string, double> params_;
};

inline double curvature(const CurvePoint& p)
{
    double speed = p.dx.norm();
    if (!(speed > 1e-14))
        throw DegenerateParametrization("curve speed below 1e-14");
    return (p.dx.x() * p.ddx.y() - p.dx.y() * p.ddx.x()) / (speed * speed * speed);
}

inline double curvature(const Curve& c, double t) { return curvature(c(t)); }

// ---------------------------------------------------------------------------
// Radial curves

struct RadialSample {
    double r;
    double dr;
    double ddr;
};

using RadialFunction = std::function<RadialSample(double)>;

inline CurvePoint radial_point(const RadialSample& s, double t)
{
    double c = std::cos(t), sn = std::sin(t);
    CurvePoint p;
    p.x = Vec2(s.r * c, s.r * sn);
    p.dx = Vec2(s.dr * c - s.r * sn, s.dr * sn + s.r * c);
    p.ddx = Vec2((s.ddr - s.r) * c - 2.0 * s.dr * sn, (s.ddr - s.r) * sn + 2.0 * s.dr * c);
    return p;
}

inline Curve make_radial(RadialFunction fn, std::vector<MarkedPoint> marks = {},
                         std::string name = "radial",
                         std::map<std::string, double> params = {},
                         CurveKind kind = CurveKind::radial)
{
    constexpr int n = 8192;
    for (int i = 0; i < n; ++i) {
        double t = two_pi * i / n;
        double r = fn(t).r;
        if (!(r > 0.0))
            throw InvalidGeometry("radial function is not positive at t = " + std::to_string(t));
    }
    auto eval = [fn = std::move(fn)](double t) { return radial_point(fn(t), t); };
    return Curve(kind, std::move(eval), std::move(marks), std::move(name), std::move(params));
}

inline Curve make_circle(double radius = 1.0)
{
    if (!(radius > 0.0))
        throw InvalidParameter("circle radius must be positive");
    return make_radial([radius](double) { return RadialSample {radius, 0.0, 0.0}; }, {},
                       "circle", {{"radius", radius}});
}

inline Curve make_ellipse(double R0, double rho0)
{
    if (!(R0 > 0.0) || !(rho0 > 0.0))
        throw InvalidParameter("ellipse requires R0 > 0 and rho0 > 0");
    double a = R0 * std::cosh(rho0), b = R0 * std::sinh(rho0);
    auto eval = [a, b](double w) {
        double c = std::cos(w), s = std::sin(w);
        return CurvePoint {Vec2(a * c, b * s), Vec2(-a * s, b * c), Vec2(-a * c, -b * s)};
    };
    return Curve(CurveKind::ellipse, eval,
                 {{"x_star", 0.0}, {"x_circ", std::numbers::pi}}, "ellipse",
                 {{"R0", R0}, {"rho0", rho0}});
}

// 12-cusp style star r = 1 + a exp(b sin(m t)); cusps where sin(m t) = 1.
inline Curve make_star(double amplitude = 1e-4, double exponent = 8.0, int lobes = 12)
{
    if (!(amplitude > 0.0) || lobes < 1)
        throw InvalidParameter("star requires amplitude > 0 and lobes >= 1");
    double m = lobes;
    auto fn = [=](double t) {
        double g = amplitude * std::exp(exponent * std::sin(m * t));
        double c = std::cos(m * t), s = std::sin(m * t);
        double bm = exponent * m;
        return RadialSample {1.0 + g, g * bm * c, g * (bm * bm * c * c - bm * m * s)};
    };
    std::vector<MarkedPoint> marks;
    for (int j = 0; j < lobes; ++j)
        marks.push_back({"cusp" + std::to_string(j), (std::numbers::pi / 2 + two_pi * j) / m});
    return make_radial(fn, std::move(marks), "star",
                       {{"amplitude", amplitude}, {"exponent", exponent}, {"lobes", m}});
}

// ---------------------------------------------------------------------------
// Bumps

enum class BumpProfile { rounded_corner, gaussian };

inline const char* to_string(BumpProfile p)
{
    return p == BumpProfile::gaussian ? "gaussian" : "rounded_corner";
}

/**
 * One radial bump h*g(theta - center) with n-fold repetition.
 *
 * gaussian:        g = exp(beta (cos(n u) - 1)), beta = sharpness.
 * rounded_corner:  g = exp(-c (s - eps)), s = sqrt(2 (1 - cos(n u)) / n^2 + eps^2),
 *                  eps = 1 / sharpness, c = slope. Near u = 0 this is a corner
 *                  of opening slope c rounded at scale eps.
 */
struct Bump {
    double height = 0.5; // signed; negative gives an inward dimple
    double sharpness = 1.0;
    double center = 0.0;
    int n_sym = 1;
    BumpProfile profile = BumpProfile::rounded_corner;
    double slope = 2.0;
};

inline RadialSample bump_sample(const Bump& b, double theta)
{
    double n = b.n_sym;
    double u = n * (theta - b.center);
    double cu = std::cos(u), su = std::sin(u);
    double g, dg, ddg;
    if (b.profile == BumpProfile::gaussian) {
        double beta = b.sharpness;
        g = std::exp(beta * (cu - 1.0));
        dg = -beta * n * su * g;
        ddg = (beta * beta * n * n * su * su - beta * n * n * cu) * g;
    } else {
        double eps = 1.0 / b.sharpness, c = b.slope;
        // 1 - cos u written as 2 sin^2(u/2) to keep accuracy near the tip.
        double sh = std::sin(0.5 * u);
        double q = 4.0 * sh * sh / (n * n);
        double dq = 2.0 * su / n, ddq = 2.0 * cu;
        double s = std::sqrt(q + eps * eps);
        double ds = dq / (2.0 * s);
        double dds = (ddq * s - dq * ds) / (2.0 * s * s);
        g = std::exp(-c * (s - eps));
        dg = -c * ds * g;
        ddg = (-c * dds + c * c * ds * ds) * g;
    }
    return {b.height * g, b.height * dg, b.height * ddg};
}

inline RadialFunction bump_radial(double base_radius, std::vector<Bump> bumps)
{
    return [base_radius, bumps = std::move(bumps)](double t) {
        RadialSample out {base_radius, 0.0, 0.0};
        for (const auto& b : bumps) {
            auto s = bump_sample(b, t);
            out.r += s.r;
            out.dr += s.dr;
            out.ddr += s.ddr;
        }
        return out;
    };
}

inline double radial_curvature(const RadialSample& s)
{
    double num = s.r * s.r + 2.0 * s.dr * s.dr - s.r * s.ddr;
    double den = std::pow(s.r * s.r + s.dr * s.dr, 1.5);
    return num / den;
}

namespace detail {

// Largest |kappa| of a radial curve near `center` (window `width`) and on a
// coarse global grid.
inline double max_abs_curvature(const RadialFunction& fn, double center, double width)
{
    double best = 0.0;
    constexpr int global = 4096, local = 4001;
    for (int i = 0; i < global; ++i)
        best = std::max(best, std::abs(radial_curvature(fn(two_pi * i / global))));
    for (int i = 0; i < local; ++i) {
        double t = center + width * (2.0 * i / (local - 1) - 1.0);
        best = std::max(best, std::abs(radial_curvature(fn(t))));
    }
    return best;
}

inline double bump_width(const Bump& b)
{
    double w = b.profile == BumpProfile::gaussian ? 10.0 / std::sqrt(b.sharpness)
                                                  : 60.0 / b.sharpness;
    return std::min(w / b.n_sym, std::numbers::pi / b.n_sym);
}

// Solve for the sharpness making |kappa| at the bump tip equal to target,
// with the other bumps fixed.
inline double calibrate_sharpness(double base_radius, std::vector<Bump> bumps, std::size_t which,
                                  double target)
{
    auto tip = [&](double log_sigma) {
        bumps[which].sharpness = std::exp(log_sigma);
        auto fn = bump_radial(base_radius, bumps);
        auto s = fn(bumps[which].center);
        if (!(s.r > 0.0))
            return std::numeric_limits<double>::quiet_NaN();
        double k = radial_curvature(s);
        // A dimple only counts once its tip is concave.
        if (bumps[which].height < 0.0 && k > 0.0)
            return -target;
        return std::abs(k) - target;
    };
    double hi = std::log(1.0);
    int guard = 0;
    while (!(tip(hi) > 0.0)) {
        hi += std::log(2.0);
        if (++guard > 200 || std::isnan(tip(hi)))
            throw CalibrationError("could not bracket bump sharpness for target curvature " +
                                   std::to_string(target));
    }
    double lo = hi;
    guard = 0;
    while (!(tip(lo) < 0.0)) {
        lo -= std::log(2.0);
        if (++guard > 200 || std::isnan(tip(lo)))
            throw CalibrationError("could not bracket bump sharpness for target curvature " +
                                   std::to_string(target));
    }
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    auto r = boost::math::tools::toms748_solve(tip, lo, hi, tol, iters);
    if (iters >= 200)
        throw CalibrationError("bump calibration did not converge");
    return std::exp(0.5 * (r.first + r.second));
}

} // namespace detail

/** A bump to be calibrated: its sharpness is solved from target_kappa. */
struct BumpTarget {
    double height = 0.5;
    double center = 0.0;
    double target_kappa = 10.0;
    BumpProfile profile = BumpProfile::rounded_corner;
    double slope = 2.0;
};

/**
 * Sum of calibrated bumps on a circle of radius base_radius. Each bump is
 * calibrated alone, then jointly refined, then the joint curve is checked.
 */
inline Curve make_bumps(double base_radius, const std::vector<BumpTarget>& targets)
{
    if (!(base_radius > 0.0))
        throw InvalidParameter("base radius must be positive");
    std::vector<Bump> bumps;
    std::vector<MarkedPoint> marks;
    std::map<std::string, double> params {{"base_radius", base_radius}};
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& tg = targets[i];
        double base_kappa = 1.0 / (base_radius + tg.height);
        if (!(tg.target_kappa > base_kappa))
            throw InvalidParameter("target curvature must exceed the base curvature");
        Bump b {tg.height, 1.0, tg.center, 1, tg.profile, tg.slope};
        b.sharpness = detail::calibrate_sharpness(base_radius, {b}, 0, tg.target_kappa);
        bumps.push_back(b);
        marks.push_back({"bump" + std::to_string(i), tg.center});
        std::string key = "bump" + std::to_string(i) + ".";
        params[key + "height"] = tg.height;
        params[key + "center"] = tg.center;
        params[key + "sharpness"] = b.sharpness;
        params[key + "target_kappa"] = tg.target_kappa;
    }
    // Tails of neighbouring bumps shift each tip slightly; re-solve each
    // sharpness with the others held fixed until the joint profile settles.
    for (int sweep = 0; sweep < 20 && bumps.size() > 1; ++sweep) {
        double worst = 0.0;
        for (std::size_t i = 0; i < bumps.size(); ++i) {
            double before = bumps[i].sharpness;
            bumps[i].sharpness =
                detail::calibrate_sharpness(base_radius, bumps, i, targets[i].target_kappa);
            worst = std::max(worst, std::abs(bumps[i].sharpness / before - 1.0));
        }
        if (worst < 1e-10)
            break;
    }
    for (std::size_t i = 0; i < bumps.size(); ++i)
        params["bump" + std::to_string(i) + ".sharpness"] = bumps[i].sharpness;
    auto fn = bump_radial(base_radius, bumps);
    for (std::size_t i = 0; i < bumps.size(); ++i) {
        double k = std::abs(radial_curvature(fn(bumps[i].center)));
        if (std::abs(k - targets[i].target_kappa) > 1e-3 * targets[i].target_kappa)
            throw CalibrationError("joint bump profile misses target curvature at bump " +
                                   std::to_string(i));
    }
    return make_radial(fn, std::move(marks), "bumps", std::move(params), CurveKind::composite);
}

inline constexpr double convex_bump_height = 0.5;
inline constexpr double concave_bump_height = 0.3;

/**
 * n-symmetric family r = 1 +- h g(theta) whose largest |curvature| equals
 * target_kappa_max within 0.1%. Marks sit at theta = 2 pi j / n.
 */
inline Curve make_bump_family(int n_sym, double target_kappa_max, bool concave = false,
                              BumpProfile profile = BumpProfile::rounded_corner)
{
    if (n_sym < 1)
        throw InvalidParameter("n_sym must be at least 1");
    if (!concave && std::abs(target_kappa_max - 1.0) < 1e-12) {
        // Degenerate member: no bump at all.
        return make_radial([](double) { return RadialSample {1.0, 0.0, 0.0}; }, {},
                           "bump_family",
                           {{"n_sym", double(n_sym)}, {"kappa_max", 1.0}, {"height", 0.0}});
    }
    double h = concave ? -concave_bump_height : convex_bump_height;
    if (!(target_kappa_max > 1.0))
        throw InvalidParameter("target curvature must exceed the base circle curvature 1");
    Bump b {h, 1.0, 0.0, n_sym, profile, 2.0};
    b.sharpness = detail::calibrate_sharpness(1.0, {b}, 0, target_kappa_max);
    auto fn = bump_radial(1.0, {b});
    double kmax = detail::max_abs_curvature(fn, 0.0, detail::bump_width(b));
    if (std::abs(kmax - target_kappa_max) > 1e-3 * target_kappa_max)
        throw CalibrationError("bump family maximum curvature " + std::to_string(kmax) +
                               " misses target " + std::to_string(target_kappa_max));
    std::vector<MarkedPoint> marks;
    for (int j = 0; j < n_sym; ++j)
        marks.push_back({"tip" + std::to_string(j), two_pi * j / n_sym});
    return make_radial(fn, std::move(marks), "bump_family",
                       {{"n_sym", double(n_sym)},
                        {"kappa_max", target_kappa_max},
                        {"height", h},
                        {"sharpness", b.sharpness},
                        {"concave", concave ? 1.0 : 0.0}},
                       CurveKind::radial);
}

// ---------------------------------------------------------------------------
// Transformations

/** The curve scaled about the origin by s > 0. */
inline Curve scaled(const Curve& c, double s)
{
    if (!(s > 0.0))
        throw InvalidParameter("scale factor must be positive");
    auto eval = [f = c.evaluator(), s](double t) {
        auto p = f(t);
        return CurvePoint {s * p.x, s * p.dx, s * p.ddx};
    };
    auto params = c.parameters();
    params["scale"] = s * (params.count("scale") ? params["scale"] : 1.0);
    return Curve(c.kind(), eval, c.marks(), c.name(), params);
}

/**
 * Reparametrization t -> phi(t) = t + shift + warp sin t with |warp| < 1.
 * Same point set, different speed.
 */
inline Curve reparametrized(const Curve& c, double shift, double warp = 0.0)
{
    if (!(std::abs(warp) < 1.0))
        throw InvalidParameter("warp must satisfy |warp| < 1");
    auto eval = [f = c.evaluator(), shift, warp](double t) {
        double phi = t + shift + warp * std::sin(t);
        double d1 = 1.0 + warp * std::cos(t), d2 = -warp * std::sin(t);
        auto p = f(phi);
        return CurvePoint {p.x, p.dx * d1, p.ddx * d1 * d1 + p.dx * d2};
    };
    std::vector<MarkedPoint> marks;
    for (auto m : c.marks()) {
        // Invert phi by Newton; phi is monotone.
        double target = m.t - shift, t = target;
        for (int it = 0; it < 100; ++it) {
            double f = t + warp * std::sin(t) - target;
            double dt = f / (1.0 + warp * std::cos(t));
            t -= dt;
            if (std::abs(dt) < 1e-15)
                break;
        }
        m.t = t - two_pi * std::floor(t / two_pi);
        marks.push_back(m);
    }
    return Curve(c.kind(), eval, std::move(marks), c.name(), c.parameters());
}

// ---------------------------------------------------------------------------
// Curvature profile

struct ProfileMark {
    std::string label;
    double t;
    double kappa;
};

struct CurvatureProfile {
    std::vector<double> t;
    std::vector<double> kappa;
    std::vector<double> s;
    double perimeter = 0.0;
    std::vector<ProfileMark> marks;
};

// Arc length of the curve between parameters a < b by 16-point Gauss.
inline double arc_length(const Curve& c, double a, double b)
{
    const auto& g = gauss_legendre_16();
    double mid = 0.5 * (a + b), hw = 0.5 * (b - a), sum = 0.0;
    for (int i = 0; i < panel_order; ++i)
        sum += g.weights[i] * c(mid + hw * g.nodes[i]).dx.norm();
    return sum * hw;
}

inline CurvatureProfile profile(const Curve& c, int n_samples)
{
    if (n_samples < 16)
        throw InvalidParameter("profile needs at least 16 samples");
    CurvatureProfile p;
    p.t.resize(n_samples);
    p.kappa.resize(n_samples);
    p.s.resize(n_samples);
    double s = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        double t = two_pi * i / n_samples;
        p.t[i] = t;
        p.kappa[i] = curvature(c, t);
        p.s[i] = s;
        // Subdivide each sample interval so sharp features are integrated well.
        constexpr int sub = 8;
        double h = two_pi / n_samples / sub;
        for (int k = 0; k < sub; ++k)
            s += arc_length(c, t + k * h, t + (k + 1) * h);
    }
    p.perimeter = s;
    if (!c.marks().empty()) {
        for (const auto& m : c.marks())
            p.marks.push_back({m.label, m.t, curvature(c, m.t)});
        return p;
    }
    std::vector<double> a(p.kappa);
    for (auto& v : a)
        v = std::abs(v);
    auto sorted = a;
    std::nth_element(sorted.begin(), sorted.begin() + n_samples / 2, sorted.end());
    double median = sorted[n_samples / 2];
    int count = 0;
    for (int i = 0; i < n_samples; ++i) {
        double prev = a[(i + n_samples - 1) % n_samples], next = a[(i + 1) % n_samples];
        if (a[i] > prev && a[i] >= next && a[i] > 2.0 * median)
            p.marks.push_back({"peak" + std::to_string(count++), p.t[i], p.kappa[i]});
    }
    return p;
}

// ---------------------------------------------------------------------------
// Serializable description

struct CircleSpec {
    double radius = 1.0;
};
struct EllipseSpec {
    double R0 = 1.0;
    double rho0 = 0.5;
};
struct BumpFamilySpec {
    int n_sym = 1;
    double kappa_max = 500.0;
    bool concave = false;
    BumpProfile profile = BumpProfile::rounded_corner;
};
struct BumpsSpec {
    double base_radius = 1.0;
    std::vector<BumpTarget> bumps;
};
struct StarSpec {
    double amplitude = 1e-4;
    double exponent = 8.0;
    int lobes = 12;
};

struct CurveSpec {
    std::variant<CircleSpec, EllipseSpec, BumpFamilySpec, BumpsSpec, StarSpec> shape;
    double scale = 1.0;
};

inline Curve make_curve(const CurveSpec& spec)
{
    Curve c = std::visit(
        [](const auto& s) -> Curve {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CircleSpec>)
                return make_circle(s.radius);
            else if constexpr (std::is_same_v<T, EllipseSpec>)
                return make_ellipse(s.R0, s.rho0);
            else if constexpr (std::is_same_v<T, BumpFamilySpec>)
                return make_bump_family(s.n_sym, s.kappa_max, s.concave, s.profile);
            else if constexpr (std::is_same_v<T, BumpsSpec>)
                return make_bumps(s.base_radius, s.bumps);
            else
                return make_star(s.amplitude, s.exponent, s.lobes);
        },
        spec.shape);
    return spec.scale == 1.0 ? c : scaled(c, spec.scale);
}

} // namespace nploc
