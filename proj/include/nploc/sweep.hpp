#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nploc/errors.hpp"
#include "nploc/fieldeval.hpp"
#include "nploc/geometry.hpp"
#include "nploc/layerpot.hpp"
#include "nploc/quadrature.hpp"
#include "nploc/spectral.hpp"

namespace nploc {

enum class Observable { eigenfunction, conormal };

inline const char* to_string(Observable o)
{
    return o == Observable::eigenfunction ? "eigenfunction" : "conormal";
}

/**
 * Which eigenvalue to follow across a family: the rank-th cluster (0-based,
 * by decreasing |lambda|) among clusters of the given sign, not counting 1/2.
 */
struct Track {
    int sign = 1;
    int rank = 0;

    std::string label() const { return (sign > 0 ? "+" : "-") + std::to_string(rank + 1); }
};

/** Observable suggested by the sign of lambda; concave domains swap the roles. */
inline Observable default_observable(int sign, bool concave)
{
    bool positive = (sign > 0) != concave;
    return positive ? Observable::eigenfunction : Observable::conormal;
}

struct SweepOptions {
    // All tracks share one eigendecomposition per mesh.
    std::vector<Track> tracks {Track {}};
    // Overrides the sign-based default for every track.
    std::optional<Observable> observable;
    // Taken from the curve parameter "concave" when not set.
    std::optional<bool> concave;
    int initial_panels = 32;
    bool graded = true;
    double convergence_tol = 0.01;
    std::size_t node_cap = 4096;
    double cluster_tol = 1e-5;
    Normalization normalization = Normalization::parameter_density;
};

struct SweepRecord {
    double kappa_max = 0.0;
    std::string track;
    cplx lambda;
    int rank = -1;           // overall rank of the tracked eigenvalue
    int cluster_dim = 1;
    Observable observable = Observable::eigenfunction;
    double psi_max = 0.0;    // observable at the marked point(s)
    double boundary_max = 0.0;
    // Arc-length distance from the boundary argmax to the nearest mark, also
    // in units of the panel length at the argmax.
    double argmax_distance = 0.0;
    double argmax_panels = 0.0;
    std::size_t nodes = 0;
    double change = 0.0;     // relative change in psi_max under the last doubling
    bool converged = false;
};

struct RegressionFit {
    double p = 0.0;
    double ln_alpha = 0.0;
    double residual = 0.0;
    std::size_t points = 0;
};

/** Largest |kappa| of a curve: closed form or recorded target where known, else sampled. */
inline double kappa_max_of(const Curve& c)
{
    const auto& prm = c.parameters();
    double scale = prm.count("scale") ? prm.at("scale") : 1.0;
    if (c.kind() == CurveKind::ellipse) {
        double sh = std::sinh(prm.at("rho0"));
        return std::cosh(prm.at("rho0")) / (prm.at("R0") * sh * sh) / scale;
    }
    if (prm.count("kappa_max"))
        return prm.at("kappa_max") / scale;
    auto pr = profile(c, 8192);
    double m = 0.0;
    for (double k : pr.kappa)
        m = std::max(m, std::abs(k));
    return m;
}

namespace detail {

// Arc-length distance between nodes i and j on a closed curve.
inline double periodic_arc_distance(const PanelMesh& m, double s_a, double s_b)
{
    double d = std::abs(s_a - s_b);
    return std::min(d, m.perimeter - d);
}

inline std::size_t nearest_node(const PanelMesh& m, double t)
{
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.size(); ++i) {
        double d = std::abs(m.t[i] - t);
        d = std::min(d, two_pi - d);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

/**
 * Value of |f| at the node nearest parameter t, improved by a parabola
 * through that node and its two neighbours when the parabola peaks between
 * them.
 */
inline double refined_peak(const PanelMesh& m, const Eigen::VectorXd& f, double t)
{
    const std::size_t n = m.size();
    std::size_t i = nearest_node(m, t);
    std::size_t a = (i + n - 1) % n, b = (i + 1) % n;
    // Local arc-length coordinates, unwrapped around node i.
    auto rel = [&](std::size_t j) {
        double d = m.arclength[j] - m.arclength[i];
        if (d > 0.5 * m.perimeter)
            d -= m.perimeter;
        if (d < -0.5 * m.perimeter)
            d += m.perimeter;
        return d;
    };
    double x0 = rel(a), x2 = rel(b);
    double y0 = f(a), y1 = f(i), y2 = f(b);
    // Parabola through (x0, y0), (0, y1), (x2, y2).
    double d0 = (y0 - y1) / x0, d2 = (y2 - y1) / x2;
    double c2 = (d2 - d0) / (x2 - x0);
    double c1 = d0 - c2 * x0;
    double best = std::max({y0, y1, y2});
    if (c2 < 0.0) {
        double xv = -c1 / (2.0 * c2);
        if (xv > x0 && xv < x2)
            best = std::max(best, y1 - c1 * c1 / (4.0 * c2));
    }
    return best;
}

inline void check_family(const std::vector<double>& kappas)
{
    if (kappas.size() < 3)
        throw InvalidParameter("a sweep needs at least 3 curvature values");
    for (std::size_t i = 1; i < kappas.size(); ++i)
        if (!(kappas[i] > kappas[i - 1]))
            throw InvalidParameter("curvature values must be strictly increasing");
}

/** Indices of the pairs forming the tracked cluster. */
inline std::vector<std::size_t> select_track(const std::vector<EigenPair>& pairs, const Track& tr,
                                             double cluster_tol)
{
    // One representative per cluster, in spectral order, skipping 1/2.
    std::vector<std::size_t> heads;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        if (r > 0 && pairs[r].cluster_id == pairs[r - 1].cluster_id)
            continue;
        if (std::abs(pairs[r].lambda - 0.5) < 1e-6)
            continue;
        double re = pairs[r].lambda.real();
        if ((tr.sign > 0 && re > 0.0) || (tr.sign < 0 && re < 0.0))
            heads.push_back(r);
    }
    if (tr.rank < 0 || std::size_t(tr.rank) >= heads.size())
        throw TrackingError("track " + tr.label() + " has no matching eigenvalue");
    std::size_t h = heads[tr.rank];
    // Neighbouring same-sign clusters closer than 10x the cluster tolerance
    // make the rank assignment unreliable.
    for (int nb : {tr.rank - 1, tr.rank + 1}) {
        if (nb < 0 || std::size_t(nb) >= heads.size())
            continue;
        cplx a = pairs[h].lambda, b = pairs[heads[nb]].lambda;
        if (std::abs(a - b) < 10.0 * cluster_tol * std::max(std::abs(a), std::abs(b)))
            throw TrackingError("track " + tr.label() + " is ambiguous between " +
                                std::to_string(a.real()) + " and " + std::to_string(b.real()));
    }
    std::vector<std::size_t> members;
    for (std::size_t r = h; r < pairs.size() && pairs[r].cluster_id == pairs[h].cluster_id; ++r)
        members.push_back(r);
    return members;
}

inline SweepRecord observe_track(const Curve& c, const PanelMesh& m,
                                 const std::vector<EigenPair>& pairs, const Track& tr,
                                 Observable obs, double kappa, double cluster_tol)
{
    auto members = select_track(pairs, tr, cluster_tol);
    SweepRecord rec;
    rec.kappa_max = kappa;
    rec.track = tr.label();
    rec.observable = obs;
    rec.nodes = m.size();
    rec.cluster_dim = int(members.size());
    rec.rank = pairs[members.front()].rank;
    rec.lambda = pairs[members.front()].lambda;

    // Largest observable over the cluster basis.
    for (auto r : members) {
        Eigen::VectorXd f = obs == Observable::eigenfunction
                                ? Eigen::VectorXd(pairs[r].samples.cwiseAbs())
                                : Eigen::VectorXd(conormal_derivative(m, pairs[r].samples).cwiseAbs());
        double at_mark = 0.0;
        for (const auto& mk : c.marks())
            at_mark = std::max(at_mark, refined_peak(m, f, mk.t));
        if (at_mark <= rec.psi_max)
            continue;
        rec.psi_max = at_mark;
        Eigen::Index imax = 0;
        rec.boundary_max = f.maxCoeff(&imax);
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& mk : c.marks()) {
            double s_mark = m.arclength[nearest_node(m, mk.t)];
            dist = std::min(dist, periodic_arc_distance(m, m.arclength[imax], s_mark));
        }
        rec.argmax_distance = dist;
        rec.argmax_panels = dist / m.local_length(std::size_t(imax));
    }
    return rec;
}

inline std::vector<SweepRecord> evaluate_member(const Curve& c, const std::vector<Panel>& panels,
                                                const SweepOptions& opt,
                                                const std::vector<Observable>& obs, double kappa)
{
    auto m = build_mesh(c, panels);
    auto op = assemble_np(m);
    SpectralOptions so;
    so.cluster_tol = opt.cluster_tol;
    so.normalization = opt.normalization;
    auto pairs = eigendecompose(op, m, so);
    std::vector<SweepRecord> out;
    for (std::size_t k = 0; k < opt.tracks.size(); ++k)
        out.push_back(observe_track(c, m, pairs, opt.tracks[k], obs[k], kappa, opt.cluster_tol));
    return out;
}

} // namespace detail

/**
 * Follows eigenvalues across a family of curves of increasing maximal
 * curvature and records the observable at the marked points. A curve's
 * records are accepted once doubling every panel changes each psi_max by
 * less than the convergence tolerance; past the node cap they are kept and
 * flagged. Records are grouped by track, in family order within a track.
 */
inline std::vector<SweepRecord> run_sweep(const std::vector<Curve>& family, const SweepOptions& opt = {})
{
    if (opt.tracks.empty())
        throw InvalidParameter("a sweep needs at least one track");
    std::vector<double> kappas;
    for (const auto& c : family) {
        if (c.marks().empty())
            throw InvalidGeometry("sweep curves need marked high-curvature points");
        kappas.push_back(kappa_max_of(c));
    }
    detail::check_family(kappas);
    const std::size_t nt = opt.tracks.size();
    std::vector<std::vector<SweepRecord>> by_track(nt);
    for (std::size_t f = 0; f < family.size(); ++f) {
        const Curve& c = family[f];
        bool concave = opt.concave.value_or(c.parameters().count("concave") &&
                                            c.parameters().at("concave") != 0.0);
        std::vector<Observable> obs;
        for (const auto& tr : opt.tracks)
            obs.push_back(opt.observable.value_or(default_observable(tr.sign, concave)));
        MeshOptions mo;
        mo.graded = opt.graded;
        std::vector<Panel> panels = build_mesh(c, opt.initial_panels, mo).panels;
        auto prev = detail::evaluate_member(c, panels, opt, obs, kappas[f]);
        for (;;) {
            auto finer = bisect(panels);
            if (finer.size() * panel_order > opt.node_cap)
                break;
            auto next = detail::evaluate_member(c, finer, opt, obs, kappas[f]);
            bool all = true;
            for (std::size_t k = 0; k < nt; ++k) {
                next[k].change = std::abs(next[k].psi_max - prev[k].psi_max) / next[k].psi_max;
                next[k].converged = next[k].change < opt.convergence_tol;
                all = all && next[k].converged;
            }
            panels = std::move(finer);
            prev = std::move(next);
            if (all)
                break;
        }
        for (std::size_t k = 0; k < nt; ++k)
            by_track[k].push_back(prev[k]);
    }
    std::vector<SweepRecord> out;
    for (auto& v : by_track)
        out.insert(out.end(), v.begin(), v.end());
    return out;
}

/** Records of one track label, in family order. */
inline std::vector<SweepRecord> track_records(const std::vector<SweepRecord>& records,
                                              const std::string& label)
{
    std::vector<SweepRecord> out;
    for (const auto& r : records)
        if (r.track == label)
            out.push_back(r);
    return out;
}

/** Least-squares line ln psi = ln alpha + p ln kappa. */
inline RegressionFit fit_power_law(const std::vector<double>& kappa, const std::vector<double>& psi)
{
    if (kappa.size() != psi.size())
        throw LengthMismatch("fit inputs differ in length");
    if (kappa.size() < 3)
        throw InvalidParameter("a power-law fit needs at least 3 points");
    const Eigen::Index n = Eigen::Index(kappa.size());
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(psi[i] > 0.0) || !(kappa[i] > 0.0))
            throw InvalidParameter("power-law fit needs positive data");
        a(i, 0) = 1.0;
        a(i, 1) = std::log(kappa[i]);
        y(i) = std::log(psi[i]);
    }
    Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
    RegressionFit fit;
    fit.ln_alpha = c(0);
    fit.p = c(1);
    fit.residual = (a * c - y).cwiseAbs().maxCoeff();
    fit.points = kappa.size();
    return fit;
}

inline RegressionFit fit_power_law(const std::vector<SweepRecord>& records)
{
    std::vector<double> k, p;
    for (const auto& r : records) {
        k.push_back(r.kappa_max);
        p.push_back(r.psi_max);
    }
    return fit_power_law(k, p);
}

inline bool strictly_increasing(const std::vector<SweepRecord>& records)
{
    for (std::size_t i = 1; i < records.size(); ++i)
        if (!(records[i].psi_max > records[i - 1].psi_max))
            return false;
    return true;
}

struct LabeledFit {
    std::string label;
    RegressionFit fit;
};

// Columns: label, p, ln_alpha, residual, points.
inline void table_report(std::ostream& os, const std::vector<LabeledFit>& fits)
{
    os.precision(17);
    os << "label,p,ln_alpha,residual,points\n";
    for (const auto& f : fits)
        os << f.label << ',' << f.fit.p << ',' << f.fit.ln_alpha << ',' << f.fit.residual << ','
           << f.fit.points << '\n';
}

// Columns: kappa_max, track, lambda, observable, psi_max, converged, nodes, argmax_panels.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records)
{
    os.precision(17);
    os << "kappa_max,track,lambda,observable,psi_max,converged,nodes,argmax_panels\n";
    for (const auto& r : records)
        os << r.kappa_max << ',' << r.track << ',' << r.lambda.real() << ',' << to_string(r.observable)
           << ',' << r.psi_max << ',' << (r.converged ? 1 : 0) << ',' << r.nodes << ','
           << r.argmax_panels << '\n';
}

} // namespace nploc
