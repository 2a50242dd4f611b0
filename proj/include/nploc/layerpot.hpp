#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nploc/errors.hpp"
#include "nploc/legendre.hpp"
#include "nploc/quadrature.hpp"
#include "nploc/special.hpp"

namespace nploc {

enum class OperatorKind { np_static, sl_static, np_helmholtz, sl_helmholtz };

inline const char* to_string(OperatorKind k)
{
    switch (k) {
    case OperatorKind::np_static: return "NP_static";
    case OperatorKind::sl_static: return "SL_static";
    case OperatorKind::np_helmholtz: return "NP_helmholtz";
    case OperatorKind::sl_helmholtz: return "SL_helmholtz";
    }
    return "?";
}

/**
 * Nystrom matrix acting on nodal values: (A phi)_i approximates the operator
 * applied to phi at node i. The quadrature weights of the generating mesh are
 * kept alongside.
 */
struct DenseOperator {
    OperatorKind kind = OperatorKind::np_static;
    cplx k = 0.0;
    Eigen::MatrixXcd matrix;
    Eigen::VectorXd weights;

    std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
};

inline double np_kernel(const Vec2& x, const Vec2& nu_x, const Vec2& y)
{
    Vec2 d = x - y;
    return d.dot(nu_x) / (two_pi * d.squaredNorm());
}

inline double np_diagonal(const PanelMesh& m, std::size_t j)
{
    double sp = m.speed[j];
    return -m.ddx[j].dot(m.normal[j]) / (2.0 * sp * sp) / two_pi;
}

// ---------------------------------------------------------------------------
// Product integration against ln|tau - s| on [-1, 1]

/** M_k(tau) = integral over [-1, 1] of ln|tau - s| P_k(s) ds, k = 0..15. */
inline std::array<double, panel_order> log_moments(double tau)
{
    constexpr int n = panel_order;
    // q[m] = integral of P_m(s) / (tau - s) ds (principal value inside [-1, 1]).
    std::array<double, n + 1> q {};
    double q0 = std::log(std::abs((tau + 1.0) / (tau - 1.0)));
    if (std::abs(tau) <= 1.0) {
        q[0] = q0;
        q[1] = tau * q0 - 2.0;
        for (int m = 1; m < n; ++m)
            q[m + 1] = ((2 * m + 1) * tau * q[m] - m * q[m - 1]) / (m + 1);
    } else {
        // Outside the interval the wanted solution is recessive: Miller's
        // backward recurrence, normalized by the exact q0.
        double at = std::abs(tau);
        double rho = at + std::sqrt(at * at - 1.0);
        int extra = static_cast<int>(std::ceil(40.0 / std::log(rho)));
        int top = n + std::min(extra, 4000) + 2;
        double f_next = 0.0, f = 1.0;
        std::vector<double> f_store(n + 1);
        for (int m = top; m >= 1; --m) {
            double f_prev = ((2 * m + 1) * tau * f - (m + 1) * f_next) / m;
            f_next = f;
            f = f_prev;
            if (m - 1 <= n)
                f_store[m - 1] = f;
            if (std::abs(f) > 1e250) {
                f *= 1e-250;
                f_next *= 1e-250;
                for (auto& v : f_store)
                    v *= 1e-250;
            }
        }
        double scale = q0 / f_store[0];
        for (int m = 0; m <= n; ++m)
            q[m] = f_store[m] * scale;
    }
    std::array<double, n> out {};
    double a = tau + 1.0, b = tau - 1.0;
    out[0] = (a == 0.0 ? 0.0 : a * std::log(std::abs(a))) -
             (b == 0.0 ? 0.0 : b * std::log(std::abs(b))) - 2.0;
    for (int k = 1; k < n; ++k)
        out[k] = (q[k + 1] - q[k - 1]) / (2 * k + 1);
    return out;
}

/**
 * Weights v_j on the 16 Gauss nodes with sum_j v_j f(s_j) equal to the
 * integral of ln|tau - s| f(s) over [-1, 1] for polynomials f of degree <= 15.
 */
inline std::array<double, panel_order> log_weights(double tau)
{
    const auto& g = gauss_legendre_16();
    auto mom = log_moments(tau);
    std::array<double, panel_order> w {};
    std::array<double, panel_order> p {};
    for (int j = 0; j < panel_order; ++j) {
        legendre_values(g.nodes[j], panel_order - 1, p.data());
        double s = 0.0;
        for (int k = 0; k < panel_order; ++k)
            s += 0.5 * (2 * k + 1) * mom[k] * p[k];
        w[j] = s * g.weights[j];
    }
    return w;
}

namespace detail {

// Self-panel log weights for each node as target, computed once.
inline const std::array<std::array<double, panel_order>, panel_order>& self_log_weights()
{
    static const auto table = [] {
        std::array<std::array<double, panel_order>, panel_order> t {};
        const auto& g = gauss_legendre_16();
        for (int i = 0; i < panel_order; ++i)
            t[i] = log_weights(g.nodes[i]);
        return t;
    }();
    return table;
}

// Local coordinate of parameter t on panel p, wrapped periodically.
inline double local_coordinate(const PanelMesh& m, std::size_t p, double t)
{
    double mid = 0.5 * (m.panels[p].t0 + m.panels[p].t1);
    double hw = 0.5 * (m.panels[p].t1 - m.panels[p].t0);
    double d = t - mid;
    d -= two_pi * std::round(d / two_pi);
    return d / hw;
}

/**
 * For target node i and a near panel q, the decomposition
 *   ln|x_i - x(t)| = ln|tau - s| + ln(hw) + R(s)
 * with R smooth. Returns log weights and ln(hw) + R at the panel nodes.
 */
struct NearPanelRule {
    std::array<double, panel_order> logw;
    std::array<double, panel_order> smooth;
    double hw;
};

inline NearPanelRule near_panel_rule(const PanelMesh& m, std::size_t i, std::size_t q)
{
    const auto& g = gauss_legendre_16();
    NearPanelRule rule;
    rule.hw = 0.5 * (m.panels[q].t1 - m.panels[q].t0);
    double lhw = std::log(rule.hw);
    bool self = static_cast<std::size_t>(m.panel_of[i]) == q;
    double tau = self ? g.nodes[i % panel_order] : local_coordinate(m, q, m.t[i]);
    rule.logw = self ? self_log_weights()[i % panel_order] : log_weights(tau);
    for (int jj = 0; jj < panel_order; ++jj) {
        std::size_t j = q * panel_order + jj;
        if (j == i) {
            rule.smooth[jj] = lhw + std::log(m.speed[i]);
        } else {
            double r = (m.x[i] - m.x[j]).norm();
            rule.smooth[jj] = std::log(r / std::abs(tau - g.nodes[jj]));
        }
    }
    return rule;
}

inline std::array<std::size_t, 3> near_panels(const PanelMesh& m, std::size_t i)
{
    std::size_t p = static_cast<std::size_t>(m.panel_of[i]), n = m.panel_count();
    return {p, (p + n - 1) % n, (p + 1) % n};
}

inline DenseOperator make_operator(const PanelMesh& m, OperatorKind kind, cplx k)
{
    DenseOperator op;
    op.kind = kind;
    op.k = k;
    op.matrix.resize(m.size(), m.size());
    op.weights = Eigen::Map<const Eigen::VectorXd>(m.weight.data(), m.size());
    return op;
}

inline void check_wavenumber(cplx k)
{
    if (k == 0.0)
        throw InvalidParameter("wavenumber zero: use the static assembly");
    require_upper_half_plane(k);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Static operators

inline DenseOperator assemble_np(const PanelMesh& m)
{
    auto op = detail::make_operator(m, OperatorKind::np_static, 0.0);
    const std::size_t n = m.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            op.matrix(i, j) = (i == j ? np_diagonal(m, j) : np_kernel(m.x[i], m.normal[i], m.x[j])) *
                              m.weight[j];
    return op;
}

inline DenseOperator assemble_sl(const PanelMesh& m)
{
    auto op = detail::make_operator(m, OperatorKind::sl_static, 0.0);
    const std::size_t n = m.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (i != j)
                op.matrix(i, j) = std::log((m.x[i] - m.x[j]).norm()) / two_pi * m.weight[j];
    const auto& g = gauss_legendre_16();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t q : detail::near_panels(m, i)) {
            auto rule = detail::near_panel_rule(m, i, q);
            for (int jj = 0; jj < panel_order; ++jj) {
                std::size_t j = q * panel_order + jj;
                op.matrix(i, j) = rule.hw * m.speed[j] *
                                  (rule.logw[jj] + g.weights[jj] * rule.smooth[jj]) / two_pi;
            }
        }
    }
    return op;
}

// ---------------------------------------------------------------------------
// Helmholtz operators with G^k(x) = -(i/4) H0(k|x|)

inline DenseOperator assemble_sl_k(const PanelMesh& m, cplx k)
{
    detail::check_wavenumber(k);
    auto op = detail::make_operator(m, OperatorKind::sl_helmholtz, k);
    const std::size_t n = m.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (i != j)
                op.matrix(i, j) = helmholtz_green(k, (m.x[i] - m.x[j]).norm()) * m.weight[j];
    const auto& g = gauss_legendre_16();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t q : detail::near_panels(m, i)) {
            auto rule = detail::near_panel_rule(m, i, q);
            for (int jj = 0; jj < panel_order; ++jj) {
                std::size_t j = q * panel_order + jj;
                double r = i == j ? 0.0 : (m.x[i] - m.x[j]).norm();
                auto s = kernel_split(k, r);
                cplx log_part = s.j0 * (rule.logw[jj] + g.weights[jj] * rule.smooth[jj]) / two_pi;
                op.matrix(i, j) = rule.hw * m.speed[j] * (log_part + g.weights[jj] * s.g_smooth);
            }
        }
    }
    return op;
}

inline DenseOperator assemble_np_k(const PanelMesh& m, cplx k)
{
    detail::check_wavenumber(k);
    auto op = detail::make_operator(m, OperatorKind::np_helmholtz, k);
    const std::size_t n = m.size();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) {
                op.matrix(i, j) = np_diagonal(m, j) * m.weight[j];
                continue;
            }
            Vec2 d = m.x[i] - m.x[j];
            double r = d.norm();
            double c = d.dot(m.normal[i]) / r;
            op.matrix(i, j) = cplx(0.0, 0.25) * k * hankel_h1(k * r) * c * m.weight[j];
        }
    }
    // Near panels: static kernel by plain Gauss plus the log-weighted part of
    // the finite-frequency correction.
    const auto& g = gauss_legendre_16();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t q : detail::near_panels(m, i)) {
            auto rule = detail::near_panel_rule(m, i, q);
            for (int jj = 0; jj < panel_order; ++jj) {
                std::size_t j = q * panel_order + jj;
                if (j == i) {
                    op.matrix(i, j) = np_diagonal(m, j) * m.weight[j];
                    continue;
                }
                Vec2 d = m.x[i] - m.x[j];
                double r = d.norm();
                double c = d.dot(m.normal[i]) / r;
                auto s = kernel_split(k, r);
                cplx log_coef = -k * s.j1 * c / two_pi;
                cplx corr = rule.hw * m.speed[j] *
                            (log_coef * (rule.logw[jj] + g.weights[jj] * rule.smooth[jj]) +
                             g.weights[jj] * s.d_smooth * c);
                op.matrix(i, j) = np_kernel(m.x[i], m.normal[i], m.x[j]) * m.weight[j] + corr;
            }
        }
    }
    return op;
}

// ---------------------------------------------------------------------------
// Diagnostics

/**
 * Largest singular value of an operator in the discrete weighted L2 norm,
 * by power iteration on B^H B with B = W^{1/2} A W^{-1/2}.
 */
inline double weighted_operator_norm(const Eigen::MatrixXcd& a, const Eigen::VectorXd& w,
                                     double tol = 1e-8, int max_iter = 2000)
{
    Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::MatrixXcd b = sw.asDiagonal() * a * sw.cwiseInverse().asDiagonal();
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(b.cols());
    // A fixed, non-symmetric start vector avoids accidental orthogonality.
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = cplx(1.0 + 0.37 * std::sin(1.3 * i), 0.11 * std::cos(0.7 * i));
    v.normalize();
    double sigma2 = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXcd u = b.adjoint() * (b * v);
        double s2 = u.norm();
        if (s2 == 0.0)
            return 0.0;
        v = u / s2;
        if (std::abs(s2 - sigma2) <= tol * s2) {
            sigma2 = s2;
            break;
        }
        sigma2 = s2;
    }
    return std::sqrt(sigma2);
}

struct QuasiStaticRow {
    double k;
    double residual_k;
    double residual_s;
    double residual_s_uncorrected;
    bool outside_regime;
};

inline double mesh_diameter(const PanelMesh& m)
{
    double d = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j)
            d = std::max(d, (m.x[i] - m.x[j]).norm());
    return d;
}

/**
 * Scaled distances of the finite-frequency operators from their static
 * limits: ||K^k* - K*|| / (k^2 |ln k|) and ||S^k - S - tau<., 1>|| likewise.
 */
inline std::vector<QuasiStaticRow> quasistatic_residual(const PanelMesh& m,
                                                        const std::vector<double>& ks)
{
    std::vector<QuasiStaticRow> rows;
    if (ks.empty())
        return rows;
    auto k0 = assemble_np(m);
    auto s0 = assemble_sl(m);
    double diam = mesh_diameter(m);
    Eigen::VectorXd w = k0.weights;
    for (double k : ks) {
        if (!(k > 0.0))
            throw InvalidParameter("quasi-static check needs real positive wavenumbers");
        double scale = k * k * std::abs(std::log(k));
        auto kk = assemble_np_k(m, k);
        auto sk = assemble_sl_k(m, k);
        Eigen::MatrixXcd dk = kk.matrix - k0.matrix;
        Eigen::MatrixXcd ds = sk.matrix - s0.matrix;
        cplx tau = helmholtz_tau(k);
        Eigen::MatrixXcd ones_w = Eigen::VectorXcd::Ones(m.size()) * w.transpose().cast<cplx>();
        QuasiStaticRow row;
        row.k = k;
        row.residual_k = weighted_operator_norm(dk, w) / scale;
        row.residual_s_uncorrected = weighted_operator_norm(ds, w) / scale;
        row.residual_s = weighted_operator_norm(ds - tau * ones_w, w) / scale;
        row.outside_regime = k * diam > 0.5;
        rows.push_back(row);
    }
    return rows;
}

struct ColumnIdentityReport {
    double max_defect = 0.0;     // max_j |sum_i w_i A_ij / w_j - 1/2|
    double max_estimate = 0.0;   // largest per-column quadrature error estimate
    double worst_ratio = 0.0;    // max_j defect_j / estimate_j
    bool passed = false;         // every defect within 10x its estimate
};

/**
 * Checks the Gauss identity: the integral of K*(x, y) over x equals 1/2 for
 * every y on the curve. The per-column error estimate uses the top Legendre
 * coefficients of x -> K*(x, y_j) on each panel, floored at rounding level.
 */
inline ColumnIdentityReport column_identity(const DenseOperator& op, const PanelMesh& m)
{
    if (op.kind != OperatorKind::np_static)
        throw InvalidParameter("column identity applies to the static NP operator");
    const std::size_t n = m.size();
    const auto& c = gauss_to_legendre_16();
    ColumnIdentityReport rep;
    rep.passed = true;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0, abs_sum = 0.0, est = 0.0;
        Eigen::Matrix<double, panel_order, 1> f;
        for (std::size_t p = 0; p < m.panel_count(); ++p) {
            for (int q = 0; q < panel_order; ++q) {
                std::size_t i = p * panel_order + q;
                double kij = op.matrix(i, j).real() / m.weight[j];
                f(q) = kij * m.speed[i];
                sum += m.weight[i] * kij;
                abs_sum += std::abs(m.weight[i] * kij);
            }
            Eigen::Matrix<double, panel_order, 1> a = c * f;
            double hw = 0.5 * (m.panels[p].t1 - m.panels[p].t0);
            est += hw * (std::abs(a(panel_order - 1)) + std::abs(a(panel_order - 2)));
        }
        est += 10.0 * std::sqrt(double(n)) * eps * std::max(abs_sum, 1.0);
        double defect = std::abs(sum - 0.5);
        rep.max_defect = std::max(rep.max_defect, defect);
        rep.max_estimate = std::max(rep.max_estimate, est);
        rep.worst_ratio = std::max(rep.worst_ratio, defect / est);
        if (defect > 10.0 * est)
            rep.passed = false;
    }
    return rep;
}

/** Row-major CSV dump: header line with metadata, then re,im pairs per row. */
inline void write_operator_csv(std::ostream& os, const DenseOperator& op)
{
    os.precision(17);
    os << "# kind=" << to_string(op.kind) << " k=" << op.k.real() << (op.k.imag() < 0 ? "" : "+")
       << op.k.imag() << "i nodes=" << op.size() << "\n";
    for (std::size_t i = 0; i < op.size(); ++i) {
        for (std::size_t j = 0; j < op.size(); ++j) {
            if (j)
                os << ',';
            os << op.matrix(i, j).real() << ',' << op.matrix(i, j).imag();
        }
        os << '\n';
    }
}

} // namespace nploc
