#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nploc/errors.hpp"
#include "nploc/fieldeval.hpp"
#include "nploc/lapack.hpp"
#include "nploc/layerpot.hpp"
#include "nploc/quadrature.hpp"

namespace nploc {

/**
 * How eigenfunction samples are scaled.
 *
 * arc_length_l2: sum_j |phi_j|^2 w_j = 1.
 * parameter_density: the integral of |phi|^2 |x'(t)|^2 dt equals pi, so that
 * on an ellipse in its natural parametrization the eigenfunction of
 * +-a_n is exactly cos(n w)/Xi or sin(n w)/Xi.
 */
enum class Normalization { arc_length_l2, parameter_density };

inline const char* to_string(Normalization n)
{
    return n == Normalization::arc_length_l2 ? "arc_length_l2" : "parameter_density";
}

struct SpectralOptions {
    double cluster_tol = 1e-5;
    Normalization normalization = Normalization::arc_length_l2;
    // Clusters larger than this (numerical null spaces) keep the solver's
    // basis instead of the node-ordered Gram-Schmidt basis.
    int max_basis_selection = 32;
};

struct EigenPair {
    cplx lambda;
    Eigen::VectorXcd samples;
    double norm = 0.0; // discrete weighted L2 norm of samples
    int cluster_id = 0;
    int rank = 0;
};

namespace detail {

// Magnitude below which eigenvalues are compared absolutely.
inline constexpr double spectral_zero_floor = 1e-8;

inline bool near_equal(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), spectral_zero_floor});
}

inline bool near_equal(cplx a, cplx b, double tol)
{
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), spectral_zero_floor});
}

// Order: |lambda| descending, positive real part first among equal magnitudes.
inline std::vector<Eigen::Index> spectral_order(const Eigen::VectorXcd& values, double tol)
{
    std::vector<Eigen::Index> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
        return std::abs(values(a)) > std::abs(values(b));
    });
    std::size_t start = 0;
    while (start < idx.size()) {
        std::size_t end = start + 1;
        while (end < idx.size() &&
               near_equal(std::abs(values(idx[end - 1])), std::abs(values(idx[end])), tol))
            ++end;
        std::stable_sort(idx.begin() + start, idx.begin() + end, [&](auto a, auto b) {
            return values(a).real() > values(b).real();
        });
        start = end;
    }
    return idx;
}

inline void fix_phase(Eigen::VectorXcd& v)
{
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (std::abs(v(imax)) > 0.0)
        v *= std::conj(v(imax)) / std::abs(v(imax));
    v(imax) = std::abs(v(imax));
}

inline double weighted_norm(const Eigen::VectorXcd& v, const Eigen::VectorXd& w)
{
    return std::sqrt((v.cwiseAbs2().array() * w.array()).sum());
}

inline void normalize(Eigen::VectorXcd& v, const PanelMesh& m, Normalization mode)
{
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        s += std::norm(v(i)) * m.weight[i] * (mode == Normalization::parameter_density ? m.speed[i] : 1.0);
    double target = mode == Normalization::parameter_density ? std::numbers::pi : 1.0;
    if (s > 0.0)
        v *= std::sqrt(target / s);
}

/**
 * Weighted-orthonormal basis of span(cols) chosen deterministically: rows of
 * the orthonormal factor are visited in node order (which is arc-length
 * order) and Gram-Schmidt keeps each sufficiently new direction.
 */
inline Eigen::MatrixXcd node_ordered_basis(const Eigen::MatrixXcd& cols, const Eigen::VectorXd& w)
{
    const Eigen::Index n = cols.rows(), d = cols.cols();
    Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::MatrixXcd y = sw.asDiagonal() * cols;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(y);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, d);
    // Projection of the delta at node i onto the eigenspace has coefficients
    // conj(q.row(i)) in the basis q.
    double row_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        row_max = std::max(row_max, q.row(i).norm());
    std::vector<Eigen::VectorXcd> chosen;
    for (Eigen::Index i = 0; i < n && Eigen::Index(chosen.size()) < d; ++i) {
        Eigen::VectorXcd c = q.row(i).adjoint();
        for (const auto& b : chosen)
            c -= b * b.dot(c);
        for (const auto& b : chosen) // second pass for orthogonality
            c -= b * b.dot(c);
        double r = c.norm();
        if (r > 1e-2 * row_max)
            chosen.push_back(c / r);
    }
    if (Eigen::Index(chosen.size()) < d)
        throw NumericalFailure("eigenspace basis selection found too few directions");
    Eigen::MatrixXcd out(n, d);
    for (Eigen::Index k = 0; k < d; ++k)
        out.col(k) = sw.cwiseInverse().asDiagonal() * (q * chosen[k]);
    return out;
}

inline void require_static_np(const DenseOperator& op)
{
    if (op.kind != OperatorKind::np_static)
        throw InvalidParameter("spectral decomposition needs the static NP operator");
}

inline Eigen::MatrixXd symmetrized(const DenseOperator& op)
{
    Eigen::VectorXd sw = op.weights.cwiseSqrt();
    return sw.asDiagonal() * op.matrix.real() * sw.cwiseInverse().asDiagonal();
}

inline lapack::RealEigen checked_geev(const DenseOperator& op, bool vectors)
{
    Eigen::MatrixXd b = symmetrized(op);
    double norm1 = b.cwiseAbs().colwise().sum().maxCoeff();
    try {
        return lapack::geev(b, vectors);
    } catch (const NumericalFailure& e) {
        throw NumericalFailure(std::string(e.what()) + "; matrix 1-norm " + std::to_string(norm1) +
                               ", size " + std::to_string(op.size()));
    }
}

} // namespace detail

/** Eigenvalues of the weighted NP problem, sorted like eigendecompose. */
inline Eigen::VectorXcd np_eigenvalues(const DenseOperator& op, double cluster_tol = 1e-5)
{
    detail::require_static_np(op);
    auto eig = detail::checked_geev(op, false);
    auto order = detail::spectral_order(eig.values, cluster_tol);
    Eigen::VectorXcd out(order.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        out(r) = eig.values(order[r]);
    return out;
}

/**
 * Full spectrum of the Nystrom NP matrix, solved as the similar matrix
 * D^{1/2} A D^{-1/2} with D the quadrature weights.
 */
inline std::vector<EigenPair> eigendecompose(const DenseOperator& op, const PanelMesh& m,
                                             const SpectralOptions& opt = {})
{
    detail::require_static_np(op);
    if (op.size() != m.size())
        throw LengthMismatch("operator and mesh sizes differ");
    auto eig = detail::checked_geev(op, true);
    auto order = detail::spectral_order(eig.values, opt.cluster_tol);
    Eigen::VectorXd isw = op.weights.cwiseSqrt().cwiseInverse();

    std::vector<EigenPair> pairs(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        pairs[r].lambda = eig.values(order[r]);
        pairs[r].samples = isw.asDiagonal() * eig.vectors.col(order[r]);
        pairs[r].rank = int(r);
    }
    std::size_t start = 0;
    int cluster = 0;
    while (start < pairs.size()) {
        std::size_t end = start + 1;
        while (end < pairs.size() &&
               detail::near_equal(pairs[end - 1].lambda, pairs[end].lambda, opt.cluster_tol))
            ++end;
        std::size_t d = end - start;
        if (d > 1 && int(d) <= opt.max_basis_selection) {
            Eigen::MatrixXcd cols(m.size(), d);
            for (std::size_t k = 0; k < d; ++k)
                cols.col(k) = pairs[start + k].samples;
            Eigen::MatrixXcd basis = detail::node_ordered_basis(cols, op.weights);
            for (std::size_t k = 0; k < d; ++k)
                pairs[start + k].samples = basis.col(k);
        }
        for (std::size_t r = start; r < end; ++r) {
            pairs[r].cluster_id = cluster;
            detail::fix_phase(pairs[r].samples);
            detail::normalize(pairs[r].samples, m, opt.normalization);
            pairs[r].norm = detail::weighted_norm(pairs[r].samples, op.weights);
        }
        ++cluster;
        start = end;
    }
    return pairs;
}

inline double max_imag(const std::vector<EigenPair>& pairs)
{
    double m = 0.0;
    for (const auto& p : pairs)
        m = std::max(m, std::abs(p.lambda.imag()));
    return m;
}

/** Number of pairs sharing cluster_id c. */
inline std::size_t cluster_size(const std::vector<EigenPair>& pairs, int c)
{
    return std::count_if(pairs.begin(), pairs.end(), [c](const auto& p) { return p.cluster_id == c; });
}

// ---------------------------------------------------------------------------
// Permittivity map

/** lambda(eps) = (eps + 1) / (2 (eps - 1)). */
inline double permittivity_to_eigenvalue(double eps)
{
    if (eps == 1.0)
        throw InvalidParameter("permittivity 1 has no matching eigenvalue");
    return (eps + 1.0) / (2.0 * (eps - 1.0));
}

/** Inverse map eps = (2 lambda + 1) / (2 lambda - 1) for lambda in (-1/2, 1/2). */
inline double eigenvalue_to_permittivity(double lambda)
{
    if (lambda == 0.5)
        throw InvalidParameter("lambda = 1/2 is a pole of the permittivity map");
    if (!(lambda > -0.5 && lambda < 0.5))
        throw InvalidParameter("lambda must lie in (-1/2, 1/2)");
    return (2.0 * lambda + 1.0) / (2.0 * lambda - 1.0);
}

// ---------------------------------------------------------------------------
// The lambda = 1/2 eigenfunction: its single layer is constant inside

struct HalfEigenReport {
    cplx lambda;
    cplx mean;
    double max_deviation = 0.0;
    double scale = 0.0;
    double relative_deviation = 0.0;
    std::size_t probes = 0;
    bool passed = false;
};

inline const EigenPair& find_half_pair(const std::vector<EigenPair>& pairs, double tol = 1e-6)
{
    const EigenPair* best = nullptr;
    for (const auto& p : pairs)
        if (!best || std::abs(p.lambda - 0.5) < std::abs(best->lambda - 0.5))
            best = &p;
    if (!best || std::abs(best->lambda - 0.5) > tol)
        throw MissingEigenvalue("no eigenvalue within " + std::to_string(tol) + " of 1/2");
    return *best;
}

/**
 * Evaluates S[psi_0] at interior probes c + f (x_j - c), f in {0.2, 0.4, 0.6},
 * for 32 boundary nodes x_j and the node centroid c. The deviation from the
 * mean is measured relative to max(|mean|, ||psi_0||_1 / 2pi); the second
 * term keeps the measure meaningful when the constant happens to vanish, as
 * on the unit circle where R ln R = 0.
 */
inline HalfEigenReport check_half_eigen(const std::vector<EigenPair>& pairs, const PanelMesh& m,
                                        double threshold = 1e-6)
{
    const auto& half = find_half_pair(pairs);
    Vec2 c = Vec2::Zero();
    for (std::size_t j = 0; j < m.size(); ++j)
        c += m.x[j] * m.weight[j];
    c /= m.perimeter;
    std::vector<Vec2> probes;
    const std::size_t stride = std::max<std::size_t>(1, m.size() / 32);
    for (double f : {0.2, 0.4, 0.6})
        for (std::size_t j = 0; j < m.size(); j += stride) {
            Vec2 p = c + f * (m.x[j] - c);
            if (classify(m, p) == CellMask::interior)
                probes.push_back(p);
        }
    if (probes.size() < 3)
        throw InsufficientGrid("too few interior probes for the constancy check");
    HalfEigenReport rep;
    rep.lambda = half.lambda;
    std::vector<cplx> vals;
    for (const auto& p : probes)
        vals.push_back(single_layer_at(m, half.samples, p));
    rep.mean = std::accumulate(vals.begin(), vals.end(), cplx(0.0)) / double(vals.size());
    for (auto v : vals)
        rep.max_deviation = std::max(rep.max_deviation, std::abs(v - rep.mean));
    double l1 = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j)
        l1 += std::abs(half.samples(j)) * m.weight[j];
    rep.scale = std::max(std::abs(rep.mean), l1 / two_pi);
    rep.relative_deviation = rep.max_deviation / rep.scale;
    rep.probes = probes.size();
    rep.passed = rep.relative_deviation < threshold;
    return rep;
}

// ---------------------------------------------------------------------------
// Ellipse in elliptic coordinates x = R0 (cosh rho cos w, sinh rho sin w)

struct EllipticCoordinates {
    double rho;
    double omega;
};

/** Closed-form spectral data of the ellipse rho = rho0. */
class EllipseOracle {
public:
    EllipseOracle(double R0, double rho0) : R0_(R0), rho0_(rho0)
    {
        if (!(R0 > 0.0) || !(rho0 > 0.0))
            throw InvalidParameter("ellipse oracle needs R0 > 0 and rho0 > 0");
    }

    double R0() const { return R0_; }
    double rho0() const { return rho0_; }

    double a(int n) const { return 0.5 * std::exp(-2.0 * n * rho0_); }
    // +a_n belongs to the cosine family, -a_n to the sine family.
    double eigenvalue(int n, int sign) const { return sign >= 0 ? a(n) : -a(n); }

    double xi(double w) const
    {
        double sh = std::sinh(rho0_), s = std::sin(w);
        return R0_ * std::sqrt(sh * sh + s * s);
    }
    double phi1(int n, double w) const { return std::cos(n * w) / xi(w); }
    double phi2(int n, double w) const { return std::sin(n * w) / xi(w); }

    double kappa_max() const
    {
        double sh = std::sinh(rho0_);
        return std::cosh(rho0_) / (R0_ * sh * sh);
    }
    double tau_max() const { return 1.0 / (R0_ * std::sinh(rho0_)); }
    // |d phi_{2,n}| at the vertices, with d = (d/dt)/|x'(t)| = d/ds.
    double tau_prime_max(int n) const
    {
        double sh = std::sinh(rho0_);
        return n / (R0_ * R0_ * sh * sh);
    }

    EllipticCoordinates coordinates(const Vec2& x) const
    {
        cplx z = std::acosh(cplx(x.x(), x.y()) / R0_);
        if (z.real() < 0.0)
            z = -z;
        double w = z.imag();
        if (w < 0.0)
            w += two_pi;
        return {z.real(), w};
    }

    /** S[phi_{1,n}] at a point, inside or outside. */
    double single_layer_cos(int n, const Vec2& x) const
    {
        auto e = coordinates(x);
        double num = e.rho <= rho0_ ? 2.0 * std::cosh(n * e.rho) * std::exp(-n * rho0_)
                                    : 2.0 * std::cosh(n * rho0_) * std::exp(-n * e.rho);
        return -num / (2.0 * n) * std::cos(n * e.omega);
    }

    /**
     * S[phi_{2,n}]. The radial factor is the odd one (sinh): only that
     * combination is regular across the focal segment and satisfies the
     * jump relation with eigenvalue -a_n.
     */
    double single_layer_sin(int n, const Vec2& x) const
    {
        auto e = coordinates(x);
        double num = e.rho <= rho0_ ? 2.0 * std::sinh(n * e.rho) * std::exp(-n * rho0_)
                                    : 2.0 * std::sinh(n * rho0_) * std::exp(-n * e.rho);
        return -num / (2.0 * n) * std::sin(n * e.omega);
    }

private:
    double R0_;
    double rho0_;
};

inline EllipseOracle ellipse_oracle(double R0, double rho0) { return EllipseOracle(R0, rho0); }

struct OracleRow {
    int n = 0;
    int sign = 1;
    double expected = 0.0;
    cplx computed;
    double eigenvalue_error = 0.0;
    double subspace_angle = 0.0;  // radians, between computed and exact eigenfunction
    double l2_distance = 0.0;     // after optimal phase alignment, both unit-normalized
    int rank = -1;
};

/**
 * Compares the computed spectrum of an ellipse mesh with the closed forms for
 * n = 1..n_max and both signs. The oracle eigenfunctions are evaluated at the
 * node positions, so any parametrization of the ellipse works.
 */
inline std::vector<OracleRow> match_oracle(const std::vector<EigenPair>& pairs, const PanelMesh& m,
                                           const EllipseOracle& oracle, int n_max)
{
    std::vector<OracleRow> rows;
    if (n_max < 0)
        throw InvalidParameter("n_max must be non-negative");
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(m.weight.data(), m.size());
    for (int n = 1; n <= n_max; ++n) {
        for (int sign : {1, -1}) {
            OracleRow row;
            row.n = n;
            row.sign = sign;
            row.expected = oracle.eigenvalue(n, sign);
            const EigenPair* best = nullptr;
            for (const auto& p : pairs)
                if (!best || std::abs(p.lambda - row.expected) < std::abs(best->lambda - row.expected))
                    best = &p;
            if (!best)
                throw MissingEigenvalue("empty spectrum");
            std::size_t dim = cluster_size(pairs, best->cluster_id);
            if (dim != 1)
                throw MultiplicityMismatch("eigenvalue " + std::to_string(row.expected) +
                                           " expected simple, cluster has dimension " +
                                           std::to_string(dim));
            row.computed = best->lambda;
            row.rank = best->rank;
            row.eigenvalue_error = std::abs(best->lambda - row.expected);
            Eigen::VectorXcd f(m.size());
            for (std::size_t j = 0; j < m.size(); ++j) {
                double om = oracle.coordinates(m.x[j]).omega;
                f(j) = sign > 0 ? oracle.phi1(n, om) : oracle.phi2(n, om);
            }
            Eigen::VectorXcd u = best->samples / detail::weighted_norm(best->samples, w);
            f /= detail::weighted_norm(f, w);
            cplx ip = 0.0;
            for (std::size_t j = 0; j < m.size(); ++j)
                ip += std::conj(u(j)) * f(j) * w(j);
            Eigen::VectorXcd perp = f - ip * u;
            double s = detail::weighted_norm(perp, w);
            row.subspace_angle = std::atan2(s, std::abs(ip));
            cplx phase = std::abs(ip) > 0.0 ? ip / std::abs(ip) : cplx(1.0);
            row.l2_distance = detail::weighted_norm(f - phase * u, w);
            rows.push_back(row);
        }
    }
    return rows;
}

// Columns: rank, re, im, cluster, kappa_max.
inline void write_spectrum_csv(std::ostream& os, const std::vector<EigenPair>& pairs,
                               double kappa_max)
{
    os.precision(17);
    os << "rank,re,im,cluster,kappa_max\n";
    for (const auto& p : pairs)
        os << p.rank << ',' << p.lambda.real() << ',' << p.lambda.imag() << ',' << p.cluster_id
           << ',' << kappa_max << '\n';
}

} // namespace nploc
