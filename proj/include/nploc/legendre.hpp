#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace nploc {

/** Gauss-Legendre rule on [-1, 1], nodes ascending. */
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Values P_0..P_n at x by the three-term recurrence.
inline void legendre_values(double x, int n, double* out)
{
    out[0] = 1.0;
    if (n == 0)
        return;
    out[1] = x;
    for (int m = 1; m < n; ++m)
        out[m + 1] = ((2 * m + 1) * x * out[m] - m * out[m - 1]) / (m + 1);
}

inline GaussRule gauss_legendre(int n)
{
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Tricomi initial guess, refined by Newton on P_n.
        double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int m = 1; m < n; ++m) {
                double p2 = ((2 * m + 1) * x * p1 - m * p0) / (m + 1);
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double p0 = 1.0, p1 = x;
        for (int m = 1; m < n; ++m) {
            double p2 = ((2 * m + 1) * x * p1 - m * p0) / (m + 1);
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

inline constexpr int panel_order = 16;

inline const GaussRule& gauss_legendre_16()
{
    static const GaussRule rule = gauss_legendre(panel_order);
    return rule;
}

/**
 * Differentiation matrix on the 16 Gauss nodes: (D f)_i is the derivative at
 * node i of the degree-15 interpolant through f.
 */
inline const Eigen::Matrix<double, panel_order, panel_order>& gauss_differentiation_16()
{
    static const auto mat = [] {
        const auto& g = gauss_legendre_16();
        constexpr int n = panel_order;
        std::array<double, n> bw {};
        for (int j = 0; j < n; ++j) {
            double p = 1.0;
            for (int k = 0; k < n; ++k)
                if (k != j)
                    p *= g.nodes[j] - g.nodes[k];
            bw[j] = 1.0 / p;
        }
        Eigen::Matrix<double, n, n> d;
        for (int i = 0; i < n; ++i) {
            double diag = 0.0;
            for (int j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                d(i, j) = (bw[j] / bw[i]) / (g.nodes[i] - g.nodes[j]);
                diag -= d(i, j);
            }
            d(i, i) = diag;
        }
        return d;
    }();
    return mat;
}

/**
 * Maps 16 nodal values to Legendre coefficients a_0..a_15 of their
 * interpolant.
 */
inline const Eigen::Matrix<double, panel_order, panel_order>& gauss_to_legendre_16()
{
    static const auto mat = [] {
        const auto& g = gauss_legendre_16();
        constexpr int n = panel_order;
        Eigen::Matrix<double, n, n> c;
        std::array<double, n> p {};
        for (int j = 0; j < n; ++j) {
            legendre_values(g.nodes[j], n - 1, p.data());
            for (int k = 0; k < n; ++k)
                c(k, j) = 0.5 * (2 * k + 1) * g.weights[j] * p[k];
        }
        return c;
    }();
    return mat;
}

} // namespace nploc
