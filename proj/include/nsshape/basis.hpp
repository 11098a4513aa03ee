#pragma once

/// 1D polynomial building blocks: Gauss-Legendre rules, normalized Legendre
/// polynomials and Lagrange bases on uniform nodes. Everything lives on the
/// reference interval [-1, 1].

#include "nsshape/common.hpp"

#include <cmath>
#include <vector>

namespace nsshape {

struct QuadRule1D {
    std::vector<double> x;
    std::vector<double> w;
    int size() const { return static_cast<int>(x.size()); }
};

/// n-point Gauss-Legendre rule on [-1,1], exact for degree 2n-1.
inline QuadRule1D gauss_legendre(int n) {
    QuadRule1D rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration from the Chebyshev estimate
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double p0, p1;
        for (int it = 0; it < 100; ++it) {
            p0 = 1.0;
            p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.x[n - 1 - i] = x;
        rule.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

/// Normalized Legendre values and first/second derivatives at x:
/// phi_k = sqrt((2k+1)/2) P_k so that int_{-1}^{1} phi_k^2 = 1.
inline void legendre_all(int pmax, double x, double* val, double* d1, double* d2) {
    std::vector<double> P(pmax + 1), dP(pmax + 1), ddP(pmax + 1);
    P[0] = 1.0;
    dP[0] = 0.0;
    ddP[0] = 0.0;
    if (pmax >= 1) {
        P[1] = x;
        dP[1] = 1.0;
        ddP[1] = 0.0;
    }
    for (int k = 1; k < pmax; ++k) {
        P[k + 1] = ((2.0 * k + 1.0) * x * P[k] - k * P[k - 1]) / (k + 1.0);
        dP[k + 1] = dP[k - 1] + (2.0 * k + 1.0) * P[k];
        ddP[k + 1] = ddP[k - 1] + (2.0 * k + 1.0) * dP[k];
    }
    for (int k = 0; k <= pmax; ++k) {
        const double c = std::sqrt((2.0 * k + 1.0) / 2.0);
        if (val) val[k] = c * P[k];
        if (d1) d1[k] = c * dP[k];
        if (d2) d2[k] = c * ddP[k];
    }
}

/// Lagrange basis on given 1D nodes; value/derivative/second derivative of
/// every cardinal function at x. Plain O(n^2) evaluation, nodes are few.
struct Lagrange1D {
    std::vector<double> nodes;

    explicit Lagrange1D(std::vector<double> nds) : nodes(std::move(nds)) {}

    static Lagrange1D uniform(int degree) {
        std::vector<double> n(degree + 1);
        for (int i = 0; i <= degree; ++i)
            n[i] = degree == 0 ? 0.0 : -1.0 + 2.0 * i / degree;
        return Lagrange1D(std::move(n));
    }

    int size() const { return static_cast<int>(nodes.size()); }

    void eval(double x, double* val, double* d1 = nullptr, double* d2 = nullptr) const {
        const int n = size();
        for (int i = 0; i < n; ++i) {
            double v = 1.0, dv = 0.0, ddv = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double f = (x - nodes[j]) / (nodes[i] - nodes[j]);
                const double df = 1.0 / (nodes[i] - nodes[j]);
                ddv = ddv * f + 2.0 * dv * df;
                dv = dv * f + v * df;
                v *= f;
            }
            if (val) val[i] = v;
            if (d1) d1[i] = dv;
            if (d2) d2[i] = ddv;
        }
    }
};

} // namespace nsshape
