#include "mpde/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mpde {

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Chebyshev-based initial guess for the i-th root.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence for P_n(x) and P'_n(x).
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] =
            2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

QuadratureRule composite_gauss(int n, double a, double b, int panels) {
    if (panels < 1) throw std::invalid_argument("composite_gauss: need at least one panel");
    QuadratureRule base = gauss_legendre(n);
    QuadratureRule rule;
    double hp = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * hp;
        for (int i = 0; i < n; ++i) {
            rule.nodes.push_back(lo + 0.5 * hp * (base.nodes[static_cast<std::size_t>(i)] + 1.0));
            rule.weights.push_back(0.5 * hp * base.weights[static_cast<std::size_t>(i)]);
        }
    }
    return rule;
}

}  // namespace mpde
