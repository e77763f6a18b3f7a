#pragma once

#include <cstddef>
#include <vector>

namespace mpde {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n points on [-1, 1]. Nodes via Newton iteration
/// on the Legendre recurrence.
QuadratureRule gauss_legendre(int n);

/// Composite rule on [a, b]: the n-point Gauss rule on each of `panels`
/// equal subintervals.
QuadratureRule composite_gauss(int n, double a, double b, int panels);

}  // namespace mpde
