#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mpde/piecewise_polynomial.hpp"

namespace mpde {

/// Orthonormal piecewise-polynomial basis on [0, 1] with a breakpoint at the
/// duty-cycle parameter. Immutable after construction; safe to share across
/// threads.
struct PwmBasis {
    double duty = 0.5;                           // D in (0, 1)
    int order = 0;                               // highest index Np
    std::vector<PiecewisePolynomial> functions;  // size Np + 1

    int count() const { return order + 1; }
    double evaluate(int k, double tau) const;
};

/// Build the basis: p0 = 1, p1 the two-segment linear sawtooth-matched
/// function, higher orders by antiderivative + modified Gram-Schmidt with one
/// reorthogonalization pass, unit L2(0,1) norm, positive leading coefficient
/// on [0, D].
PwmBasis build_basis(double duty, int order);

struct GalerkinMatrices {
    Eigen::MatrixXd I_mat;  // Ts * identity for an orthonormal basis
    Eigen::MatrixXd Q_mat;  // skew-symmetric, zero first row/column
    double Ts = 0.0;
};

/// cI(l,k) = Ts * <p_l, p_k>,  cQ(l,k) = -<p_l', p_k>, both by exact
/// polynomial integration.
GalerkinMatrices galerkin_matrices(const PwmBasis& basis, double Ts);

/// Component l is the exact integral of w * p_l over [0, 1].
Eigen::VectorXd project_waveform(const PwmBasis& basis, const PiecewisePolynomial& w);

}  // namespace mpde
