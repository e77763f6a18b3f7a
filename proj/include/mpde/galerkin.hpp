#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mpde/circuit.hpp"
#include "mpde/integrator.hpp"
#include "mpde/pwm_basis.hpp"

namespace mpde {

/// Coefficient vector layout: state-major, W = [w_{1,0..Np}, w_{2,0..Np}, ...].
struct CoefficientLayout {
    int ns = 0;
    int np = 0;
    int dim() const { return ns * (np + 1); }
    int index(int state, int k) const { return state * (np + 1) + k; }
};

/// The zero-th coefficient of every state component (the envelope).
Eigen::VectorXd envelope(const Eigen::VectorXd& W, int ns, int np);

enum class MpdeMode { simplified, original };

struct QuadratureSpec {
    int points_per_panel = 15;
    int panels_per_interval = 4;  // per interval between basis/pulse breakpoints
};

/// Galerkin-in-time system for the MPDE coefficients. Immutable after
/// construction; assembly calls are pure in (W, t1) and safe to run
/// concurrently.
class MpdeSystem {
public:
    MpdeSystem(PwmBasis basis, GalerkinMatrices matrices, const CircuitModel& model,
               MpdeMode mode, QuadratureSpec quad = {});

    const PwmBasis& basis() const { return basis_; }
    const GalerkinMatrices& matrices() const { return matrices_; }
    const CircuitModel& model() const { return model_; }
    MpdeMode mode() const { return mode_; }
    CoefficientLayout layout() const { return layout_; }
    int dimension() const { return layout_.dim(); }

    /// Kronecker-structured system evaluated at the envelope of W:
    /// cA = A(f(W)) (x) cI, cB = B(f(W)) (x) cI + A(f(W)) (x) cQ, cC the
    /// projected excitation (independent of t1).
    void assemble_simplified(const Eigen::VectorXd& W, double t1, Eigen::MatrixXd& cA,
                             Eigen::MatrixXd& cB, Eigen::VectorXd& cC) const;

    /// Residual of the full Galerkin projection with the nonlinearity
    /// evaluated pointwise under the quadrature rule.
    Eigen::VectorXd assemble_original_residual(const Eigen::VectorXd& W,
                                               const Eigen::VectorXd& dW, double t1) const;

    const Eigen::VectorXd& rhs() const { return rhs_; }

private:
    PwmBasis basis_;
    GalerkinMatrices matrices_;
    const CircuitModel& model_;
    MpdeMode mode_;
    CoefficientLayout layout_;
    Eigen::VectorXd rhs_;  // cC, constant in t1

    // Quadrature tables for the original mode.
    std::vector<double> qnodes_, qweights_;
    Eigen::MatrixXd qbasis_;        // (nodes) x (Np+1), p_k at node
    Eigen::MatrixXd qbasis_deriv_;  // p_k' at node
    Eigen::MatrixXd qexcitation_;   // (nodes) x Ns, excitation waveform at node
};

/// Residual adapter so the integrator can drive the coefficient system in
/// either mode.
class MpdeOde final : public ImplicitSystem {
public:
    explicit MpdeOde(const MpdeSystem& sys) : sys_(sys) {}
    int dimension() const override { return sys_.dimension(); }
    void residual(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                  Eigen::VectorXd& r) const override;

    /// Simplified mode: dr/dW' is the assembled cA exactly, dr/dW starts
    /// from cB with the envelope columns finite-differenced to pick up the
    /// state dependence of the matrices. Original mode falls back to the
    /// generic finite-difference Jacobians.
    void jacobians(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                   Eigen::MatrixXd& dr_dy, Eigen::MatrixXd& dr_dydot) const override;

private:
    const MpdeSystem& sys_;
    // Scratch for the hot residual/Jacobian path (one MpdeOde per solve; not
    // shared across threads).
    mutable Eigen::VectorXd env_, r0_, r1_, yp_, cc_, u_, v_;
    mutable Eigen::MatrixXd a_, b_;
};

/// Diagonal extraction x(t) = sum_k p_k(t/Ts mod 1) w_{.,k}(t).
Eigen::VectorXd reconstruct(const PwmBasis& basis, const Trajectory& coeff_traj, double t,
                            double Ts, int ns);

}  // namespace mpde
