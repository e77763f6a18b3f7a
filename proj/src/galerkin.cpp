#include "mpde/galerkin.hpp"

#include <cmath>
#include <stdexcept>

#include "mpde/quadrature.hpp"

namespace mpde {

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>;

std::vector<double> merged_fast_breakpoints(const PwmBasis& basis,
                                            const std::vector<PiecewisePolynomial>& waveforms) {
    std::vector<double> pts;
    for (const auto& p : basis.functions) {
        pts.insert(pts.end(), p.breakpoints().begin(), p.breakpoints().end());
    }
    for (const auto& w : waveforms) {
        pts.insert(pts.end(), w.breakpoints().begin(), w.breakpoints().end());
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-14; }),
              pts.end());
    return pts;
}

}  // namespace

Eigen::VectorXd envelope(const Eigen::VectorXd& W, int ns, int np) {
    if (W.size() != static_cast<Eigen::Index>(ns) * (np + 1)) {
        throw std::invalid_argument("envelope: coefficient vector length mismatch");
    }
    Eigen::VectorXd env(ns);
    for (int j = 0; j < ns; ++j) env(j) = W(j * (np + 1));
    return env;
}

MpdeSystem::MpdeSystem(PwmBasis basis, GalerkinMatrices matrices, const CircuitModel& model,
                       MpdeMode mode, QuadratureSpec quad)
    : basis_(std::move(basis)), matrices_(std::move(matrices)), model_(model), mode_(mode) {
    layout_ = CoefficientLayout{model_.ns(), basis_.order};
    const int m = basis_.count();
    const double Ts = matrices_.Ts;

    std::vector<PiecewisePolynomial> waveforms = model_.excitation_waveform();
    if (static_cast<int>(waveforms.size()) != layout_.ns) {
        throw std::invalid_argument("MpdeSystem: excitation waveform dimension mismatch");
    }

    rhs_.resize(layout_.dim());
    for (int j = 0; j < layout_.ns; ++j) {
        rhs_.segment(j * m, m) = Ts * project_waveform(basis_, waveforms[static_cast<std::size_t>(j)]);
    }

    // Quadrature split at every basis and excitation breakpoint.
    std::vector<double> pts = merged_fast_breakpoints(basis_, waveforms);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        QuadratureRule r = composite_gauss(quad.points_per_panel, pts[i], pts[i + 1],
                                           quad.panels_per_interval);
        qnodes_.insert(qnodes_.end(), r.nodes.begin(), r.nodes.end());
        qweights_.insert(qweights_.end(), r.weights.begin(), r.weights.end());
    }
    const Eigen::Index nq = static_cast<Eigen::Index>(qnodes_.size());
    qbasis_.resize(nq, m);
    qbasis_deriv_.resize(nq, m);
    qexcitation_.resize(nq, layout_.ns);
    std::vector<PiecewisePolynomial> derivs;
    for (const auto& p : basis_.functions) derivs.push_back(p.derivative());
    for (Eigen::Index q = 0; q < nq; ++q) {
        double tau = qnodes_[static_cast<std::size_t>(q)];
        for (int k = 0; k < m; ++k) {
            qbasis_(q, k) = basis_.functions[static_cast<std::size_t>(k)](tau);
            qbasis_deriv_(q, k) = derivs[static_cast<std::size_t>(k)](tau);
        }
        for (int j = 0; j < layout_.ns; ++j) {
            qexcitation_(q, j) = waveforms[static_cast<std::size_t>(j)](tau);
        }
    }
}

void MpdeSystem::assemble_simplified(const Eigen::VectorXd& W, double /*t1*/,
                                     Eigen::MatrixXd& cA, Eigen::MatrixXd& cB,
                                     Eigen::VectorXd& cC) const {
    const int ns = layout_.ns;
    const int m = basis_.count();
    if (W.size() != layout_.dim()) {
        throw std::invalid_argument("assemble_simplified: coefficient vector length mismatch");
    }
    Eigen::VectorXd env = envelope(W, ns, layout_.np);
    Eigen::MatrixXd A = model_.eval_A(env);
    Eigen::MatrixXd B = model_.eval_B(env);
    cA.resize(layout_.dim(), layout_.dim());
    cB.resize(layout_.dim(), layout_.dim());
    for (int j = 0; j < ns; ++j) {
        for (int i = 0; i < ns; ++i) {
            cA.block(j * m, i * m, m, m) = A(j, i) * matrices_.I_mat;
            cB.block(j * m, i * m, m, m) =
                B(j, i) * matrices_.I_mat + A(j, i) * matrices_.Q_mat;
        }
    }
    cC = rhs_;
}

Eigen::VectorXd MpdeSystem::assemble_original_residual(const Eigen::VectorXd& W,
                                                       const Eigen::VectorXd& dW,
                                                       double /*t1*/) const {
    const int ns = layout_.ns;
    const int m = basis_.count();
    if (W.size() != layout_.dim() || dW.size() != layout_.dim()) {
        throw std::invalid_argument("assemble_original_residual: vector length mismatch");
    }
    const double Ts = matrices_.Ts;
    RowMajorMap Wm(W.data(), ns, m);
    RowMajorMap dWm(dW.data(), ns, m);

    Eigen::MatrixXd res = Eigen::MatrixXd::Zero(ns, m);
    Eigen::VectorXd xhat(ns), slow(ns), fast(ns), integrand(ns);
    for (std::size_t q = 0; q < qnodes_.size(); ++q) {
        const auto p_row = qbasis_.row(static_cast<Eigen::Index>(q));
        const auto dp_row = qbasis_deriv_.row(static_cast<Eigen::Index>(q));
        xhat.noalias() = Wm * p_row.transpose();
        slow.noalias() = dWm * p_row.transpose();
        fast.noalias() = (Wm * dp_row.transpose()) / Ts;
        integrand.noalias() = model_.eval_A(xhat) * (slow + fast);
        integrand.noalias() += model_.eval_B(xhat) * xhat;
        integrand -= qexcitation_.row(static_cast<Eigen::Index>(q)).transpose();
        res.noalias() += (Ts * qweights_[q]) * integrand * p_row;
    }

    Eigen::VectorXd out(layout_.dim());
    for (int j = 0; j < ns; ++j) out.segment(j * m, m) = res.row(j).transpose();
    return out;
}

void MpdeOde::residual(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                       Eigen::VectorXd& r) const {
    const CoefficientLayout layout = sys_.layout();
    const int ns = layout.ns;
    const int m = layout.np + 1;
    if (sys_.mode() == MpdeMode::original) {
        r = sys_.assemble_original_residual(y, ydot, t);
        return;
    }
    // Simplified mode without forming the Kronecker matrices:
    // block row j of the residual is
    //   sum_i [A(ji) cI dW_i + B(ji) cI W_i + A(ji) cQ W_i] - cC_j.
    // Hand-rolled: this sits in the innermost Newton loop and the matrices
    // are far too small for library matmul dispatch to pay off.
    env_.resize(ns);
    for (int j = 0; j < ns; ++j) env_(j) = y(j * m);
    a_ = sys_.model().eval_A(env_);
    b_ = sys_.model().eval_B(env_);
    const GalerkinMatrices& gm = sys_.matrices();
    const double* W = y.data();
    const double* dW = ydot.data();
    u_.resize(ns * m);  // per state: cI dW + cQ W
    v_.resize(ns * m);  // per state: cI W
    for (int j = 0; j < ns; ++j) {
        for (int k = 0; k < m; ++k) {
            double su = 0.0, sv = 0.0;
            for (int l = 0; l < m; ++l) {
                const double il = gm.I_mat(k, l);
                su += il * dW[j * m + l] + gm.Q_mat(k, l) * W[j * m + l];
                sv += il * W[j * m + l];
            }
            u_(j * m + k) = su;
            v_(j * m + k) = sv;
        }
    }
    r.resize(layout.dim());
    const Eigen::VectorXd& rhs = sys_.rhs();
    for (int j = 0; j < ns; ++j) {
        for (int k = 0; k < m; ++k) {
            double s = -rhs(j * m + k);
            for (int i = 0; i < ns; ++i) {
                s += a_(j, i) * u_(i * m + k) + b_(j, i) * v_(i * m + k);
            }
            r(j * m + k) = s;
        }
    }
}

void MpdeOde::jacobians(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                        Eigen::MatrixXd& dr_dy, Eigen::MatrixXd& dr_dydot) const {
    if (sys_.mode() == MpdeMode::original) {
        ImplicitSystem::jacobians(t, y, ydot, dr_dy, dr_dydot);
        return;
    }
    sys_.assemble_simplified(y, t, dr_dydot, dr_dy, cc_);
    const int m = sys_.layout().np + 1;
    residual(t, y, ydot, r0_);
    yp_ = y;
    for (int j = 0; j < sys_.layout().ns; ++j) {
        const int col = j * m;
        double dy = 1e-7 * std::max(1.0, std::abs(y(col)));
        yp_(col) = y(col) + dy;
        residual(t, yp_, ydot, r1_);
        dr_dy.col(col) = (r1_ - r0_) / dy;
        yp_(col) = y(col);
    }
}

Eigen::VectorXd reconstruct(const PwmBasis& basis, const Trajectory& coeff_traj, double t,
                            double Ts, int ns) {
    Eigen::VectorXd w = coeff_traj.at(t);
    const int m = basis.count();
    double tau = t / Ts - std::floor(t / Ts);
    Eigen::VectorXd pv(m);
    for (int k = 0; k < m; ++k) pv(k) = basis.functions[static_cast<std::size_t>(k)](tau);
    Eigen::VectorXd x(ns);
    for (int j = 0; j < ns; ++j) x(j) = w.segment(j * m, m).dot(pv);
    return x;
}

}  // namespace mpde
