#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mpde/piecewise_polynomial.hpp"

namespace mpde {

/// Saturating inductance L(i) = Linf + (L0 - Linf) / (1 + (|i|/Iknee)^p).
/// Even in i, monotonically nonincreasing in |i|, bounded in [Linf, L0].
struct SaturationCurve {
    double L0 = 1e-3;
    double Linf = 0.2e-3;
    double Iknee = 0.6;
    int p = 4;  // even, >= 2

    double inductance(double i) const;
    double dinductance_di(double i) const;
    bool linear() const { return L0 == Linf; }
};

/// Circuit in the quasi-linear form A(x) dx/dt + B(x) x = c(t), with c
/// periodic in t with period ts(). Models are immutable value objects;
/// evaluation is pure and reentrant.
class CircuitModel {
public:
    virtual ~CircuitModel() = default;

    virtual int ns() const = 0;
    virtual double ts() const = 0;
    virtual Eigen::MatrixXd eval_A(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::MatrixXd eval_B(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::VectorXd eval_c(double t) const = 0;

    /// One period of the excitation as functions of tau = t/Ts mod 1,
    /// one per state component.
    virtual std::vector<PiecewisePolynomial> excitation_waveform() const = 0;

    /// Switching instants within one period as tau values in (0, 1).
    virtual std::vector<double> switching_taus() const = 0;

    Eigen::VectorXd residual(const Eigen::VectorXd& x, const Eigen::VectorXd& xdot,
                             double t) const;
};

/// Ideal pulsed source: vi while (t/ts mod 1) < d, else 0; right-continuous
/// at switching instants.
double pulse_voltage(double t, double vi, double d, double ts);

struct BuckParams {
    double Vi = 10.0;      // V
    double R = 10.0;       // ohm
    double C = 100e-6;     // F
    double D_pulse = 0.7;  // duty cycle of the source
    double Ts = 1e-3;      // s
    SaturationCurve curve;
};

/// Simplified buck converter, state x = [iL, vC]:
///   A(x) = diag(L(iL), C),  B = [[0, 1], [-1, 1/R]],  c(t) = [v_pulse(t), 0].
class BuckConverter final : public CircuitModel {
public:
    explicit BuckConverter(BuckParams params);

    int ns() const override { return 2; }
    double ts() const override { return params_.Ts; }
    Eigen::MatrixXd eval_A(const Eigen::VectorXd& x) const override;
    Eigen::MatrixXd eval_B(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd eval_c(double t) const override;
    std::vector<PiecewisePolynomial> excitation_waveform() const override;
    std::vector<double> switching_taus() const override { return {params_.D_pulse}; }

    const BuckParams& params() const { return params_; }

private:
    BuckParams params_;
};

/// All switching edges {m Ts, (m + tau_i) Ts} within [t0, tend], sorted.
std::vector<double> switching_edges(const CircuitModel& model, double t0, double tend);

}  // namespace mpde
