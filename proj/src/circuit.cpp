#include "mpde/circuit.hpp"

#include <cmath>
#include <stdexcept>

namespace mpde {

double SaturationCurve::inductance(double i) const {
    return Linf + (L0 - Linf) / (1.0 + std::pow(std::abs(i) / Iknee, p));
}

double SaturationCurve::dinductance_di(double i) const {
    double u = std::abs(i) / Iknee;
    double up = std::pow(u, p - 1);
    double denom = 1.0 + up * u;
    double d = -(L0 - Linf) * p * up / (Iknee * denom * denom);
    return i < 0.0 ? -d : d;
}

Eigen::VectorXd CircuitModel::residual(const Eigen::VectorXd& x, const Eigen::VectorXd& xdot,
                                       double t) const {
    return eval_A(x) * xdot + eval_B(x) * x - eval_c(t);
}

double pulse_voltage(double t, double vi, double d, double ts) {
    double tau = t / ts - std::floor(t / ts);
    return tau < d ? vi : 0.0;
}

BuckConverter::BuckConverter(BuckParams params) : params_(params) {
    if (!(params_.Ts > 0.0)) throw std::invalid_argument("BuckConverter: Ts must be positive");
    if (!(params_.D_pulse > 0.0 && params_.D_pulse < 1.0)) {
        throw std::invalid_argument("BuckConverter: duty cycle must lie in (0, 1)");
    }
    if (!(params_.R > 0.0 && params_.C > 0.0 && params_.curve.L0 > 0.0 &&
          params_.curve.Linf > 0.0)) {
        throw std::invalid_argument("BuckConverter: physical parameters must be positive");
    }
}

Eigen::MatrixXd BuckConverter::eval_A(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = params_.curve.inductance(x(0));
    a(1, 1) = params_.C;
    return a;
}

Eigen::MatrixXd BuckConverter::eval_B(const Eigen::VectorXd&) const {
    Eigen::MatrixXd b(2, 2);
    b << 0.0, 1.0, -1.0, 1.0 / params_.R;
    return b;
}

Eigen::VectorXd BuckConverter::eval_c(double t) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(2);
    c(0) = pulse_voltage(t, params_.Vi, params_.D_pulse, params_.Ts);
    return c;
}

std::vector<PiecewisePolynomial> BuckConverter::excitation_waveform() const {
    return {PiecewisePolynomial::pulse(params_.D_pulse, params_.Vi),
            PiecewisePolynomial::constant(0.0)};
}

std::vector<double> switching_edges(const CircuitModel& model, double t0, double tend) {
    std::vector<double> edges;
    double ts = model.ts();
    std::vector<double> taus = model.switching_taus();
    taus.push_back(0.0);
    long m0 = static_cast<long>(std::floor(t0 / ts)) - 1;
    long m1 = static_cast<long>(std::ceil(tend / ts)) + 1;
    for (long m = m0; m <= m1; ++m) {
        for (double tau : taus) {
            double t = (static_cast<double>(m) + tau) * ts;
            if (t > t0 && t < tend) edges.push_back(t);
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

}  // namespace mpde
