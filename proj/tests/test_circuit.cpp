#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mpde/circuit.hpp"

using namespace mpde;

TEST_CASE("pulse voltage: phases, right-continuity, periodicity") {
    const double Ts = 1e-3, Vi = 10.0;
    CHECK(pulse_voltage(0.3 * Ts, Vi, 0.7, Ts) == Vi);
    CHECK(pulse_voltage(0.7 * Ts, Vi, 0.7, Ts) == 0.0);
    CHECK(pulse_voltage(2.3 * Ts, Vi, 0.7, Ts) == Vi);
    CHECK(pulse_voltage(0.0, Vi, 0.7, Ts) == Vi);
    CHECK(pulse_voltage(5.0 * Ts, Vi, 0.7, Ts) == Vi);
}

TEST_CASE("saturation curve values and shape") {
    SaturationCurve curve;  // defaults: L0 = 1 mH, Linf = 0.2 mH, Iknee = 0.6, p = 4
    CHECK(curve.inductance(0.0) == doctest::Approx(curve.L0).epsilon(1e-15));
    CHECK(curve.inductance(curve.Iknee) ==
          doctest::Approx(curve.Linf + 0.5 * (curve.L0 - curve.Linf)).epsilon(1e-14));
    CHECK(curve.inductance(1e6) == doctest::Approx(curve.Linf).epsilon(1e-9));

    double prev = curve.inductance(0.0);
    for (double i = 0.1; i < 5.0; i += 0.1) {
        double li = curve.inductance(i);
        CHECK(li <= prev + 1e-18);
        CHECK(li == doctest::Approx(curve.inductance(-i)).epsilon(1e-15));  // even
        CHECK(li >= curve.Linf);
        CHECK(li <= curve.L0);
        prev = li;
    }
}

TEST_CASE("analytic inductance derivative matches central differences") {
    SaturationCurve curve;
    double h = 1e-6 * curve.Iknee;
    for (double i : {-2.0, -0.9, -0.3, 0.2, 0.6, 1.1, 3.0}) {
        double fd = (curve.inductance(i + h) - curve.inductance(i - h)) / (2.0 * h);
        CHECK(curve.dinductance_di(i) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("buck converter system matrices") {
    BuckParams bp;
    BuckConverter buck(bp);

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd A = buck.eval_A(zero);
    CHECK(A(0, 0) == doctest::Approx(bp.curve.L0).epsilon(1e-15));
    CHECK(A(1, 1) == doctest::Approx(bp.C).epsilon(1e-15));
    CHECK(A(0, 1) == 0.0);
    CHECK(A(1, 0) == 0.0);

    Eigen::VectorXd c_on = buck.eval_c(0.3 * bp.Ts);
    CHECK(c_on(0) == bp.Vi);
    CHECK(c_on(1) == 0.0);
    Eigen::VectorXd c_off = buck.eval_c(0.8 * bp.Ts);
    CHECK(c_off(0) == 0.0);

    // B is independent of the state.
    std::mt19937 rng(3);
    std::normal_distribution<double> n(0.0, 5.0);
    Eigen::MatrixXd b0 = buck.eval_B(zero);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd x(2);
        x << n(rng), n(rng);
        CHECK((buck.eval_B(x) - b0).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(b0(0, 1) == 1.0);
    CHECK(b0(1, 0) == -1.0);
    CHECK(b0(1, 1) == doctest::Approx(1.0 / bp.R));
}

TEST_CASE("DC steady state has zero residual under constant-equivalent input") {
    BuckParams bp;
    BuckConverter buck(bp);
    double vbar = bp.D_pulse * bp.Vi;
    Eigen::VectorXd xstar(2);
    xstar << vbar / bp.R, vbar;
    // B x* = [vbar, 0]; the on-phase excitation is [Vi, 0], so the residual
    // against the averaged input vbar is exactly zero with xdot = 0.
    Eigen::VectorXd bx = buck.eval_B(xstar) * xstar;
    CHECK(bx(0) == doctest::Approx(vbar).epsilon(1e-14));
    CHECK(std::abs(bx(1)) < 1e-15);

    // Full residual in the on-phase equals c_on - [vbar, 0].
    Eigen::VectorXd r = buck.residual(xstar, Eigen::VectorXd::Zero(2), 0.1 * bp.Ts);
    CHECK(r(0) == doctest::Approx(vbar - bp.Vi).epsilon(1e-12));
    CHECK(std::abs(r(1)) < 1e-15);
}

TEST_CASE("nonlinearity is exercised over the benchmark current range") {
    // Envelope current reaches about D Vi / R = 0.7 A, past the knee.
    SaturationCurve curve;
    double swing = (curve.inductance(0.0) - curve.inductance(0.7)) / curve.inductance(0.0);
    CHECK(swing > 0.30);
}

TEST_CASE("switching edges cover both edges of every period") {
    BuckParams bp;
    BuckConverter buck(bp);
    auto edges = switching_edges(buck, 0.0, 3e-3);
    // (m + 0) Ts and (m + D) Ts interior to (0, 3 ms): 0.7, 1, 1.7, 2, 2.7 ms.
    REQUIRE(edges.size() == 5);
    CHECK(edges[0] == doctest::Approx(0.7e-3).epsilon(1e-12));
    CHECK(edges[1] == doctest::Approx(1.0e-3).epsilon(1e-12));
    CHECK(edges[4] == doctest::Approx(2.7e-3).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
    BuckParams bp;
    bp.Ts = 0.0;
    CHECK_THROWS_AS(BuckConverter{bp}, std::invalid_argument);
    bp = BuckParams{};
    bp.D_pulse = 1.2;
    CHECK_THROWS_AS(BuckConverter{bp}, std::invalid_argument);
    bp = BuckParams{};
    bp.R = -1.0;
    CHECK_THROWS_AS(BuckConverter{bp}, std::invalid_argument);
}
