#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mpde/integrator.hpp"

using namespace mpde;

namespace {

// y' = -y
class Decay final : public ImplicitSystem {
public:
    int dimension() const override { return 1; }
    void residual(double, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                  Eigen::VectorXd& r) const override {
        r = ydot + y;
    }
};

// y' = -1e6 (y - cos t)
class Stiff final : public ImplicitSystem {
public:
    int dimension() const override { return 1; }
    void residual(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                  Eigen::VectorXd& r) const override {
        r = ydot + 1e6 * (y - Eigen::VectorXd::Constant(1, std::cos(t)));
    }
};

// 2 y' = -y, checks mass-matrix handling
class ScaledDecay final : public ImplicitSystem {
public:
    int dimension() const override { return 1; }
    void residual(double, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                  Eigen::VectorXd& r) const override {
        r = 2.0 * ydot + y;
    }
};

Eigen::VectorXd one() { return Eigen::VectorXd::Constant(1, 1.0); }

}  // namespace

TEST_CASE("exponential decay to tight tolerance") {
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-10;
    Trajectory traj = integrate(Decay{}, one(), 0.0, 1.0, cfg);
    CHECK(std::abs(traj.values().back()(0) - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("mass-matrix form 2y' = -y") {
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-10;
    Trajectory traj = integrate(ScaledDecay{}, one(), 0.0, 1.0, cfg);
    CHECK(std::abs(traj.values().back()(0) - std::exp(-0.5)) < 1e-8);
}

TEST_CASE("stiff problem: bounded step count") {
    IntegratorConfig cfg;
    cfg.rtol = 1e-6;
    cfg.atol = 1e-6;
    Trajectory traj = integrate(Stiff{}, Eigen::VectorXd::Zero(1), 0.0, 1.0, cfg);
    CHECK(traj.step_count() < 500);
    CHECK(std::abs(traj.values().back()(0) - std::cos(1.0)) < 1e-4);
}

TEST_CASE("order of convergence at least 3 under max_step halving") {
    auto global_error = [](double max_step) {
        IntegratorConfig cfg;
        cfg.rtol = 1e-2;  // loose, so max_step binds
        cfg.atol = 1e-2;
        cfg.max_step = max_step;
        cfg.initial_step = max_step;
        Trajectory traj = integrate(Decay{}, one(), 0.0, 1.0, cfg);
        return std::abs(traj.values().back()(0) - std::exp(-1.0));
    };
    double e1 = global_error(0.2);
    double e2 = global_error(0.1);
    double e3 = global_error(0.05);
    CHECK(e1 / e2 >= 8.0);
    CHECK(e2 / e3 >= 8.0);
}

TEST_CASE("break points land bit-exactly among knots") {
    IntegratorConfig cfg;
    std::vector<double> breaks = {0.1, 0.25, 1.0 / 3.0, 0.77};
    Trajectory traj = integrate(Decay{}, one(), 0.0, 1.0, cfg, breaks);
    const auto& knots = traj.knots();
    for (double b : breaks) {
        CHECK(std::find(knots.begin(), knots.end(), b) != knots.end());
    }
    for (std::size_t i = 1; i < knots.size(); ++i) CHECK(knots[i] > knots[i - 1]);
    CHECK(knots.front() == 0.0);
    CHECK(knots.back() == 1.0);
}

TEST_CASE("tolerance monotonicity") {
    auto err_at = [](double rtol) {
        IntegratorConfig cfg;
        cfg.rtol = rtol;
        cfg.atol = rtol;
        Trajectory traj = integrate(Decay{}, one(), 0.0, 1.0, cfg);
        return std::abs(traj.values().back()(0) - std::exp(-1.0));
    };
    double e4 = err_at(1e-4);
    double e6 = err_at(1e-6);
    double e8 = err_at(1e-8);
    CHECK(e6 <= e4);
    CHECK(e8 <= e6);
}

TEST_CASE("dense output: exact at knots, accurate between them") {
    IntegratorConfig cfg;
    cfg.rtol = 1e-8;
    cfg.atol = 1e-8;
    Trajectory traj = integrate(Decay{}, one(), 0.0, 1.0, cfg);

    double knot_err = 0.0;
    for (std::size_t i = 0; i < traj.knots().size(); ++i) {
        CHECK((traj.at(traj.knots()[i]) - traj.values()[i]).cwiseAbs().maxCoeff() < 1e-14);
        knot_err = std::max(knot_err,
                            std::abs(traj.values()[i](0) - std::exp(-traj.knots()[i])));
    }
    double dense_err = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        double t = i / 1000.0;
        dense_err = std::max(dense_err, std::abs(traj.at(t)(0) - std::exp(-t)));
    }
    CHECK(dense_err < 10.0 * std::max(knot_err, 1e-15));
}

TEST_CASE("hard failures are reported") {
    class Nan final : public ImplicitSystem {
    public:
        int dimension() const override { return 1; }
        void residual(double, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                      Eigen::VectorXd& r) const override {
            r = ydot + y;
            r(0) += std::nan("");
        }
    };
    IntegratorConfig cfg;
    CHECK_THROWS_AS(integrate(Nan{}, one(), 0.0, 1.0, cfg), IntegratorError);
    CHECK_THROWS_AS(integrate(Decay{}, one(), 1.0, 0.0, cfg), std::invalid_argument);
    Eigen::VectorXd bad = Eigen::VectorXd::Constant(1, std::nan(""));
    CHECK_THROWS_AS(integrate(Decay{}, bad, 0.0, 1.0, cfg), std::invalid_argument);
}

TEST_CASE("trajectory rejects out-of-span queries") {
    IntegratorConfig cfg;
    Trajectory traj = integrate(Decay{}, one(), 0.0, 1.0, cfg);
    CHECK_THROWS_AS(traj.at(1.5), std::out_of_range);
    CHECK_THROWS_AS(traj.at(-0.5), std::out_of_range);
}
