#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace mpde {

/// Implicit system in residual form r(t, y, y') = 0. The residual must be
/// affine in y' (quasi-linear), with a nonsingular mass matrix dr/dy' along
/// trajectories.
class ImplicitSystem {
public:
    virtual ~ImplicitSystem() = default;

    virtual int dimension() const = 0;
    virtual void residual(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                          Eigen::VectorXd& r) const = 0;

    /// Jacobians dr/dy and dr/dy'. Default: forward finite differences on
    /// residual (relative step 1e-7).
    virtual void jacobians(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                           Eigen::MatrixXd& dr_dy, Eigen::MatrixXd& dr_dydot) const;
};

struct IntegratorConfig {
    double rtol = 1e-6;
    double atol = 1e-6;
    /// Optional per-component floor on the absolute tolerance (effective
    /// atol_i = max(atol, atol_floor_i)). Components whose floor sits at
    /// their own amplitude are exempt from step-size control; this is how
    /// slaved variables (fast stable modes that the L-stable steps damp
    /// rather than resolve) are declared. Empty = scalar atol everywhere.
    Eigen::VectorXd atol_floor;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0 = automatic selection
    double newton_tol = 0.0;    // 0 = derived from rtol
    int newton_max_iter = 10;
    long max_steps = 10'000'000;
};

class IntegratorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solution with dense output from the Radau collocation polynomial.
class Trajectory {
public:
    struct Segment {
        double t0 = 0.0;
        double h = 0.0;
        Eigen::VectorXd y0;
        Eigen::VectorXd f0;          // collocation derivative at t0
        Eigen::VectorXd k1, k2, k3;  // stage derivatives
    };

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<Eigen::VectorXd>& values() const { return values_; }
    double t_begin() const { return knots_.front(); }
    double t_end() const { return knots_.back(); }
    std::size_t step_count() const { return segments_.size(); }

    /// Dense output; exact stored values at knots.
    Eigen::VectorXd at(double t) const;

    /// Time derivative of the collocation polynomial at t.
    Eigen::VectorXd derivative_at(double t) const;

private:
    friend class RadauStepper;
    friend Trajectory integrate(const ImplicitSystem&, const Eigen::VectorXd&, double, double,
                                const IntegratorConfig&, std::span<const double>);
    std::vector<double> knots_;
    std::vector<Eigen::VectorXd> values_;
    std::vector<Segment> segments_;

    const Segment& segment_for(double t) const;
};

/// Adaptive 3-stage Radau IIA (order 5) with simplified Newton, embedded
/// error estimate, and mandatory landing on each break point (the step
/// sequence restarts there).
Trajectory integrate(const ImplicitSystem& sys, const Eigen::VectorXd& y0, double t0,
                     double tend, const IntegratorConfig& cfg,
                     std::span<const double> break_points = {});

}  // namespace mpde
