#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mpde/circuit.hpp"
#include "mpde/galerkin.hpp"
#include "mpde/integrator.hpp"
#include "mpde/pwm_basis.hpp"

namespace mpde {

enum class SolveMode { reference, mpde_simplified, mpde_original };

struct SimulationSpec {
    double fs = 1000.0;   // switching frequency, Ts = 1/fs
    double t_end = 0.01;  // s
    int np = 4;
    double d_basis = 0.7;
    SolveMode mode = SolveMode::reference;
    IntegratorConfig tolerances;
    Eigen::VectorXd x0;  // empty = zero state
};

struct SolutionRecord {
    SimulationSpec spec;
    Trajectory trajectory;          // states (reference) or coefficients (MPDE)
    std::optional<PwmBasis> basis;  // present for MPDE modes
    int ns = 0;
    std::vector<double> sample_times;
    std::vector<Eigen::VectorXd> samples;
    double solve_seconds = 0.0;
    double setup_seconds = 0.0;
    std::size_t steps = 0;

    /// Dense state at any t in [0, t_end]; reconstructed from coefficients
    /// for MPDE modes.
    Eigen::VectorXd state_at(double t) const;
};

/// Uniform grid with >= 50 samples per switching period, capped at 2e6 points.
std::vector<double> sample_grid(double t_end, double Ts);

/// Conventional transient of A(x) x' + B x = c(t) with break points at every
/// switching edge. Wall time covers the integrate call only.
SolutionRecord solve_reference(const SimulationSpec& spec, const CircuitModel& model);

/// MPDE coefficient transient: W(0) is placed on the quasi-static ripple
/// manifold consistent with x0 at ripple phase zero, and the integrator runs
/// without break points — the fast scale lives inside the basis.
SolutionRecord solve_mpde(const SimulationSpec& spec, const CircuitModel& model);

SolutionRecord solve(const SimulationSpec& spec, const CircuitModel& model);

}  // namespace mpde
