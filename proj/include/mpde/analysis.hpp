#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mpde/circuit.hpp"
#include "mpde/simulation.hpp"

namespace mpde {

struct ErrorReport {
    double fs = 0.0;
    double epsilon = 0.0;
    SolveMode mode = SolveMode::mpde_simplified;
    int np = 0;
};

struct SweepRow {
    double fs = 0.0;
    double eps_simplified = 0.0;
    double eps_original = 0.0;
    double t_mpde_simplified = 0.0;
    double t_mpde_original = 0.0;
    double t_reference = 0.0;
    double speedup = 0.0;
    std::string error;  // empty on success
};

struct SweepOptions {
    int np = 4;
    double d_basis = 0.7;
    double t_end = 0.01;
    double mpde_rtol = 1e-6;
    double mpde_atol = 1e-6;
    double ref_rtol = 1e-12;
    double ref_atol = 1e-12;
    int timing_repeats = 3;  // median of these, after one discarded warm-up
    int error_component = 1;  // capacitor voltage
};

/// Factory for the benchmark model at a given switching frequency; must
/// produce a model with ts() = 1/fs.
using ModelFactory = std::function<std::unique_ptr<CircuitModel>(double fs)>;

/// Relative L2 error over [ta, tb]: ||ref - sol|| / ||ref|| of the chosen
/// component, trapezoidal rule on the reference sample grid restricted to
/// the window (the other record is resampled through its dense output).
double relative_l2_error(const SolutionRecord& sol, const SolutionRecord& ref, int component,
                         double ta, double tb);

/// Reference, simplified and original solves per frequency; errors on the
/// error_component; speedup = t_reference / t_mpde_simplified. Timings are
/// medians of timing_repeats runs after a warm-up run. Per-frequency solver
/// failures land in SweepRow::error without aborting the sweep.
std::vector<SweepRow> frequency_sweep(const std::vector<double>& freqs,
                                      const ModelFactory& factory, const SweepOptions& opt);

struct MatchedSpeedup {
    double fs = 0.0;
    double speedup = 0.0;
    double eps_mpde = 0.0;
    double matched_rtol = 0.0;
    double t_reference = 0.0;
    double t_mpde = 0.0;
    bool matched = true;  // false if even rtol = 1e-1 beats the MPDE error
};

/// Loosest reference tolerance (bisection over rtol decades in [1e-12, 1e-1])
/// whose error against the tol = 1e-12 reference is at most the simplified
/// MPDE error, timed against the MPDE solve.
MatchedSpeedup matched_accuracy_speedup(double fs, const ModelFactory& factory,
                                        const SweepOptions& opt);

/// Median solve time over `repeats` runs, first extra run discarded.
double timed_median_seconds(const std::function<SolutionRecord()>& run, int repeats,
                            SolutionRecord* keep = nullptr);

}  // namespace mpde
