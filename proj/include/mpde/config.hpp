#pragma once

#include <string>
#include <vector>

#include "mpde/simulation.hpp"

namespace mpde {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat run configuration. Defaults reproduce the benchmark protocol:
/// Np = 4, MPDE tolerance 1e-6, reference tolerance 1e-12, 10 ms window,
/// sweep from 500 Hz to 100 kHz.
struct RunConfig {
    // circuit
    double vi = 10.0;
    double r = 10.0;
    double c = 100e-6;
    double l0 = 1e-3;
    double linf = 0.2e-3;
    double iknee = 0.6;
    int p = 4;
    double d_pulse = 0.7;
    // method
    int np = 4;
    double d_basis = 0.7;
    std::string mode = "reference";  // reference | mpde-simplified | mpde-original
    double fs = 1000.0;
    double t_end = 0.01;
    std::vector<double> sweep_freqs = {500,   1000,  2000,  5000,
                                       10000, 20000, 50000, 100000};
    double rtol = 1e-6;
    double atol = 1e-6;
    double ref_rtol = 1e-12;
    double ref_atol = 1e-12;
    // output / timing
    std::string out_dir = ".";
    bool serial_timing = false;
    int timing_repeats = 3;

    BuckParams buck_params() const;
    SolveMode solve_mode() const;  // throws ConfigError on unknown mode string
    void validate() const;

    /// Apply one `key = value` assignment; throws ConfigError naming the key
    /// on unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
};

/// Parse a flat key-value file (one `key = value` per line, `#` comments).
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace mpde
