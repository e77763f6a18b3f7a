#include "mpde/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mpde {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid numeric value for key '" + key + "': " + value);
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer value for key '" + key + "': " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("invalid boolean value for key '" + key + "': " + value);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
    return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "vi") vi = parse_double(key, value);
    else if (key == "r") r = parse_double(key, value);
    else if (key == "c") c = parse_double(key, value);
    else if (key == "l0") l0 = parse_double(key, value);
    else if (key == "linf") linf = parse_double(key, value);
    else if (key == "iknee") iknee = parse_double(key, value);
    else if (key == "p") p = parse_int(key, value);
    else if (key == "d_pulse") d_pulse = parse_double(key, value);
    else if (key == "np") np = parse_int(key, value);
    else if (key == "d_basis") d_basis = parse_double(key, value);
    else if (key == "mode") mode = value;
    else if (key == "fs") fs = parse_double(key, value);
    else if (key == "t_end") t_end = parse_double(key, value);
    else if (key == "sweep_freqs") sweep_freqs = parse_list(key, value);
    else if (key == "rtol") rtol = parse_double(key, value);
    else if (key == "atol") atol = parse_double(key, value);
    else if (key == "ref_rtol") ref_rtol = parse_double(key, value);
    else if (key == "ref_atol") ref_atol = parse_double(key, value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "serial_timing") serial_timing = parse_bool(key, value);
    else if (key == "timing_repeats") timing_repeats = parse_int(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string("config key '") + name + "' must be positive");
    };
    positive(vi, "vi");
    positive(r, "r");
    positive(c, "c");
    positive(l0, "l0");
    positive(linf, "linf");
    positive(iknee, "iknee");
    positive(fs, "fs");
    positive(t_end, "t_end");
    positive(rtol, "rtol");
    positive(atol, "atol");
    positive(ref_rtol, "ref_rtol");
    positive(ref_atol, "ref_atol");
    if (p < 2 || p % 2 != 0) throw ConfigError("config key 'p' must be an even integer >= 2");
    if (np < 0) throw ConfigError("config key 'np' must be nonnegative");
    if (!(d_pulse > 0.0 && d_pulse < 1.0)) throw ConfigError("config key 'd_pulse' must lie in (0, 1)");
    if (!(d_basis > 0.0 && d_basis < 1.0)) throw ConfigError("config key 'd_basis' must lie in (0, 1)");
    if (timing_repeats < 1) throw ConfigError("config key 'timing_repeats' must be >= 1");
    solve_mode();
}

BuckParams RunConfig::buck_params() const {
    BuckParams bp;
    bp.Vi = vi;
    bp.R = r;
    bp.C = c;
    bp.D_pulse = d_pulse;
    bp.Ts = 1.0 / fs;
    bp.curve = SaturationCurve{l0, linf, iknee, p};
    return bp;
}

SolveMode RunConfig::solve_mode() const {
    if (mode == "reference") return SolveMode::reference;
    if (mode == "mpde-simplified") return SolveMode::mpde_simplified;
    if (mode == "mpde-original") return SolveMode::mpde_original;
    throw ConfigError("unknown mode '" + mode +
                      "' (expected reference, mpde-simplified or mpde-original)");
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("malformed line " + std::to_string(lineno) + " in " + path +
                              " (expected key = value)");
        }
        base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace mpde
