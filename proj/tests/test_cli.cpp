#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string g_bench;  // path to the benchmark binary, passed as the last argv

int run_cmd(const std::string& args, const std::string& stderr_file = "") {
    std::string cmd = g_bench + " " + args + " >/dev/null";
    cmd += stderr_file.empty() ? " 2>/dev/null" : " 2>" + stderr_file;
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("mpde_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> read_lines(const fs::path& file) {
    std::ifstream in(file);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("solve (reference, defaults) writes solution.csv with the full grid") {
    fs::path dir = fresh_dir("solve_ref");
    CHECK(run_cmd("solve --out " + dir.string()) == 0);
    std::vector<std::string> lines = read_lines(dir / "solution.csv");
    REQUIRE(lines.size() >= 502);  // header + 50/period x 10 periods + 1
    CHECK(lines[0] == "t,iL,vC");
    // Zero initial state appears exactly; numbers round-trip at full precision.
    std::vector<std::string> first = split_csv(lines[1]);
    REQUIRE(first.size() == 3);
    CHECK(std::stod(first[0]) == 0.0);
    CHECK(std::stod(first[1]) == 0.0);
    CHECK(std::stod(first[2]) == 0.0);
    double dt = std::stod(split_csv(lines[2])[0]);
    CHECK(dt == doctest::Approx(0.01 / 500.0).epsilon(1e-12));
    CHECK(!fs::exists(dir / "coefficients.csv"));
}

TEST_CASE("solve (mpde-simplified) writes an 11-column coefficients.csv") {
    fs::path dir = fresh_dir("solve_mpde");
    CHECK(run_cmd("solve --mode mpde-simplified --fs 10000 --t_end 0.002 --out " +
                  dir.string()) == 0);
    std::vector<std::string> lines = read_lines(dir / "coefficients.csv");
    REQUIRE(lines.size() >= 2);
    std::vector<std::string> header = split_csv(lines[0]);
    REQUIRE(header.size() == 11);  // t1 + 2 states x (Np+1 = 5)
    CHECK(header[0] == "t1");
    CHECK(header[1] == "w_1_0");
    CHECK(header[10] == "w_2_4");
    for (const std::string& line : lines) {
        if (!line.empty()) CHECK(split_csv(line).size() == 11);
    }
    CHECK(read_lines(dir / "solution.csv")[0] == "t,iL,vC");
}

TEST_CASE("malformed config key exits 1 and names the key") {
    fs::path dir = fresh_dir("bad_config");
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "# comment\nfs = 1000\nbogus_key = 3\n";
    }
    fs::path err = dir / "stderr.txt";
    CHECK(run_cmd("solve --config " + (dir / "run.cfg").string(), err.string()) == 1);
    CHECK(slurp(err).find("bogus_key") != std::string::npos);

    CHECK(run_cmd("solve --mode sideways", err.string()) == 1);
    CHECK(run_cmd("solve --t_end -1", err.string()) == 1);
}

TEST_CASE("failures past configuration exit 2") {
    CHECK(run_cmd("solve --t_end 0.001 --out /proc/not_writable") == 2);
}

TEST_CASE("basis export: columns, Gram identity, p1 endpoint") {
    fs::path dir = fresh_dir("basis");
    CHECK(run_cmd("basis --out " + dir.string()) == 0);

    std::vector<std::string> lines = read_lines(dir / "basis.csv");
    REQUIRE(lines.size() == 1002);  // header + 1001 tau samples
    CHECK(lines[0] == "tau,p0,p1,p2,p3,p4");
    std::vector<std::string> row0 = split_csv(lines[1]);
    REQUIRE(row0.size() == 6);
    CHECK(std::stod(row0[0]) == 0.0);
    CHECK(std::stod(row0[2]) == doctest::Approx(-1.732050808).epsilon(1e-9));

    std::vector<std::string> gram = read_lines(dir / "gram.csv");
    REQUIRE(gram.size() == 6);  // header + 5 rows
    for (int l = 0; l < 5; ++l) {
        std::vector<std::string> row = split_csv(gram[static_cast<std::size_t>(l) + 1]);
        REQUIRE(row.size() == 5);
        for (int k = 0; k < 5; ++k) {
            double expected = (l == k) ? 1.0 : 0.0;
            CHECK(std::abs(std::stod(row[static_cast<std::size_t>(k)]) - expected) < 1e-12);
        }
    }
}

TEST_CASE("sweep: headers, one row per frequency, three table rows") {
    fs::path dir = fresh_dir("sweep");
    CHECK(run_cmd("sweep --sweep_freqs 1000,10000 --t_end 0.002 --timing_repeats 1 --out " +
                  dir.string()) == 0);

    std::vector<std::string> lines = read_lines(dir / "sweep.csv");
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] ==
          "fs_hz,eps_simplified,eps_original,t_mpde_simplified_s,t_mpde_original_s,"
          "t_reference_s,speedup");
    CHECK(std::stod(split_csv(lines[1])[0]) == 1000.0);
    CHECK(std::stod(split_csv(lines[2])[0]) == 10000.0);
    for (int i = 1; i <= 2; ++i) {
        std::vector<std::string> row = split_csv(lines[static_cast<std::size_t>(i)]);
        REQUIRE(row.size() == 7);  // no error column on success
        for (const std::string& cell : row) CHECK(std::isfinite(std::stod(cell)));
    }

    std::vector<std::string> table = read_lines(dir / "table1.csv");
    REQUIRE(table.size() == 4);  // header + 10/50/100 kHz
    CHECK(table[0] == "fs_hz,speedup,eps_mpde,matched_rtol,t_reference_s,t_mpde_s");
    CHECK(std::stod(split_csv(table[1])[0]) == 10e3);
    CHECK(std::stod(split_csv(table[2])[0]) == 50e3);
    CHECK(std::stod(split_csv(table[3])[0]) == 100e3);
}

TEST_CASE("sweep with an empty frequency list exits 1") {
    fs::path dir = fresh_dir("sweep_empty");
    CHECK(run_cmd("sweep --sweep_freqs , --out " + dir.string()) == 1);
}

int cli_main(int argc, char** argv) {
    if (argc > 1 && argv[argc - 1][0] != '-') {
        g_bench = argv[argc - 1];
        --argc;
    }
    doctest::Context ctx(argc, argv);
    if (g_bench.empty()) {
        std::fprintf(stderr, "usage: test_cli [doctest options] <path to benchmark binary>\n");
        return 1;
    }
    return ctx.run();
}

int main(int argc, char** argv) { return cli_main(argc, argv); }
