#include "qstoch/cli/config.hpp"
#include "qstoch/cli/digest.hpp"
#include "qstoch/cli/runner.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace qstoch;
using namespace qstoch::cli;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("qstoch_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Runs the CLI on `config` inside `dir`, returns the exit status.
int run_cli(const TempDir& dir, const std::string& config, const std::string& extra = "",
            const std::string& verb = "run") {
    const fs::path cfg = dir.path / "experiment.cfg";
    std::ofstream(cfg) << config;
    const std::string cmd = std::string("\"") + QSTOCH_BINARY + "\" " + verb + " \"" + cfg.string() + "\" " + extra +
                            " > \"" + (dir.path / "stdout.txt").string() + "\" 2> \"" + (dir.path / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    double at(std::size_t r, const std::string& col) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == col) return rows.at(r).at(c);
        throw std::runtime_error("no column " + col);
    }
};

Table read_csv(const fs::path& p) {
    Table t;
    std::istringstream in(read_file(p));
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = cells;
            first = false;
        } else {
            std::vector<double> row;
            for (const std::string& c : cells) row.push_back(std::stod(c));
            t.rows.push_back(row);
        }
    }
    return t;
}

std::vector<ConfigIssue> issues_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.issues();
    }
    return {};
}

const char* kSingle =
    "experiment = single-coupling\n"
    "coupling = E21\n"
    "gamma = 1\n"
    "omega0 = 1\n"
    "t_end = 1\n"
    "seed = 42\n"
    "samples = 10\n"
    "dt = 0.01\n"
    "trajectories = 20000\n";

}  // namespace

TEST_CASE("config: values, defaults and comments") {
    const ExperimentConfig c = parse_config(std::string(kSingle) + "# comment\nrho0 = plus  # trailing\n");
    CHECK(c.experiment == "single-coupling");
    CHECK(c.real("gamma") == 1.0);
    CHECK(c.integer("trajectories") == 20000);
    CHECK(c.seed() == 42);
    CHECK(c.text("a_kk") == "1");
    CHECK(c.output == "out");
    CHECK(c.wants("csv"));
    CHECK(c.wants("json"));
    const Matrix r = c.state("rho0");
    CHECK(std::abs(r(0, 1) - Complex(0.5)) < 1e-15);
}

TEST_CASE("config: overrides replace file values") {
    Overrides ov;
    ov.seed = 7;
    ov.trajectories = 123;
    ov.output = "elsewhere";
    ov.formats = "csv";
    const ExperimentConfig c = parse_config(kSingle, ov);
    CHECK(c.seed() == 7);
    CHECK(c.integer("trajectories") == 123);
    CHECK(c.output == "elsewhere");
    CHECK_FALSE(c.wants("json"));
}

TEST_CASE("config: invalid values name the key and position") {
    std::string text = kSingle;
    text.replace(text.find("gamma = 1"), 9, "gamma = -1");
    const std::vector<ConfigIssue> is = issues_of(text);
    REQUIRE(is.size() == 1);
    CHECK(is[0].key == "gamma");
    CHECK(is[0].line == 3);
    CHECK(is[0].column == 9);
    CHECK(is[0].reason == "must be positive");
    CHECK(is[0].message().find("gamma") != std::string::npos);
}

TEST_CASE("config: unknown keys come with a suggestion") {
    const std::vector<ConfigIssue> is = issues_of(std::string(kSingle) + "trajectorie = 5\n");
    REQUIRE(is.size() == 1);
    CHECK(is[0].reason.find("did you mean 'trajectories'") != std::string::npos);
    const std::vector<ConfigIssue> ex = issues_of("experiment = single-coupler\n");
    REQUIRE(ex.size() == 1);
    CHECK(ex[0].reason.find("single-coupling") != std::string::npos);
}

TEST_CASE("config: every problem is reported at once") {
    const std::vector<ConfigIssue> is = issues_of(
        "experiment = single-coupling\n"
        "coupling = E33\n"
        "gamma = abc\n"
        "no equals sign here\n"
        "omega0 = 1\nomega0 = 2\n");
    // E33, abc, missing '=', duplicate, and missing t_end and seed
    CHECK(is.size() == 6);
    bool parse_seen = false;
    for (const ConfigIssue& i : is) {
        if (i.kind == ConfigIssue::Kind::Parse && i.line == 4) {
            parse_seen = true;
            CHECK(i.column == 1);
        }
    }
    CHECK(parse_seen);
}

TEST_CASE("config: cross-key rules") {
    CHECK_FALSE(issues_of("experiment = double-coupling\ncouplings = E11,E22\ngammas = 1\nomega0 = 1\nt_end = 1\nseed = 1\n").empty());
    CHECK_FALSE(issues_of("experiment = double-coupling\ncouplings = E11,E22\ngammas = 1,1\nomega0 = 1\nt_end = 1\nseed = 1\na_offdiag = 2\n").empty());
    CHECK(issues_of("experiment = double-coupling\ncouplings = E11,E22\ngammas = 1,1\nomega0 = 1\nt_end = 1\nseed = 1\n").empty());
    const ExperimentConfig jc = parse_config("experiment = jaynes-cummings\nomega0 = 1\nomega = 1\nepsilon = 0.1\nt_end = 5\nn_initial = 3\n");
    CHECK(jc.integer("n_max") == 11);
    CHECK_FALSE(issues_of("experiment = jaynes-cummings\nomega0 = 1\nomega = 1\nepsilon = 0.1\nt_end = 5\nn_initial = 3\nn_max = 3\n").empty());
}

TEST_CASE("value grammars") {
    CHECK(parse_real("1e-3") == 1e-3);
    CHECK_FALSE(parse_real("1e-3x").has_value());
    CHECK_FALSE(parse_real("").has_value());
    CHECK(parse_complex("0.3+0.1i") == Complex(0.3, 0.1));
    CHECK(parse_complex("-2i") == Complex(0, -2));
    CHECK(parse_complex("i") == Complex(0, 1));
    CHECK(parse_complex("-i") == Complex(0, -1));
    CHECK(parse_complex("1.5") == Complex(1.5, 0));
    CHECK(parse_complex("1-i") == Complex(1, -1));
    CHECK_FALSE(parse_complex("1+").has_value());
    CHECK(edit_distance("kitten", "sitting") == 3);
    CHECK(edit_distance("", "abc") == 3);
}

TEST_CASE("number formatting round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) CHECK(std::stod(format_number(x)) == x);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("cli: decay run agrees with the exponential law and is reproducible") {
    TempDir a, b;
    REQUIRE(run_cli(a, kSingle, "--out \"" + (a.path / "out").string() + "\"") == 0);
    REQUIRE(run_cli(b, kSingle, "--out \"" + (b.path / "out").string() + "\"") == 0);
    const Table t = read_csv(a.path / "out" / "density.csv");
    REQUIRE(t.rows.size() == 11);
    CHECK(t.at(10, "t") == 1.0);
    // the excited population carries no noise under E21; the ground one does
    CHECK(std::abs(t.at(10, "re_rho_11") - std::exp(-1.0)) <= std::max(5 * t.at(10, "mc_stderr_11"), 1e-12));
    const double se = t.at(10, "mc_stderr_22");
    CHECK(se > 0.0);
    CHECK(std::abs(t.at(10, "re_rho_22") - (1 - std::exp(-1.0))) <= 5 * se);
    for (const char* f : {"density.csv", "analytic.csv", "master.csv"})
        CHECK(read_file(a.path / "out" / f) == read_file(b.path / "out" / f));

    const nlohmann::json rep = nlohmann::json::parse(read_file(a.path / "out" / "report.json"));
    CHECK(rep["experiment"] == "single-coupling");
    CHECK(rep["verdict"] == "MarkovianStationary");
    CHECK(rep["passed"] == true);
    CHECK(rep["seed"] == 42);
    for (const auto& f : rep["files"]) CHECK(sha256_file(a.path / "out" / f["path"].get<std::string>()) == f["sha256"]);
}

TEST_CASE("cli: thread count does not change the output") {
    TempDir a, b;
    REQUIRE(run_cli(a, kSingle, "--out \"" + (a.path / "out").string() + "\" --format csv") == 0);
    const std::string env = "QSTOCH_NUM_THREADS=3 ";
    const fs::path cfg = b.path / "experiment.cfg";
    std::ofstream(cfg) << kSingle;
    const std::string cmd = env + "\"" + QSTOCH_BINARY + "\" run \"" + cfg.string() + "\" --format csv --out \"" +
                            (b.path / "out").string() + "\" > /dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(read_file(a.path / "out" / "density.csv") == read_file(b.path / "out" / "density.csv"));
    CHECK_FALSE(fs::exists(b.path / "out" / "report.json"));
}

TEST_CASE("cli: exit codes") {
    TempDir d;
    const std::string out = "--out \"" + (d.path / "out").string() + "\"";
    const std::string cfg =
        "experiment = markovianity\ncouplings = E12,E21\ngammas = 1,1\nomega0 = 1\n";
    CHECK(run_cli(d, cfg + "expect_verdict = NonMarkovian\n", out) == 0);
    const nlohmann::json rep = nlohmann::json::parse(read_file(d.path / "out" / "report.json"));
    CHECK(rep["verdict"] == "NonMarkovian");
    CHECK(run_cli(d, cfg + "expect_verdict = MarkovianStationary\n", out) == 2);
    CHECK(run_cli(d, "experiment = markovianity\ncouplings = E12\n", out) == 1);
    CHECK(read_file(d.path / "stderr.txt").find("gammas") != std::string::npos);
    CHECK(run_cli(d, cfg, "", "validate") == 0);
    CHECK(run_cli(d, "experiment = nope\n", "", "validate") == 1);
}

TEST_CASE("cli: every experiment family runs") {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"double-coupling",
         "experiment = double-coupling\ncouplings = E11,E22\ngammas = 0.5,0.8\nomega0 = 1\nt_end = 1\nseed = 3\n"
         "trajectories = 2000\nsamples = 5\nrho0 = plus\n"},
        {"markovianity", "experiment = markovianity\ncouplings = E21\ngammas = 1\nomega0 = 1\nphase_flip = true\n"
                         "expect_verdict = TimeDependentLindblad\n"},
        {"prop4", "experiment = prop4\nh11 = 1\nh12 = 0\nh22 = -1\nell = 0,0,1,0\nbeta = 0,0,1,0\nexpect_conditions = true\n"},
        {"preferred-basis-scan", "experiment = preferred-basis-scan\nh11 = 0.3\nh12 = 0.2-0.4i\nh22 = -0.1\n"
                                 "theta_points = 61\nphi_points = 61\n"},
        {"jaynes-cummings", "experiment = jaynes-cummings\nomega0 = 1\nomega = 1.1\nepsilon = 0.1\nt_end = 10\n"
                            "gamma = 0.5\nn_initial = 1\nsamples = 20\n"},
        {"convergence", "experiment = convergence\nseeds = 4\nn_small = 500\nn_large = 50000\nratio_min = 3\nratio_max = 30\n"},
    };
    const std::map<std::string, std::string> expected_file{
        {"double-coupling", "master.csv"},  {"markovianity", "memory.csv"}, {"prop4", "lambda.csv"},
        {"preferred-basis-scan", "basis_scan.csv"}, {"jaynes-cummings", "atom.csv"}, {"convergence", "convergence.csv"}};
    for (const auto& [name, text] : cases) {
        CAPTURE(name);
        TempDir d;
        CHECK(run_cli(d, text, "--out \"" + (d.path / "out").string() + "\"") == 0);
        CHECK(fs::exists(d.path / "out" / expected_file.at(name)));
        const nlohmann::json rep = nlohmann::json::parse(read_file(d.path / "out" / "report.json"));
        CHECK(rep["experiment"] == name);
        CHECK(rep["passed"] == true);
    }
}

TEST_CASE("runner: module errors carry the experiment name") {
    TempDir d;
    ExperimentConfig c = parse_config("experiment = prop4\nh11 = 1\nh12 = 0\nh22 = -1\nell = 0,0,1,0\nbeta = 0,0,0,0\n");
    c.output = (d.path / "out").string();
    try {
        run(c);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).rfind("prop4:", 0) == 0);
    }
}
