// qstoch run <config> [--out DIR] [--seed N] [--trajectories N] [--format csv,json]
// qstoch validate <config>

#include "qstoch/cli/config.hpp"
#include "qstoch/cli/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw qstoch::Error("cannot open config file '" + path + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void apply_thread_override() {
    const char* env = std::getenv("QSTOCH_NUM_THREADS");
    if (!env || !*env) return;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) {
        throw qstoch::Error("QSTOCH_NUM_THREADS must be a positive integer");
    }
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(n));
#endif
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic evolution operators for two-level vacuum models"};
    app.set_version_flag("--version", qstoch::cli::artifact_version());
    app.require_subcommand(1);

    std::string config_path;
    qstoch::cli::Overrides ov;
    std::string out_dir, formats;
    std::uint64_t seed = 0, trajectories = 0;

    CLI::App* run_cmd = app.add_subcommand("run", "run an experiment");
    run_cmd->add_option("config", config_path, "configuration file")->required();
    auto* out_opt = run_cmd->add_option("--out", out_dir, "output directory");
    auto* seed_opt = run_cmd->add_option("--seed", seed, "master seed");
    auto* traj_opt = run_cmd->add_option("--trajectories", trajectories, "Monte Carlo trajectories");
    auto* fmt_opt = run_cmd->add_option("--format", formats, "comma-separated subset of csv,json");

    CLI::App* validate_cmd = app.add_subcommand("validate", "parse and validate a configuration");
    validate_cmd->add_option("config", config_path, "configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        apply_thread_override();
        if (*out_opt) ov.output = out_dir;
        if (*seed_opt) ov.seed = seed;
        if (*traj_opt) ov.trajectories = trajectories;
        if (*fmt_opt) ov.formats = formats;
        const std::string text = slurp(config_path);
        if (validate_cmd->parsed()) {
            const auto cfg = qstoch::cli::parse_config(text);
            std::cout << "ok: " << cfg.experiment << " (" << cfg.parameters.size() << " keys)\n";
            return 0;
        }
        const auto cfg = qstoch::cli::parse_config(text, ov);
        const auto man = qstoch::cli::run(cfg);
        std::cout << cfg.experiment << ": verdict " << man.verdict << "\n";
        for (const auto& c : man.checks) {
            std::cout << "  " << (c.passed ? "PASS " : "FAIL ") << c.name << " = "
                      << qstoch::cli::format_number(c.value) << " (tolerance "
                      << qstoch::cli::format_number(c.tolerance) << ")\n";
        }
        for (const auto& f : man.files) {
            std::cout << "  wrote " << f.path << " sha256=" << f.sha256 << "\n";
        }
        return man.exit_code();
    } catch (const qstoch::cli::ConfigError& e) {
        for (const auto& issue : e.issues()) {
            std::cerr << config_path << ": " << issue.message() << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
