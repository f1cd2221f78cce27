#include "qstoch/cli/runner.hpp"

#include "qstoch/cli/digest.hpp"
#include "qstoch/errors.hpp"
#include "qstoch/evolution.hpp"
#include "qstoch/jaynes_cummings.hpp"
#include "qstoch/lindblad.hpp"
#include "qstoch/preferred_basis.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace qstoch::cli {

using nlohmann::json;
namespace fs = std::filesystem;

#ifndef QSTOCH_VERSION
#define QSTOCH_VERSION "unknown"
#endif

std::string artifact_version() { return QSTOCH_VERSION; }

bool RunManifest::all_passed() const {
    for (const CheckResult& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

class Csv {
public:
    explicit Csv(std::vector<std::string> header) { row(header); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }
    void row(const std::vector<double>& cells) {
        std::vector<std::string> s;
        for (double c : cells) s.push_back(format_number(c));
        row(s);
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

struct Context {
    const ExperimentConfig& cfg;
    RunManifest& man;
    json details = json::object();

    void write(const std::string& name, const std::string& content) {
        const fs::path path = fs::path(cfg.output) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write " + path.string());
        f << content;
        f.close();
        man.files.push_back({name, sha256_file(path)});
    }
    void csv(const std::string& name, const Csv& table) {
        if (cfg.wants("csv")) write(name, table.str());
    }
    void check(const std::string& name, bool passed, double value, double tolerance) {
        man.checks.push_back({name, passed, value, tolerance});
    }
};

std::vector<double> uniform_grid(double t_end, std::int64_t samples) {
    std::vector<double> g;
    for (std::int64_t k = 0; k <= samples; ++k) {
        g.push_back(t_end * static_cast<double>(k) / static_cast<double>(samples));
    }
    return g;
}

std::vector<std::string> density_header(Eigen::Index d, bool with_stderr) {
    std::vector<std::string> h{"t"};
    for (Eigen::Index i = 1; i <= d; ++i) {
        for (Eigen::Index j = 1; j <= d; ++j) {
            const std::string ij = std::to_string(i) + std::to_string(j);
            h.push_back("re_rho_" + ij);
            h.push_back("im_rho_" + ij);
        }
    }
    if (with_stderr) {
        for (Eigen::Index i = 1; i <= d; ++i)
            for (Eigen::Index j = 1; j <= d; ++j) h.push_back("mc_stderr_" + std::to_string(i) + std::to_string(j));
    }
    return h;
}

std::vector<double> density_row(double t, const Matrix& rho) {
    std::vector<double> r{t};
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            r.push_back(rho(i, j).real());
            r.push_back(rho(i, j).imag());
        }
    }
    return r;
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

StochasticModel coupling_model(const ExperimentConfig& cfg) {
    const double omega0 = cfg.real("omega0");
    std::vector<CouplingTerm> terms;
    Matrix cov;
    if (cfg.has("coupling") && !cfg.has("couplings")) {
        const double a = cfg.has("a_kk") ? cfg.real("a_kk") : 1.0;
        terms.push_back(CouplingTerm::from_label(cfg.text("coupling"), cfg.real("gamma"), omega0, a));
        cov = Matrix::Constant(1, 1, a);
    } else {
        const auto labels = cfg.list("couplings");
        const auto gammas = cfg.real_list("gammas");
        for (std::size_t k = 0; k < labels.size(); ++k) {
            terms.push_back(CouplingTerm::from_label(labels[k], gammas[k], omega0));
        }
        cov = Matrix::Identity(labels.size(), labels.size());
        if (labels.size() == 2 && cfg.has("a_offdiag")) {
            cov(0, 1) = cfg.complex("a_offdiag");
            cov(1, 0) = std::conj(cov(0, 1));
        }
    }
    if (cfg.has("phase_flip") && cfg.boolean("phase_flip")) {
        for (CouplingTerm& t : terms) {
            t.phase = t.phase == Phase::Negative ? Phase::Positive : Phase::Negative;
        }
    }
    StochasticModel model = two_level_model(omega0, std::move(terms), cov);
    model.noise.seed = cfg.seed();
    return model;
}

// Shared by single-coupling and double-coupling.
void run_dynamics(Context& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const StochasticModel model = coupling_model(cfg);
    const DensityMatrix rho0(cfg.state("rho0"));
    const std::vector<double> grid = uniform_grid(cfg.real("t_end"), cfg.integer("samples"));
    const auto n = static_cast<std::size_t>(cfg.integer("trajectories"));

    const AdmissibilityReport rep = classify_couplings(model);
    ctx.man.verdict = std::string(to_string(rep.verdict));
    ctx.details["classification"] = {{"verdict", ctx.man.verdict}, {"details", rep.details},
                                     {"confirmed", rep.confirmed}};

    const EnsembleResult mc = ensemble_density(model, rho0, grid, n, cfg.seed());
    Csv mc_csv(density_header(2, true));
    Csv an_csv(density_header(2, false));
    double max_z = 0.0;
    double max_err = 0.0;
    double zero_se_err = 0.0;
    std::vector<Matrix> exact;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> row = density_row(grid[k], mc.mean_density[k]);
        for (Eigen::Index c = 0; c < 4; ++c) row.push_back(mc.standard_error[k](c % 2 * 2 + c / 2));
        mc_csv.row(row);
        exact.push_back(analytic_density(model, rho0, grid[k]).matrix());
        an_csv.row(density_row(grid[k], exact.back()));
        for (Eigen::Index i = 0; i < 2; ++i) {
            for (Eigen::Index j = 0; j < 2; ++j) {
                const double err = std::abs(mc.mean_density[k](i, j) - exact.back()(i, j));
                const double se = mc.stderr_at(k, i, j);
                max_err = std::max(max_err, err);
                if (se > 0) {
                    max_z = std::max(max_z, err / se);
                } else {
                    zero_se_err = std::max(zero_se_err, err);
                }
            }
        }
    }
    ctx.csv("density.csv", mc_csv);
    ctx.csv("analytic.csv", an_csv);
    ctx.man.residuals["mc_max_abs_error"] = max_err;
    ctx.man.residuals["mc_max_z"] = max_z;
    ctx.check("mc_within_5_stderr", max_z <= 5.0 && zero_se_err <= 1e-12, max_z, 5.0);

    if (rep.verdict == Verdict::MarkovianStationary) {
        const MasterTrajectory master = integrate_master(model.hamiltonian, rep.lindblads, model.noise.covariance,
                                                         rho0.matrix(), grid, cfg.real("dt"));
        Csv me_csv(density_header(2, false));
        double diff = 0.0;
        double drift = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            me_csv.row(density_row(grid[k], master.states[k]));
            diff = std::max(diff, max_abs(master.states[k] - exact[k]));
            drift = std::max(drift, std::abs(master.states[k].trace() - 1.0));
        }
        ctx.csv("master.csv", me_csv);
        ctx.man.residuals["master_vs_analytic"] = diff;
        ctx.man.residuals["master_trace_drift"] = drift;
        ctx.check("master_matches_analytic", diff <= 1e-8, diff, 1e-8);
        ctx.check("master_trace_drift", drift <= 1e-10, drift, 1e-10);
    }
}

void run_markovianity(Context& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const StochasticModel model = coupling_model(cfg);
    const AdmissibilityReport rep = classify_couplings(model);
    ctx.man.verdict = std::string(to_string(rep.verdict));
    ctx.man.residuals["memory_norm"] = rep.memory_norm;
    ctx.man.residuals["lindblad_variation"] = rep.lindblad_variation;
    json ls = json::array();
    for (const Matrix& l : rep.lindblads) ls.push_back(matrix_json(l));
    ctx.details["classification"] = {{"details", rep.details},
                                     {"confirmed", rep.confirmed},
                                     {"window_violated", rep.window_violated},
                                     {"lindblads", ls}};

    Csv memory({"t", "memory_norm"});
    const std::vector<Matrix> states = spanning_density_set();
    for (double t : uniform_grid(2.0, 40)) {
        double norm = 0.0;
        try {
            for (const Matrix& rho : states) norm = std::max(norm, max_abs(memory_term(model, rho, t)));
        } catch (const NotPositive&) {
            norm = std::numeric_limits<double>::quiet_NaN();
        } catch (const Singular&) {
            norm = std::numeric_limits<double>::quiet_NaN();
        }
        memory.row(std::vector<double>{t, norm});
    }
    ctx.csv("memory.csv", memory);
    ctx.check("numeric_confirmation", rep.confirmed, rep.memory_norm, 1e-10);
    if (cfg.has("expect_verdict")) {
        ctx.check("expected_verdict", ctx.man.verdict == cfg.text("expect_verdict"),
                  ctx.man.verdict == cfg.text("expect_verdict") ? 1.0 : 0.0, 1.0);
    }
}

Matrix two_level_h(const ExperimentConfig& cfg) {
    Matrix h(2, 2);
    const Complex h12 = cfg.complex("h12");
    h << cfg.real("h11"), h12, std::conj(h12), cfg.real("h22");
    return h;
}

void run_prop4(Context& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const Matrix h = two_level_h(cfg);
    const auto e = cfg.complex_list("ell");
    const auto b = cfg.complex_list("beta");
    const Matrix ell = from_canonical({e[0], e[1], e[2], e[3]});
    const std::array<Complex, 4> beta{b[0], b[1], b[2], b[3]};
    const NoGoClassification c = null_condition_check(h, ell, beta, static_cast<int>(cfg.integer("samples")), cfg.seed());
    ctx.man.verdict = c.conditions_met ? "conditions-met" : "conditions-violated";
    for (const auto& [k, v] : c.residuals) ctx.man.residuals[k] = v;
    ctx.details["case"] = to_string(c.which);
    ctx.details["conditions_met"] = c.conditions_met;
    ctx.details["displayed_conditions"] = c.displayed_conditions;
    ctx.details["generator_null"] = c.generator_null;

    const LambdaMatrix lambda = lambda_matrix(h, ell);
    Csv lam({"n", "m", "re_lambda", "im_lambda"});
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 4; ++m)
            lam.row(std::vector<double>{double(n + 1), double(m + 1), lambda(n, m).real(), lambda(n, m).imag()});
    ctx.csv("lambda.csv", lam);

    if (c.which != NoGoCase::Case3General) {
        // for the row forms the closed-form conditions are exact
        ctx.check("row_form_conditions_match_generator", c.displayed_conditions == c.generator_null,
                  c.residuals.at("generator_null_max"), kNullTol);
    }
    if (cfg.has("expect_conditions")) {
        ctx.check("expected_conditions", c.conditions_met == cfg.boolean("expect_conditions"),
                  c.conditions_met ? 1.0 : 0.0, 1.0);
    }
}

void run_basis_scan(Context& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const Matrix h = two_level_h(cfg);
    BasisScanOptions opt;
    opt.gamma = cfg.real("gamma");
    opt.theta_points = static_cast<int>(cfg.integer("theta_points"));
    opt.phi_points = static_cast<int>(cfg.integer("phi_points"));
    opt.tolerance = cfg.real("tolerance");
    BasisScanReport rep;
    try {
        rep = preferred_basis_scan(h, opt);
    } catch (const DegenerateHamiltonian&) {
        ctx.man.verdict = "all bases";
        ctx.details["note"] = "H is a multiple of the identity; every basis diagonalises it";
        return;
    }
    Csv grid({"theta", "phi", "residual"});
    const double pi = std::acos(-1.0);
    for (int i = 0; i < opt.theta_points; ++i)
        for (int j = 0; j < opt.phi_points; ++j)
            grid.row(std::vector<double>{i * (pi / 2) / (opt.theta_points - 1), j * 2 * pi / opt.phi_points,
                                         rep.residual_grid(i, j)});
    ctx.csv("basis_scan.csv", grid);
    json pts = json::array();
    for (const BasisPoint& p : rep.admissible) {
        pts.push_back({{"theta", p.theta}, {"phi", p.phi}, {"residual", p.residual},
                       {"axis", {p.axis(0), p.axis(1), p.axis(2)}},
                       {"angle_to_eigenbasis", p.angle_to_eigenbasis}, {"null_check", p.null_check}});
    }
    ctx.details["admissible"] = pts;
    ctx.details["eigen_axis"] = {rep.eigen_axis(0), rep.eigen_axis(1), rep.eigen_axis(2)};
    ctx.man.verdict = rep.matches_eigenbasis ? "eigenbasis" : "mismatch";
    ctx.man.residuals["max_angle_error"] = rep.max_angle_error;
    ctx.man.residuals["candidates"] = static_cast<double>(rep.candidates);
    ctx.check("admissible_bases_diagonalise_H", rep.matches_eigenbasis, rep.max_angle_error, opt.tolerance);
}

void run_jaynes_cummings(Context& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    JCParameters p;
    p.omega0 = cfg.real("omega0");
    p.omega = cfg.real("omega");
    p.epsilon = cfg.real("epsilon");
    p.n_max = static_cast<int>(cfg.integer("n_max"));
    const int n0 = static_cast<int>(cfg.integer("n_initial"));
    const double gamma = cfg.real("gamma");
    const DressedNoiseSpec noise = DressedNoiseSpec::uniform(p, gamma);
    const std::vector<double> grid = uniform_grid(cfg.real("t_end"), cfg.integer("samples"));
    const JCRun run = jc_full_run(p, noise, n0, grid);

    Csv atom(density_header(2, false));
    for (std::size_t k = 0; k < grid.size(); ++k) atom.row(density_row(grid[k], run.atom[k].matrix()));
    ctx.csv("atom.csv", atom);

    const DensityMatrix limit = asymptotic_atom(p, n0);
    const double residual = max_abs(run.atom.back().matrix() - limit.matrix());
    ctx.man.residuals["trace_drift"] = run.max_trace_drift;
    ctx.man.residuals["boundary_population"] = run.boundary_population;
    ctx.man.residuals["asymptote_residual"] = residual;
    ctx.details["asymptotic_atom"] = matrix_json(limit.matrix());
    ctx.details["slowest_time"] = noise.slowest_time();
    ctx.check("trace_drift", run.max_trace_drift <= 1e-12, run.max_trace_drift, 1e-12);
    ctx.check("truncation_leakage", run.boundary_population <= 1e-12, run.boundary_population, 1e-12);
    if (gamma > 0) {
        // coherences decay as exp(-(g_i + g_j) t / 2) >= exp(-t / (2T))
        const double envelope = std::exp(-grid.back() / (2.0 * noise.slowest_time())) + 1e-12;
        ctx.man.verdict = residual <= envelope ? "asymptote-reached" : "transient";
        ctx.check("asymptote_within_envelope", residual <= envelope, residual, envelope);
    } else {
        ctx.man.verdict = "unitary";
    }
}

void run_convergence(Context& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const CouplingTerm term = CouplingTerm::from_label(cfg.text("coupling"), cfg.real("gamma"), cfg.real("omega0"));
    const StochasticModel model = two_level_model(cfg.real("omega0"), {term});
    const DensityMatrix rho0(cfg.state("rho0"));
    const double t = cfg.real("t");
    const std::vector<double> grid{0.0, t};
    const Matrix exact = analytic_density(model, rho0, t).matrix();
    const auto small = static_cast<std::size_t>(cfg.integer("n_small"));
    const auto large = static_cast<std::size_t>(cfg.integer("n_large"));
    const std::int64_t seeds = cfg.integer("seeds");
    Csv table({"seed", "error_small", "error_large"});
    double sum_small = 0.0;
    double sum_large = 0.0;
    for (std::int64_t s = 0; s < seeds; ++s) {
        const std::uint64_t base = cfg.seed() + static_cast<std::uint64_t>(s);
        const double es = max_abs(ensemble_density(model, rho0, grid, small, 2 * base).mean_density[1] - exact);
        const double el = max_abs(ensemble_density(model, rho0, grid, large, 2 * base + 1).mean_density[1] - exact);
        sum_small += es;
        sum_large += el;
        table.row(std::vector<std::string>{std::to_string(base), format_number(es), format_number(el)});
    }
    ctx.csv("convergence.csv", table);
    const double ratio = sum_small / sum_large;
    const double ideal = std::sqrt(static_cast<double>(large) / static_cast<double>(small));
    ctx.man.residuals["error_ratio"] = ratio;
    ctx.man.residuals["ideal_ratio"] = ideal;
    ctx.man.residuals["mean_error_small"] = sum_small / seeds;
    ctx.man.residuals["mean_error_large"] = sum_large / seeds;
    const bool ok = ratio >= cfg.real("ratio_min") && ratio <= cfg.real("ratio_max");
    ctx.man.verdict = ok ? "root-N" : "off-rate";
    ctx.check("error_ratio_in_range", ok, ratio, cfg.real("ratio_max"));
}

json manifest_json(const RunManifest& m, const json& details) {
    json files = json::array();
    for (const FileRecord& f : m.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}});
    json checks = json::array();
    for (const CheckResult& c : m.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance}});
    json residuals = json::object();
    for (const auto& [k, v] : m.residuals) {
        residuals[k] = std::isfinite(v) ? json(v) : json(format_number(v));
    }
    return {{"experiment", m.config.experiment},
            {"verdict", m.verdict},
            {"residuals", residuals},
            {"seed", m.config.has("seed") ? json(m.config.seed()) : json(nullptr)},
            {"duration_seconds", m.duration_seconds},
            {"files", files},
            {"checks", checks},
            {"passed", m.all_passed()},
            {"version", m.version},
            {"config", m.config.parameters},
            {"details", details}};
}

}  // namespace

RunManifest run(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest man;
    man.config = config;
    man.version = artifact_version();
    fs::create_directories(config.output);
    Context ctx{config, man};
    const std::string& e = config.experiment;
    try {
        if (e == "single-coupling" || e == "double-coupling") {
            run_dynamics(ctx);
        } else if (e == "markovianity") {
            run_markovianity(ctx);
        } else if (e == "prop4") {
            run_prop4(ctx);
        } else if (e == "preferred-basis-scan") {
            run_basis_scan(ctx);
        } else if (e == "jaynes-cummings") {
            run_jaynes_cummings(ctx);
        } else if (e == "convergence") {
            run_convergence(ctx);
        } else {
            throw InvalidArgument("unknown experiment '" + e + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& err) {
        throw Error(e + ": " + err.what());
    }
    man.details_json = ctx.details.dump();
    man.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (config.wants("json")) {
        const fs::path path = fs::path(config.output) / "report.json";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write " + path.string());
        f << manifest_json(man, ctx.details).dump(2) << '\n';
    }
    return man;
}

}  // namespace qstoch::cli
