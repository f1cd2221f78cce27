#include "qstoch/lindblad.hpp"

#include "qstoch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qstoch {

Matrix lindblad_from_coupling(const StochasticModel& model, std::size_t k, double t) {
    if (k >= model.couplings.size()) {
        throw InvalidArgument("lindblad_from_coupling: coupling index out of range");
    }
    const Eigen::Index d = model.dim();
    const CouplingTerm& term = model.couplings[k];
    const Matrix f = Matrix::Identity(d, d) - dissipation_integral(model, t);
    const double lowest = min_eigenvalue(f);
    if (lowest < -kPositivityWindowTol) {
        throw NotPositive("lindblad_from_coupling: I - K(t) not positive", lowest, t);
    }
    const HermitianEigen eig = eigen_hermitian(f);
    RealVector root = eig.values.cwiseMax(0.0).cwiseSqrt();
    if (root.minCoeff() < 1e-14) {
        throw Singular("lindblad_from_coupling: E[U](t) is singular at t = " + std::to_string(t));
    }
    const Matrix inv_root =
        eig.vectors * root.cwiseInverse().cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    // E[U]^{-1} = (I - K)^{-1/2} exp(iHt)
    const Matrix inv_expected = inv_root * unitary_from_hamiltonian(model.hamiltonian, -t);
    Matrix v = Matrix::Zero(d, d);
    v(term.row, term.col) = term.amplitude(t);
    return v * inv_expected;
}

std::vector<LindbladOperator> lindblad_operators(const StochasticModel& model, double t) {
    std::vector<LindbladOperator> out;
    for (std::size_t k = 0; k < model.couplings.size(); ++k) {
        out.push_back({lindblad_from_coupling(model, k, t), &model.couplings[k]});
    }
    return out;
}

std::vector<Matrix> lindblad_matrices(const StochasticModel& model, double t) {
    std::vector<Matrix> out;
    for (std::size_t k = 0; k < model.couplings.size(); ++k) {
        out.push_back(lindblad_from_coupling(model, k, t));
    }
    return out;
}

Matrix generator_apply(const Matrix& h, std::span<const Matrix> lindblads, const Matrix& a,
                       const Matrix& x) {
    const Eigen::Index d = h.rows();
    if (h.cols() != d || x.rows() != d || x.cols() != d) {
        throw DimensionMismatch("generator_apply: H and X must be square of equal size");
    }
    const auto n = static_cast<Eigen::Index>(lindblads.size());
    if (n > 0 && (a.rows() != n || a.cols() != n)) {
        throw DimensionMismatch("generator_apply: covariance size differs from lindblad count");
    }
    Matrix out = -kI * (h * x - x * h);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Matrix& ln = lindblads[i];
        if (ln.rows() != d || ln.cols() != d) {
            throw DimensionMismatch("generator_apply: lindblad operator has the wrong size");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const Complex anm = a(i, j);
            if (anm == Complex(0.0)) {
                continue;
            }
            const Matrix lm_dag = lindblads[j].adjoint();
            const Matrix lx = ln * x;
            const Matrix xl = x * lm_dag;
            out += 0.5 * anm * ((lx * lm_dag - lm_dag * lx) + (ln * xl - xl * ln));
        }
    }
    return out;
}

Matrix memory_term(const StochasticModel& model, const Matrix& rho0, double t) {
    model.validate();
    const Matrix y = noise_contribution(model, rho0, t);
    const std::vector<Matrix> ls = lindblad_matrices(model, t);
    return -generator_apply(model.hamiltonian, ls, model.noise.covariance, y);
}

namespace {

Matrix rk4_step(const Matrix& h, std::span<const Matrix> ls, const Matrix& a, const Matrix& rho,
                double step) {
    const Matrix k1 = generator_apply(h, ls, a, rho);
    const Matrix k2 = generator_apply(h, ls, a, rho + 0.5 * step * k1);
    const Matrix k3 = generator_apply(h, ls, a, rho + 0.5 * step * k2);
    const Matrix k4 = generator_apply(h, ls, a, rho + step * k3);
    return rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

MasterTrajectory integrate_master(const Matrix& h, std::span<const Matrix> lindblads,
                                  const Matrix& a, const Matrix& rho0,
                                  std::span<const double> grid, double dt) {
    if (!(dt > 0.0)) {
        throw InvalidArgument("integrate_master: dt must be positive");
    }
    validate_grid(grid);
    MasterTrajectory out;
    out.times.assign(grid.begin(), grid.end());
    Matrix rho = rho0;
    out.states.push_back(rho);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const double span = grid[j + 1] - grid[j];
        const auto steps = std::max<long>(1, static_cast<long>(std::ceil(span / dt - 1e-9)));
        const double step = span / static_cast<double>(steps);
        for (long s = 0; s < steps; ++s) {
            rho = rk4_step(h, lindblads, a, rho, step);
        }
        out.states.push_back(rho);
    }
    return out;
}

MasterTrajectory integrate_master(const Matrix& h, std::span<const Matrix> lindblads,
                                  const Matrix& a, const Matrix& rho0, double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) {
        throw InvalidArgument("integrate_master: need dt > 0 and t_end >= 0");
    }
    const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
    std::vector<double> grid(1, 0.0);
    for (long s = 1; s <= steps; ++s) {
        grid.push_back(t_end * static_cast<double>(s) / static_cast<double>(steps));
    }
    return integrate_master(h, lindblads, a, rho0, grid, dt);
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::MarkovianStationary: return "MarkovianStationary";
        case Verdict::NonMarkovian: return "NonMarkovian";
        case Verdict::TimeDependentLindblad: return "TimeDependentLindblad";
        case Verdict::DoubleCouplingSameLevel: return "DoubleCouplingSameLevel";
        case Verdict::CorrelationForbidden: return "CorrelationForbidden";
    }
    return "?";
}

std::vector<Matrix> spanning_density_set() {
    std::vector<Matrix> out(4, Matrix::Zero(2, 2));
    out[0](0, 0) = 1.0;
    out[1](1, 1) = 1.0;
    out[2] << 0.5, 0.5, 0.5, 0.5;
    out[3] << Complex(0.5), Complex(0.0, -0.5), Complex(0.0, 0.5), Complex(0.5);
    return out;
}

namespace {

constexpr double kMarkovTol = 1e-10;
constexpr double kProbeTimes[] = {0.5, 1.0, 2.0};

struct Defects {
    double memory = 0.0;
    double variation = 0.0;
    bool window = false;
    std::string note;
};

Defects probe(const StochasticModel& model) {
    Defects out;
    std::vector<Matrix> l0;
    try {
        l0 = lindblad_matrices(model, 0.0);
        const std::vector<Matrix> states = spanning_density_set();
        for (double t : kProbeTimes) {
            const std::vector<Matrix> lt = lindblad_matrices(model, t);
            for (std::size_t k = 0; k < lt.size(); ++k) {
                out.variation = std::max(out.variation, max_abs(lt[k] - l0[k]));
            }
            for (const Matrix& rho : states) {
                out.memory = std::max(out.memory, max_abs(memory_term(model, rho, t)));
            }
        }
    } catch (const NotPositive& e) {
        out.window = true;
        out.memory = std::numeric_limits<double>::infinity();
        out.note = e.what();
    } catch (const Singular& e) {
        out.window = true;
        out.memory = std::numeric_limits<double>::infinity();
        out.note = e.what();
    }
    return out;
}

bool structurally_stationary(const StochasticModel& model, std::string& why) {
    const Matrix& h = model.hamiltonian;
    if (max_abs(h - Matrix(h.diagonal().asDiagonal())) > 1e-12) {
        why = "free Hamiltonian is not diagonal in the coupling basis";
        return false;
    }
    for (std::size_t k = 0; k < model.couplings.size(); ++k) {
        const CouplingTerm& c = model.couplings[k];
        if (!c.has_closed_form()) {
            continue;  // judged numerically
        }
        const double a_kk = model.noise.covariance(k, k).real();
        if (std::abs(c.decay - a_kk * c.rate) > 1e-12 * std::max(1.0, c.rate)) {
            why = c.label() + ": decay differs from a_kk * gamma";
            return false;
        }
        const double energy = h(c.col, c.col).real();
        if (std::abs(c.phase_sign() * c.frequency - energy) > 1e-12 * std::max(1.0, std::abs(energy))) {
            why = c.label() + ": phase does not track the energy of the source level";
            return false;
        }
    }
    return true;
}

std::string describe(const Defects& d) {
    std::ostringstream os;
    os.precision(3);
    os << "memory_norm=" << d.memory << " lindblad_variation=" << d.variation;
    if (d.window) {
        os << " window violated (" << d.note << ")";
    }
    return os.str();
}

}  // namespace

AdmissibilityReport classify_couplings(const StochasticModel& model) {
    if (model.dim() != 2) {
        throw UnsupportedDimension("classify_couplings: the catalogue covers two-level systems only");
    }
    model.validate();
    const auto& cs = model.couplings;
    const Matrix& a = model.noise.covariance;

    AdmissibilityReport rep;
    std::string why;
    bool decided = false;

    for (std::size_t n = 0; n < cs.size() && !decided; ++n) {
        for (std::size_t m = n + 1; m < cs.size() && !decided; ++m) {
            if (cs[n].col == cs[m].col) {
                rep.verdict = Verdict::DoubleCouplingSameLevel;
                why = cs[n].label() + " and " + cs[m].label() + " both couple level " +
                      std::to_string(cs[n].col + 1) + " to the vacuum";
                decided = true;
            }
        }
    }
    if (!decided && cs.size() == 2) {
        const std::string p = cs[0].label() + cs[1].label();
        if (p == "E12E21" || p == "E21E12") {
            rep.verdict = Verdict::NonMarkovian;
            why = "E12 and E21 together leave a memory term for generic initial states";
            decided = true;
        }
    }
    for (std::size_t n = 0; n < cs.size() && !decided; ++n) {
        for (std::size_t m = 0; m < cs.size() && !decided; ++m) {
            if (n != m && std::abs(a(n, m)) > 1e-12) {
                rep.verdict = Verdict::CorrelationForbidden;
                why = "Wiener processes of " + cs[n].label() + " and " + cs[m].label() +
                      " are correlated";
                decided = true;
            }
        }
    }
    if (!decided && !structurally_stationary(model, why)) {
        rep.verdict = Verdict::TimeDependentLindblad;
        decided = true;
    }

    const Defects d = probe(model);
    rep.memory_norm = d.memory;
    rep.lindblad_variation = d.variation;
    rep.window_violated = d.window;
    const bool defective = d.window || d.memory > kMarkovTol || d.variation > kMarkovTol;

    if (!decided) {
        if (defective) {
            // structurally fine but the numbers disagree (custom profile, say)
            rep.verdict = d.memory > kMarkovTol ? Verdict::NonMarkovian : Verdict::TimeDependentLindblad;
            why = "numeric probe found a non-stationary generator";
            rep.confirmed = true;
        } else {
            rep.verdict = Verdict::MarkovianStationary;
            why = "stationary couplings with independent Wiener processes";
            rep.confirmed = true;
        }
    } else {
        rep.confirmed = defective;
    }
    if (rep.verdict == Verdict::MarkovianStationary) {
        rep.lindblads = lindblad_matrices(model, 0.0);
    }
    rep.details = why + "; " + describe(d) + (rep.confirmed ? "" : "; numeric probe inconclusive");
    return rep;
}

double energy_derivative(const Matrix& h, std::span<const Matrix> lindblads, const Matrix& a,
                         const Matrix& rho) {
    return (h * generator_apply(h, lindblads, a, rho)).trace().real();
}

}  // namespace qstoch
