#include "qstoch/evolution.hpp"

#include "qstoch/errors.hpp"

#include <cmath>
#include <string>

namespace qstoch {

Matrix dissipation_integral(const StochasticModel& model, double t) {
    const Matrix c = cross_variance_matrix(model, 0.0, t);
    Matrix k = Matrix::Zero(model.dim(), model.dim());
    const auto& cs = model.couplings;
    for (std::size_t n = 0; n < cs.size(); ++n) {
        for (std::size_t m = 0; m < cs.size(); ++m) {
            if (cs[m].row == cs[n].row) {
                k(cs[m].col, cs[n].col) += c(n, m);
            }
        }
    }
    return 0.5 * (k + k.adjoint());
}

Matrix noise_contribution(const StochasticModel& model, const Matrix& rho0, double t) {
    const Matrix c = cross_variance_matrix(model, 0.0, t);
    Matrix y = Matrix::Zero(model.dim(), model.dim());
    const auto& cs = model.couplings;
    for (std::size_t n = 0; n < cs.size(); ++n) {
        for (std::size_t m = 0; m < cs.size(); ++m) {
            y(cs[n].row, cs[m].row) += c(n, m) * rho0(cs[n].col, cs[m].col);
        }
    }
    return y;
}

namespace {

double window_min_eigenvalue(const StochasticModel& model, double t) {
    const Matrix f = Matrix::Identity(model.dim(), model.dim()) - dissipation_integral(model, t);
    return min_eigenvalue(f);
}

}  // namespace

std::optional<double> positivity_crossing(const StochasticModel& model, double t_max,
                                          int scan_points) {
    if (!(t_max >= 0.0) || scan_points < 1) {
        throw InvalidInterval("positivity_crossing: need t_max >= 0 and scan_points >= 1");
    }
    double lo = 0.0;
    std::optional<double> hi;
    for (int j = 1; j <= scan_points; ++j) {
        const double t = t_max * j / scan_points;
        if (window_min_eigenvalue(model, t) < -kPositivityWindowTol) {
            hi = t;
            break;
        }
        lo = t;
    }
    if (!hi) {
        return std::nullopt;
    }
    // lo: window holds, *hi: window violated. Bisect on the sign of the
    // smallest eigenvalue.
    double a = lo;
    double b = *hi;
    while (b - a > 1e-12 * std::max(1.0, b)) {
        const double mid = 0.5 * (a + b);
        if (window_min_eigenvalue(model, mid) < 0.0) {
            b = mid;
        } else {
            a = mid;
        }
    }
    return 0.5 * (a + b);
}

Matrix expected_evolution(const StochasticModel& model, double t) {
    if (!(t >= 0.0)) {
        throw InvalidInterval("expected_evolution: t must be non-negative");
    }
    const Eigen::Index d = model.dim();
    if (t == 0.0) {
        return Matrix::Identity(d, d);
    }
    const Matrix f = Matrix::Identity(d, d) - dissipation_integral(model, t);
    const double lowest = min_eigenvalue(f);
    if (lowest < -kPositivityWindowTol) {
        const std::optional<double> crossing = positivity_crossing(model, t);
        throw NotPositive("trace-preservation window I - int v^dagger v violated at t = " +
                              std::to_string(t) + " (smallest eigenvalue " +
                              std::to_string(lowest) + ")" +
                              (crossing ? ", first crossing at t = " + std::to_string(*crossing)
                                        : std::string()),
                          lowest, t, crossing.value_or(-1.0));
    }
    return unitary_from_hamiltonian(model.hamiltonian, t) * hermitian_principal_sqrt(f);
}

std::vector<Matrix> sample_evolution_operator(const StochasticModel& model,
                                              const GaussianIncrementPlan& plan,
                                              std::span<const Matrix> expected,
                                              RandomStream& stream) {
    const std::size_t points = plan.grid.size();
    if (expected.size() != points) {
        throw DimensionMismatch("sample_evolution_operator: expected-evolution count differs "
                                "from grid size");
    }
    const auto k = static_cast<Eigen::Index>(model.couplings.size());
    Vector accumulated = Vector::Zero(k);
    std::vector<Matrix> out;
    out.reserve(points);
    out.push_back(expected[0]);
    for (std::size_t j = 0; j + 1 < points; ++j) {
        if (k > 0) {
            accumulated += plan.samplers[j].sample(stream);
        }
        Matrix u = expected[j + 1];
        for (Eigen::Index c = 0; c < k; ++c) {
            const CouplingTerm& term = model.couplings[c];
            u(term.row, term.col) += accumulated(c);
        }
        out.push_back(std::move(u));
    }
    return out;
}

std::vector<Matrix> sample_evolution_operator(const StochasticModel& model,
                                              std::span<const double> grid,
                                              RandomStream& stream) {
    model.validate();
    const GaussianIncrementPlan plan = build_increment_plan(model, grid);
    std::vector<Matrix> expected;
    expected.reserve(grid.size());
    for (double t : grid) {
        expected.push_back(expected_evolution(model, t));
    }
    return sample_evolution_operator(model, plan, expected, stream);
}

double EnsembleResult::stderr_at(std::size_t k, Eigen::Index i, Eigen::Index j) const {
    const Eigen::Index d = mean_density.at(k).rows();
    return standard_error.at(k)(j * d + i);
}

DensityMatrix analytic_density(const StochasticModel& model, const DensityMatrix& rho0,
                               double t) {
    model.validate();
    if (rho0.dim() != model.dim()) {
        throw DimensionMismatch("analytic_density: rho0 dimension differs from the model");
    }
    const Matrix e = expected_evolution(model, t);
    Matrix rho = e * rho0.matrix() * e.adjoint() + noise_contribution(model, rho0.matrix(), t);
    return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

std::vector<Vector> stochastic_state(const StochasticModel& model, const Vector& psi0,
                                     std::span<const double> grid, RandomStream& stream) {
    if (model.couplings.size() > 1) {
        throw InvalidArgument("stochastic_state: the state-vector equation is defined for a "
                              "single coupling");
    }
    if (psi0.size() != model.dim()) {
        throw DimensionMismatch("stochastic_state: psi0 dimension differs from the model");
    }
    if (std::abs(psi0.norm() - 1.0) > 1e-12) {
        throw InvalidArgument("stochastic_state: psi0 must be normalised");
    }
    const std::vector<Matrix> path = sample_evolution_operator(model, grid, stream);
    std::vector<Vector> out;
    out.reserve(path.size());
    for (const Matrix& u : path) {
        out.push_back(u * psi0);
    }
    return out;
}

PerturbativeSplit perturbative_density(const StochasticModel& model, const DensityMatrix& rho0,
                                       double t) {
    model.validate();
    const Matrix& r0 = rho0.matrix();
    const Matrix k = dissipation_integral(model, t);
    const Matrix uh = unitary_from_hamiltonian(model.hamiltonian, t);
    const Matrix y = noise_contribution(model, r0, t);

    PerturbativeSplit split;
    split.rho_qm = uh * (r0 - 0.5 * (k * r0 + r0 * k)) * uh.adjoint();
    split.first_order = split.rho_qm + y;
    const HermitianEigen eig = eigen_hermitian(k);
    split.expansion_parameter = eig.values.cwiseAbs().maxCoeff();
    split.warning = split.expansion_parameter > kPerturbativeLimit;
    try {
        const Matrix e = expected_evolution(model, t);
        split.rho_tilde = e * r0 * e.adjoint() + y - split.rho_qm;
    } catch (const NotPositive&) {
        // exact density undefined outside the window; keep the first-order term
        split.rho_tilde = y;
        split.warning = true;
    }
    return split;
}

}  // namespace qstoch
