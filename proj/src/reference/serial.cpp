#include "qstoch/reference/serial.hpp"

#include "qstoch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qstoch::reference {

EnsembleResult ensemble_density(const StochasticModel& model, const DensityMatrix& rho0,
                                std::span<const double> grid, std::size_t num_trajectories,
                                std::uint64_t seed) {
    model.validate();
    if (rho0.dim() != model.dim()) {
        throw DimensionMismatch("ensemble_density: rho0 dimension differs from the model");
    }
    if (num_trajectories == 0) {
        throw InvalidArgument("ensemble_density: need at least one trajectory");
    }
    const GaussianIncrementPlan plan = build_increment_plan(model, grid);
    std::vector<Matrix> expected;
    for (double t : grid) {
        expected.push_back(expected_evolution(model, t));
    }
    const Eigen::Index d = model.dim();
    const std::size_t points = grid.size();
    // one Welford pass over all trajectories in index order
    std::vector<Matrix> mean(points, Matrix::Zero(d, d));
    std::vector<Eigen::MatrixXd> m2(points, Eigen::MatrixXd::Zero(d, d));
    for (std::size_t i = 0; i < num_trajectories; ++i) {
        RandomStream stream(seed, i);
        const std::vector<Matrix> path = sample_evolution_operator(model, plan, expected, stream);
        for (std::size_t k = 0; k < points; ++k) {
            const Matrix x = path[k] * rho0.matrix() * path[k].adjoint();
            const Matrix delta = x - mean[k];
            mean[k] += delta / static_cast<double>(i + 1);
            const Matrix after = x - mean[k];
            m2[k] += delta.real().cwiseProduct(after.real()) + delta.imag().cwiseProduct(after.imag());
        }
    }
    EnsembleResult out;
    out.grid.assign(grid.begin(), grid.end());
    out.num_trajectories = num_trajectories;
    out.seed = seed;
    const double n = static_cast<double>(num_trajectories);
    for (std::size_t k = 0; k < points; ++k) {
        RealVector se = RealVector::Zero(d * d);
        for (Eigen::Index j = 0; j < d && num_trajectories > 1; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) {
                se(j * d + i) = std::sqrt(std::max(0.0, m2[k](i, j)) / (n - 1) / n);
            }
        }
        out.mean_density.push_back(0.5 * (mean[k] + mean[k].adjoint()));
        out.standard_error.push_back(se);
    }
    return out;
}

BasisScanReport preferred_basis_scan(const Matrix& hamiltonian, const BasisScanOptions& options) {
    detail::check_scan_inputs(hamiltonian, options);
    const int nt = options.theta_points;
    const int np = options.phi_points;
    const double dtheta = (std::numbers::pi / 2) / (nt - 1);
    const double dphi = 2 * std::numbers::pi / np;
    Eigen::MatrixXd grid(nt, np);
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < np; ++j) {
            grid(i, j) = basis_residual(hamiltonian, i * dtheta, j * dphi);
        }
    }
    return detail::finish_scan(hamiltonian, options, std::move(grid));
}

}  // namespace qstoch::reference
