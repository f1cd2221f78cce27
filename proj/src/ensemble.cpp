#include "qstoch/evolution.hpp"

#include "qstoch/errors.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qstoch {

namespace {

// Running mean and centred second moments (Welford), merged pairwise with
// Chan's update so no sum of squares is ever differenced.
struct Partial {
    double count = 0.0;
    std::vector<Matrix> mean;
    std::vector<Eigen::MatrixXd> m2_re;
    std::vector<Eigen::MatrixXd> m2_im;

    Partial(std::size_t points, Eigen::Index d)
        : mean(points, Matrix::Zero(d, d)),
          m2_re(points, Eigen::MatrixXd::Zero(d, d)),
          m2_im(points, Eigen::MatrixXd::Zero(d, d)) {}

    void add(std::size_t k, const Matrix& x, double n) {
        const Matrix delta = x - mean[k];
        mean[k] += delta / n;
        const Matrix after = x - mean[k];
        m2_re[k] += delta.real().cwiseProduct(after.real());
        m2_im[k] += delta.imag().cwiseProduct(after.imag());
    }

    void merge(const Partial& o) {
        if (o.count == 0.0) return;
        const double n = count + o.count;
        for (std::size_t k = 0; k < mean.size(); ++k) {
            const Matrix delta = o.mean[k] - mean[k];
            const double w = count * o.count / n;
            m2_re[k] += o.m2_re[k] + w * delta.real().cwiseAbs2();
            m2_im[k] += o.m2_im[k] + w * delta.imag().cwiseAbs2();
            mean[k] += delta * (o.count / n);
        }
        count = n;
    }
};

}  // namespace

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
    expected.reserve(grid.size());
    for (double t : grid) {
        expected.push_back(expected_evolution(model, t));
    }

    const Eigen::Index d = model.dim();
    const std::size_t points = grid.size();
    const Matrix& r0 = rho0.matrix();
    const std::size_t chunks = (num_trajectories + kEnsembleChunk - 1) / kEnsembleChunk;
    std::vector<Partial> partials(chunks, Partial(points, d));

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
        Partial& p = partials[c];
        const std::size_t begin = static_cast<std::size_t>(c) * kEnsembleChunk;
        const std::size_t end = std::min(num_trajectories, begin + kEnsembleChunk);
        for (std::size_t i = begin; i < end; ++i) {
            RandomStream stream(seed, i);
            const std::vector<Matrix> path = sample_evolution_operator(model, plan, expected, stream);
            p.count += 1.0;
            for (std::size_t k = 0; k < points; ++k) {
                p.add(k, path[k] * r0 * path[k].adjoint(), p.count);
            }
        }
    }

    Partial total(points, d);
    for (const Partial& p : partials) {
        total.merge(p);
    }

    EnsembleResult out;
    out.grid.assign(grid.begin(), grid.end());
    out.num_trajectories = num_trajectories;
    out.seed = seed;
    const double n = static_cast<double>(num_trajectories);
    for (std::size_t k = 0; k < points; ++k) {
        const Matrix& mean = total.mean[k];
        RealVector se = RealVector::Zero(d * d);
        if (num_trajectories > 1) {
            for (Eigen::Index j = 0; j < d; ++j) {
                for (Eigen::Index i = 0; i < d; ++i) {
                    const double var = (total.m2_re[k](i, j) + total.m2_im[k](i, j)) / (n - 1);
                    se(j * d + i) = std::sqrt(std::max(0.0, var) / n);
                }
            }
        }
        out.mean_density.push_back(0.5 * (mean + mean.adjoint()));
        out.standard_error.push_back(std::move(se));
    }
    return out;
}

}  // namespace qstoch
