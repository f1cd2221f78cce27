#pragma once

// Sampling of circularly symmetric complex Wiener increments. Every coupling
// amplitude is deterministic, so the Ito integral of lambda_k against W^k over
// a grid interval is an exactly Gaussian vector whose covariance is computed
// in closed form; no time discretisation bias is introduced.

#include "qstoch/linalg.hpp"
#include "qstoch/model.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace qstoch {

// Value-semantic random stream. Streams derived from one master seed by index
// are independent of each other and of the order in which they are consumed.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t index = 0);

    // Child stream keyed on this stream's key and `index`.
    RandomStream substream(std::uint64_t index) const { return RandomStream(key_, index); }

    std::uint64_t key() const noexcept { return key_; }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    // Standard circular complex normal: E|z|^2 = 1, E z^2 = 0.
    Complex complex_normal();

private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Sampler for z ~ CN(0, cov): E[z z^dagger] = cov and E[z z^T] = 0.
class CircularGaussian {
public:
    // Throws NotPositive when cov has an eigenvalue below -1e-10 * max(1, |cov|).
    explicit CircularGaussian(const Matrix& cov);

    Vector sample(RandomStream& stream) const;
    Eigen::Index size() const noexcept { return factor_.rows(); }
    const Matrix& factor() const noexcept { return factor_; }

private:
    Matrix factor_;  // factor * factor^dagger == cov
};

Vector circular_complex_gaussian(const Matrix& cov, RandomStream& stream);

// a_nm * int_{t0}^{t1} lambda_n(s) conj(lambda_m(s)) ds
Complex integrated_cross_variance(const CouplingTerm& term_n, const CouplingTerm& term_m,
                                  Complex a_nm, double t0, double t1);

// Matrix of integrated_cross_variance over all coupling pairs of a model.
Matrix cross_variance_matrix(const StochasticModel& model, double t0, double t1);

struct GaussianIncrementPlan {
    std::vector<double> grid;
    std::vector<Matrix> covariances;        // one per interval [grid[j], grid[j+1]]
    std::vector<CircularGaussian> samplers;  // matching the covariances

    std::size_t num_intervals() const noexcept { return covariances.size(); }
};

// Throws InvalidInterval unless the grid starts at 0 and strictly increases.
void validate_grid(std::span<const double> grid);

GaussianIncrementPlan build_increment_plan(const StochasticModel& model,
                                           std::span<const double> grid);

}  // namespace qstoch
