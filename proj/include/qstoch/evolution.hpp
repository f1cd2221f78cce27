#pragma once

// Stochastic evolution operator U(t) = E[U](t) + sum_k int_0^t v_k dW^k and
// the density operators built from it: Monte Carlo ensembles, the exact
// closed-form average, state-vector paths and the small-noise split.

#include "qstoch/linalg.hpp"
#include "qstoch/model.hpp"
#include "qstoch/noise.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qstoch {

// Positivity tolerance on I - K(t) below which the model is rejected.
inline constexpr double kPositivityWindowTol = 1e-10;

// K(t) = sum_nm a_nm int_0^t v_m^dagger(s) v_n(s) ds
Matrix dissipation_integral(const StochasticModel& model, double t);

// Y(t) = sum_nm a_nm int_0^t v_n(s) rho0 v_m^dagger(s) ds
Matrix noise_contribution(const StochasticModel& model, const Matrix& rho0, double t);

// First time in [0, t_max] at which I - K(t) stops being positive
// semidefinite, located by bisection to 1e-12. Empty when the window holds on
// the whole interval (checked on a uniform scan of `scan_points` times).
std::optional<double> positivity_crossing(const StochasticModel& model, double t_max,
                                          int scan_points = 1024);

// exp(-iHt) (I - K(t))^{1/2}. Throws NotPositive when I - K(t) has an
// eigenvalue below -1e-10; the exception carries t, the eigenvalue and the
// located crossing time.
Matrix expected_evolution(const StochasticModel& model, double t);

// Samples U(t_j) for every grid time along one Wiener path.
std::vector<Matrix> sample_evolution_operator(const StochasticModel& model,
                                              std::span<const double> grid,
                                              RandomStream& stream);

// Variant reusing a prebuilt plan and the matching E[U](t_j).
std::vector<Matrix> sample_evolution_operator(const StochasticModel& model,
                                              const GaussianIncrementPlan& plan,
                                              std::span<const Matrix> expected,
                                              RandomStream& stream);

struct EnsembleResult {
    std::vector<double> grid;
    std::vector<Matrix> mean_density;        // trace is 1 only up to Monte Carlo error
    std::vector<RealVector> standard_error;  // per time, column-major entries of rho
    std::size_t num_trajectories = 0;
    std::uint64_t seed = 0;

    // Standard error of entry (i, j) at grid index k: sqrt((var Re + var Im) / N).
    double stderr_at(std::size_t k, Eigen::Index i, Eigen::Index j) const;
};

// Trajectories per work chunk; chunk partial sums are combined in chunk order
// so the result does not depend on the thread count.
inline constexpr std::size_t kEnsembleChunk = 256;

// Mean of U rho0 U^dagger over independent trajectories, trajectory i driven by
// RandomStream(seed, i). Runs on OpenMP threads.
EnsembleResult ensemble_density(const StochasticModel& model, const DensityMatrix& rho0,
                                std::span<const double> grid, std::size_t num_trajectories,
                                std::uint64_t seed);

// E[U] rho0 E[U]^dagger + Y(t), exact.
DensityMatrix analytic_density(const StochasticModel& model, const DensityMatrix& rho0,
                               double t);

// |psi(t_j)> = U(t_j) |psi0> along one path. The model may hold at most one
// coupling.
std::vector<Vector> stochastic_state(const StochasticModel& model, const Vector& psi0,
                                     std::span<const double> grid, RandomStream& stream);

struct PerturbativeSplit {
    Matrix rho_qm;       // U_H (rho0 - {K, rho0}/2) U_H^dagger
    Matrix rho_tilde;    // analytic_density - rho_qm
    Matrix first_order;  // rho_qm + Y(t), accurate to O(|K|^2)
    double expansion_parameter = 0.0;  // spectral norm of K(t)
    bool warning = false;              // expansion_parameter > kPerturbativeLimit
};

inline constexpr double kPerturbativeLimit = 0.3;

PerturbativeSplit perturbative_density(const StochasticModel& model, const DensityMatrix& rho0,
                                       double t);

}  // namespace qstoch
