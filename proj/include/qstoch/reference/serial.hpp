#pragma once

// Single-threaded versions of the parallel kernels. They follow the plainest
// possible loop order and exist to cross-check the OpenMP code and as the
// baseline in the benchmark.

#include "qstoch/evolution.hpp"
#include "qstoch/preferred_basis.hpp"

namespace qstoch::reference {

EnsembleResult ensemble_density(const StochasticModel& model, const DensityMatrix& rho0,
                                std::span<const double> grid, std::size_t num_trajectories,
                                std::uint64_t seed);

BasisScanReport preferred_basis_scan(const Matrix& hamiltonian, const BasisScanOptions& options);

}  // namespace qstoch::reference
