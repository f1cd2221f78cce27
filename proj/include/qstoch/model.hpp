#pragma once

#include "qstoch/linalg.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace qstoch {

// Sign of the imaginary exponent in lambda(t).
enum class Phase {
    Negative,  // exp(-i w t)
    Positive,  // exp(+i w t)
};

// One stochastic part v(t) = lambda(t) |row><col| with
//   lambda(t) = sqrt(rate) * exp(-decay t / 2 -/+ i frequency t).
// The stationary choice that yields a time-independent Lindblad operator is
// decay = a_kk * rate with the phase matched to the energy of level `col`.
// A custom profile replaces the exponential form; integrals over it are then
// evaluated by adaptive quadrature.
struct CouplingTerm {
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    double rate = 1.0;
    double frequency = 0.0;
    Phase phase = Phase::Negative;
    double decay = 1.0;
    std::function<Complex(double)> profile;

    // Stationary coupling for H0 = omega0 * diag(1, -1) on a two-level system.
    static CouplingTerm stationary(Eigen::Index row, Eigen::Index col, double gamma,
                                   double omega0, double a_kk = 1.0);

    // lambda(t) = sqrt(gamma), no decay and no phase.
    static CouplingTerm constant(Eigen::Index row, Eigen::Index col, double gamma);

    // Parses "E11", "E12", "E21" or "E22" (one-based labels).
    static CouplingTerm from_label(std::string_view label, double gamma, double omega0,
                                   double a_kk = 1.0);

    Complex amplitude(double t) const;
    bool has_closed_form() const noexcept { return !profile; }
    double phase_sign() const noexcept { return phase == Phase::Negative ? 1.0 : -1.0; }
    std::string label() const;
};

// Covariance a_nm of the complex Wiener processes plus the master seed.
struct NoiseModel {
    Matrix covariance;
    std::uint64_t seed = 0;

    Eigen::Index num_processes() const noexcept { return covariance.rows(); }

    static NoiseModel independent(Eigen::Index n, std::uint64_t seed = 0);

    // Hermitian within 1e-12, PSD down to -1e-12, real non-negative diagonal.
    void validate() const;
};

struct StochasticModel {
    Matrix hamiltonian;
    std::vector<CouplingTerm> couplings;
    NoiseModel noise;

    Eigen::Index dim() const noexcept { return hamiltonian.rows(); }

    void validate() const;
};

// omega0 * diag(1, -1)
Matrix two_level_hamiltonian(double omega0);

StochasticModel two_level_model(double omega0, std::vector<CouplingTerm> couplings,
                                Matrix covariance = Matrix());

}  // namespace qstoch
