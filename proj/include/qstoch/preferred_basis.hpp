#pragma once

// Two-level null-condition analysis of the generator on states v rho v^dagger,
// and the scan over measurement bases for which stationary spontaneous decay
// is admissible.

#include "qstoch/linalg.hpp"
#include "qstoch/noise.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qstoch {

// L[E_n] = sum_m Lambda(n, m) E_m, basis order (E11, E12, E21, E22), unit
// covariance. Zero-based indices: Lambda(0, 0) is the E11 -> E11 entry.
using LambdaMatrix = Eigen::Matrix4cd;

LambdaMatrix lambda_matrix(const Matrix& h, const Matrix& ell);

// Coordinates of x in the (E11, E12, E21, E22) basis and back.
std::array<Complex, 4> to_canonical(const Matrix& x);
Matrix from_canonical(const std::array<Complex, 4>& c);

// v = sum beta_n E_n; returns alpha with v rho0 v^dagger = sum alpha_n E_n.
std::array<Complex, 4> alpha_coefficients(const std::array<Complex, 4>& beta, const Matrix& rho0);

enum class NoGoCase { Case1RowForm, Case2RowForm, Case3General };

const char* to_string(NoGoCase c) noexcept;

struct NoGoClassification {
    NoGoCase which = NoGoCase::Case3General;
    bool conditions_met = false;         // every residual <= 1e-10
    bool displayed_conditions = false;   // the closed-form case conditions alone
    bool generator_null = false;         // L[v rho v^dagger] = 0 on every probe state
    std::map<std::string, double> residuals;
};

inline constexpr double kNullTol = 1e-10;

// Probes the four spanning states plus `num_rho_samples` random density
// matrices (at least 10). Throws DegenerateBeta when v = 0.
NoGoClassification null_condition_check(const Matrix& h, const Matrix& ell,
                                        const std::array<Complex, 4>& beta,
                                        int num_rho_samples = 50, std::uint64_t seed = 0);

// Random 2x2 density matrix with a uniformly random spectrum and basis.
Matrix random_density_2x2(RandomStream& stream);

// Basis (u1, u2) = columns of [[cos t, -e^{-ip} sin t], [e^{ip} sin t, cos t]].
Matrix basis_rotation(double theta, double phi);

// Bloch axis of u1; bases that differ by level relabelling map to +-axis.
Eigen::Vector3d basis_axis(double theta, double phi);

struct BasisScanOptions {
    double gamma = 1.0;
    int theta_points = 181;  // over [0, pi/2]
    int phi_points = 181;    // over [0, 2 pi)
    double tolerance = 1e-6; // angle tolerance against the eigenbasis, radians
    bool refine = true;
};

struct BasisPoint {
    double theta = 0.0;
    double phi = 0.0;
    double residual = 0.0;             // |h'_21| in the rotated basis
    Eigen::Vector3d axis = Eigen::Vector3d::Zero();
    double angle_to_eigenbasis = 0.0;  // radians, up to relabelling
    bool null_check = false;           // decay certified by null_condition_check
};

struct BasisScanReport {
    Eigen::MatrixXd residual_grid;     // (theta_points, phi_points)
    std::vector<BasisPoint> admissible;
    Eigen::Vector3d eigen_axis = Eigen::Vector3d::Zero();
    double max_angle_error = 0.0;
    std::size_t candidates = 0;        // grid minima sent to refinement
    bool matches_eigenbasis = false;   // nonempty and every basis within tolerance
};

// Throws DegenerateHamiltonian when H is a multiple of the identity (every
// basis is admissible), InvalidArgument for gamma <= 0.
BasisScanReport preferred_basis_scan(const Matrix& hamiltonian, const BasisScanOptions& options = {});

// |h'_21| for H expressed in the basis (theta, phi).
double basis_residual(const Matrix& hamiltonian, double theta, double phi);

namespace detail {
// Shared tail of the parallel and serial scans: grid minima, refinement,
// deduplication and the eigenbasis comparison.
BasisScanReport finish_scan(const Matrix& hamiltonian, const BasisScanOptions& options,
                            Eigen::MatrixXd grid);
void check_scan_inputs(const Matrix& hamiltonian, const BasisScanOptions& options);
}  // namespace detail

}  // namespace qstoch
