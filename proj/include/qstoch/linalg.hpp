#pragma once

// Dense complex matrix helpers for the small systems simulated here
// (two-level atoms and truncated Jaynes-Cummings spaces).

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

namespace qstoch {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Largest entry modulus.
double max_abs(const Matrix& m);

// max |M - M^dagger|.
double hermiticity_residual(const Matrix& m);

bool all_finite(const Matrix& m);

// Canonical matrix unit |row><col| (zero-based indices).
Matrix matrix_unit(Eigen::Index dim, Eigen::Index row, Eigen::Index col);

struct HermitianEigen {
    RealVector values;  // ascending
    Matrix vectors;     // orthonormal columns
};

// Throws NotHermitian when |M - M^dagger| exceeds tol * max(1, |M|).
HermitianEigen eigen_hermitian(const Matrix& m, double tol = 1e-10);

// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const Matrix& m);

// Principal square root of a Hermitian PSD matrix. Eigenvalues below zero but
// above -1e-6 are treated as rounding noise and clamped; anything more negative
// raises NotPositive.
Matrix hermitian_principal_sqrt(const Matrix& m);

// exp(-i H t) for Hermitian H.
Matrix unitary_from_hamiltonian(const Matrix& h, double t);

// Validated density operator: Hermitian within 1e-12, unit trace within 1e-12,
// smallest eigenvalue at least -1e-10.
class DensityMatrix {
public:
    static constexpr double kHermiticityTol = 1e-12;
    static constexpr double kTraceTol = 1e-12;
    static constexpr double kPositivityTol = 1e-10;

    // Throws NotHermitian, NotPositive or InvalidArgument.
    explicit DensityMatrix(Matrix m);

    // |psi><psi| for a normalised vector.
    static DensityMatrix pure(const Vector& psi);

    const Matrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Matrix m_;
};

// Reduce an atom-major bipartite state |a> (x) |n> to its atom factor.
Matrix partial_trace_field(const Matrix& rho, Eigen::Index atom_dim, Eigen::Index field_dim);
DensityMatrix partial_trace_field(const DensityMatrix& rho, Eigen::Index atom_dim,
                                  Eigen::Index field_dim);

}  // namespace qstoch
