#include "qstoch/linalg.hpp"

#include "qstoch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qstoch {

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_residual(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("hermiticity_residual: matrix is not square");
    }
    return max_abs(m - m.adjoint());
}

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

Matrix matrix_unit(Eigen::Index dim, Eigen::Index row, Eigen::Index col) {
    if (dim < 1 || row < 0 || col < 0 || row >= dim || col >= dim) {
        throw InvalidArgument("matrix_unit: index out of range");
    }
    Matrix e = Matrix::Zero(dim, dim);
    e(row, col) = 1.0;
    return e;
}

HermitianEigen eigen_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw DimensionMismatch("eigen_hermitian: expected a non-empty square matrix");
    }
    if (!m.allFinite()) {
        throw InvalidArgument("eigen_hermitian: non-finite entries");
    }
    const double scale = std::max(1.0, max_abs(m));
    const double asym = hermiticity_residual(m);
    if (asym > tol * scale) {
        throw NotHermitian("eigen_hermitian: |M - M^dagger| = " + std::to_string(asym));
    }
    const Matrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw Error("eigen_hermitian: eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const Matrix& m) {
    if (m.rows() == 2) {
        // closed form keeps the 2x2 hot paths cheap
        const double a = m(0, 0).real();
        const double d = m(1, 1).real();
        const double off = std::abs(0.5 * (m(0, 1) + std::conj(m(1, 0))));
        const double half = 0.5 * (a - d);
        return 0.5 * (a + d) - std::hypot(half, off);
    }
    const Matrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

Matrix hermitian_principal_sqrt(const Matrix& m) {
    constexpr double kRejectBelow = -1e-6;
    const HermitianEigen eig = eigen_hermitian(m);
    const double lowest = eig.values(0);
    if (lowest < kRejectBelow) {
        throw NotPositive("hermitian_principal_sqrt: eigenvalue " + std::to_string(lowest) +
                              " is negative",
                          lowest);
    }
    const RealVector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
    Matrix r = eig.vectors * roots.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    return 0.5 * (r + r.adjoint());
}

Matrix unitary_from_hamiltonian(const Matrix& h, double t) {
    const HermitianEigen eig = eigen_hermitian(h);
    Vector phases(eig.values.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) {
        phases(k) = std::exp(-kI * eig.values(k) * t);
    }
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) {
        throw DimensionMismatch("DensityMatrix: expected a non-empty square matrix");
    }
    if (!m_.allFinite()) {
        throw InvalidArgument("DensityMatrix: non-finite entries");
    }
    const double asym = hermiticity_residual(m_);
    if (asym > kHermiticityTol) {
        throw NotHermitian("DensityMatrix: |rho - rho^dagger| = " + std::to_string(asym));
    }
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol || std::abs(m_.trace().imag()) > kTraceTol) {
        throw InvalidArgument("DensityMatrix: trace " + std::to_string(tr) + " differs from 1");
    }
    const double lowest = min_eigenvalue(m_);
    if (lowest < -kPositivityTol) {
        throw NotPositive("DensityMatrix: eigenvalue " + std::to_string(lowest), lowest);
    }
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
    return DensityMatrix(psi * psi.adjoint());
}

Matrix partial_trace_field(const Matrix& rho, Eigen::Index atom_dim, Eigen::Index field_dim) {
    if (atom_dim < 1 || field_dim < 1 || rho.rows() != atom_dim * field_dim ||
        rho.cols() != rho.rows()) {
        throw DimensionMismatch("partial_trace_field: state of dimension " +
                                std::to_string(rho.rows()) + " is not " +
                                std::to_string(atom_dim) + " x " + std::to_string(field_dim));
    }
    Matrix out = Matrix::Zero(atom_dim, atom_dim);
    for (Eigen::Index a = 0; a < atom_dim; ++a) {
        for (Eigen::Index b = 0; b < atom_dim; ++b) {
            Complex sum = 0.0;
            for (Eigen::Index n = 0; n < field_dim; ++n) {
                sum += rho(a * field_dim + n, b * field_dim + n);
            }
            out(a, b) = sum;
        }
    }
    return out;
}

DensityMatrix partial_trace_field(const DensityMatrix& rho, Eigen::Index atom_dim,
                                  Eigen::Index field_dim) {
    Matrix reduced = partial_trace_field(rho.matrix(), atom_dim, field_dim);
    return DensityMatrix(0.5 * (reduced + reduced.adjoint()));
}

}  // namespace qstoch
