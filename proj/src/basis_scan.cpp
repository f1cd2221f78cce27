#include "qstoch/preferred_basis.hpp"

#include "qstoch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/LevenbergMarquardt>

namespace qstoch {

namespace detail {

namespace {

// (Re h'_21, Im h'_21) as a function of (theta, phi)
struct OffDiagonal {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    using QRSolver = Eigen::ColPivHouseholderQR<JacobianType>;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    Matrix h;

    int inputs() const { return 2; }
    int values() const { return 2; }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        const Matrix u = basis_rotation(x(0), x(1));
        const Complex z = (u.adjoint() * h * u)(1, 0);
        f(0) = z.real();
        f(1) = z.imag();
        return 0;
    }

    // central differences; the forward default steps by machine epsilon at 0
    int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
        constexpr double step = 1e-7;
        Eigen::VectorXd fp(2), fm(2);
        for (int k = 0; k < 2; ++k) {
            Eigen::VectorXd xp = x, xm = x;
            xp(k) += step;
            xm(k) -= step;
            (*this)(xp, fp);
            (*this)(xm, fm);
            jac.col(k) = (fp - fm) / (2 * step);
        }
        return 0;
    }
};

double axis_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return std::acos(std::min(1.0, std::abs(a.dot(b))));
}

}  // namespace

void check_scan_inputs(const Matrix& hamiltonian, const BasisScanOptions& options) {
    if (hamiltonian.rows() != 2 || hamiltonian.cols() != 2) {
        throw DimensionMismatch("preferred_basis_scan: H must be 2x2");
    }
    if (hermiticity_residual(hamiltonian) > 1e-12 * std::max(1.0, max_abs(hamiltonian))) {
        throw NotHermitian("preferred_basis_scan: H is not Hermitian");
    }
    if (!(options.gamma > 0.0)) {
        throw InvalidArgument("preferred_basis_scan: gamma must be positive");
    }
    if (options.theta_points < 2 || options.phi_points < 1) {
        throw InvalidArgument("preferred_basis_scan: grid too small");
    }
    const double spread = std::hypot(std::abs(hamiltonian(0, 0) - hamiltonian(1, 1)),
                                     2.0 * std::abs(hamiltonian(0, 1)));
    if (spread <= 1e-12 * std::max(1.0, max_abs(hamiltonian))) {
        throw DegenerateHamiltonian("preferred_basis_scan: H is proportional to the identity, "
                                    "every basis is admissible");
    }
}

BasisScanReport finish_scan(const Matrix& hamiltonian, const BasisScanOptions& options,
                            Eigen::MatrixXd grid) {
    const double pi = std::numbers::pi;
    const int nt = options.theta_points;
    const int np = options.phi_points;
    const double dtheta = (pi / 2) / (nt - 1);
    const double dphi = 2 * pi / np;
    const Matrix& h = hamiltonian;
    // eigenvalue gap; |h'_21| = (gap / 2) sin(angle from the eigen axis)
    const double gap = std::hypot((h(0, 0) - h(1, 1)).real(), 2.0 * std::abs(h(0, 1)));

    BasisScanReport rep;
    rep.eigen_axis = Eigen::Vector3d(h(0, 1).real(), -h(0, 1).imag(), 0.5 * (h(0, 0) - h(1, 1)).real());
    rep.eigen_axis.normalize();

    std::vector<std::pair<double, double>> seeds;
    const double cutoff = 0.25 * gap;
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < np; ++j) {
            const double r = grid(i, j);
            if (r > cutoff) {
                continue;
            }
            bool minimum = true;
            for (int di = -1; di <= 1 && minimum; ++di) {
                const int ii = i + di;
                if (ii < 0 || ii >= nt) {
                    continue;
                }
                for (int dj = -1; dj <= 1; ++dj) {
                    if ((di != 0 || dj != 0) && grid(ii, (j + dj + np) % np) < r) {
                        minimum = false;
                        break;
                    }
                }
            }
            if (minimum) {
                seeds.emplace_back(i * dtheta, j * dphi);
            }
        }
    }
    rep.candidates = seeds.size();

    const double accept = 1e-10 * std::max(1.0, gap);
    const Matrix decay = std::sqrt(options.gamma) * matrix_unit(2, 1, 0);
    const std::array<Complex, 4> beta{0.0, 0.0, std::sqrt(options.gamma), 0.0};
    for (auto [theta, phi] : seeds) {
        if (options.refine) {
            OffDiagonal f{hamiltonian};
            Eigen::LevenbergMarquardt<OffDiagonal> lm(f);
            lm.setXtol(1e-15);
            lm.setFtol(1e-15);
            lm.setMaxfev(2000);
            Eigen::VectorXd x(2);
            x << theta, phi;
            lm.minimize(x);
            theta = x(0);
            phi = x(1);
        }
        const double r = basis_residual(hamiltonian, theta, phi);
        if (r > accept) {
            continue;
        }
        const Eigen::Vector3d axis = basis_axis(theta, phi);
        const bool duplicate = std::any_of(rep.admissible.begin(), rep.admissible.end(), [&](const BasisPoint& p) {
            return axis_angle(p.axis, axis) < 1e-4;
        });
        if (duplicate) {
            continue;
        }
        BasisPoint p;
        p.theta = theta;
        p.phi = phi;
        p.residual = r;
        p.axis = axis;
        p.angle_to_eigenbasis = axis_angle(axis, rep.eigen_axis);
        const Matrix u = basis_rotation(theta, phi);
        p.null_check = null_condition_check(u.adjoint() * hamiltonian * u, decay, beta).conditions_met;
        rep.max_angle_error = std::max(rep.max_angle_error, p.angle_to_eigenbasis);
        rep.admissible.push_back(p);
    }
    rep.matches_eigenbasis = !rep.admissible.empty() && rep.max_angle_error <= options.tolerance &&
                             std::all_of(rep.admissible.begin(), rep.admissible.end(),
                                         [](const BasisPoint& p) { return p.null_check; });
    rep.residual_grid = std::move(grid);
    return rep;
}

}  // namespace detail

BasisScanReport preferred_basis_scan(const Matrix& hamiltonian, const BasisScanOptions& options) {
    detail::check_scan_inputs(hamiltonian, options);
    const int nt = options.theta_points;
    const int np = options.phi_points;
    const double dtheta = (std::numbers::pi / 2) / (nt - 1);
    const double dphi = 2 * std::numbers::pi / np;
    Eigen::MatrixXd grid(nt, np);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < np; ++j) {
            grid(i, j) = basis_residual(hamiltonian, i * dtheta, j * dphi);
        }
    }
    return detail::finish_scan(hamiltonian, options, std::move(grid));
}

}  // namespace qstoch
