#include "qstoch/preferred_basis.hpp"

#include "qstoch/errors.hpp"
#include "qstoch/lindblad.hpp"

#include <algorithm>
#include <cmath>

namespace qstoch {

namespace {

void require_2x2(const Matrix& m, const char* what) {
    if (m.rows() != 2 || m.cols() != 2) {
        throw DimensionMismatch(std::string(what) + " must be 2x2");
    }
}

}  // namespace

std::array<Complex, 4> to_canonical(const Matrix& x) {
    require_2x2(x, "to_canonical: argument");
    return {x(0, 0), x(0, 1), x(1, 0), x(1, 1)};
}

Matrix from_canonical(const std::array<Complex, 4>& c) {
    Matrix m(2, 2);
    m << c[0], c[1], c[2], c[3];
    return m;
}

LambdaMatrix lambda_matrix(const Matrix& h, const Matrix& ell) {
    require_2x2(h, "lambda_matrix: H");
    require_2x2(ell, "lambda_matrix: ell");
    const Matrix one = Matrix::Identity(1, 1);
    const std::vector<Matrix> ls{ell};
    LambdaMatrix lambda;
    for (int n = 0; n < 4; ++n) {
        std::array<Complex, 4> e{};
        e[n] = 1.0;
        const std::array<Complex, 4> row = to_canonical(generator_apply(h, ls, one, from_canonical(e)));
        for (int m = 0; m < 4; ++m) {
            lambda(n, m) = row[m];
        }
    }
    return lambda;
}

std::array<Complex, 4> alpha_coefficients(const std::array<Complex, 4>& beta, const Matrix& rho0) {
    require_2x2(rho0, "alpha_coefficients: rho0");
    Eigen::Vector2cd top(beta[0], beta[1]);
    Eigen::Vector2cd bottom(beta[2], beta[3]);
    // row vector (b_i b_j) rho0 column (b_k^*, b_l^*)
    auto form = [&](const Eigen::Vector2cd& l, const Eigen::Vector2cd& r) {
        return (l.transpose() * rho0 * r.conjugate())(0, 0);
    };
    return {form(top, top), form(top, bottom), form(bottom, top), form(bottom, bottom)};
}

const char* to_string(NoGoCase c) noexcept {
    switch (c) {
        case NoGoCase::Case1RowForm: return "Case1RowForm";
        case NoGoCase::Case2RowForm: return "Case2RowForm";
        case NoGoCase::Case3General: return "Case3General";
    }
    return "?";
}

Matrix random_density_2x2(RandomStream& stream) {
    Eigen::Vector2cd psi(stream.complex_normal(), stream.complex_normal());
    psi.normalize();
    Eigen::Vector2cd perp(-std::conj(psi(1)), std::conj(psi(0)));
    const double p = stream.uniform();
    Matrix rho = p * psi * psi.adjoint() + (1.0 - p) * perp * perp.adjoint();
    return 0.5 * (rho + rho.adjoint());
}

NoGoClassification null_condition_check(const Matrix& h, const Matrix& ell,
                                        const std::array<Complex, 4>& beta, int num_rho_samples,
                                        std::uint64_t seed) {
    require_2x2(h, "null_condition_check: H");
    require_2x2(ell, "null_condition_check: ell");
    if (num_rho_samples < 10) {
        throw InvalidArgument("null_condition_check: need at least 10 random states");
    }
    double scale = 0.0;
    for (const Complex& b : beta) {
        scale = std::max(scale, std::abs(b));
    }
    if (scale == 0.0) {
        throw DegenerateBeta("null_condition_check: v = 0");
    }
    const double zero = 1e-14 * scale;
    const bool top_zero = std::abs(beta[0]) <= zero && std::abs(beta[1]) <= zero;
    const bool bottom_zero = std::abs(beta[2]) <= zero && std::abs(beta[3]) <= zero;

    NoGoClassification out;
    const Complex two_i(0.0, 2.0);
    if (bottom_zero) {
        out.which = NoGoCase::Case1RowForm;
        out.residuals["l12_l11conj_minus_2i_h12"] = std::abs(ell(0, 1) * std::conj(ell(0, 0)) - two_i * h(0, 1));
        out.residuals["l21"] = std::abs(ell(1, 0));
    } else if (top_zero) {
        out.which = NoGoCase::Case2RowForm;
        out.residuals["l21_l22conj_minus_2i_h21"] = std::abs(ell(1, 0) * std::conj(ell(1, 1)) - two_i * h(1, 0));
        out.residuals["l12"] = std::abs(ell(0, 1));
    } else {
        out.which = NoGoCase::Case3General;
    }

    std::vector<Matrix> states = spanning_density_set();
    RandomStream stream(seed, 0x70726f7034ULL);
    for (int s = 0; s < num_rho_samples; ++s) {
        states.push_back(random_density_2x2(stream));
    }

    const LambdaMatrix lambda = lambda_matrix(h, ell);
    const Matrix v = from_canonical(beta);
    const std::vector<Matrix> ls{ell};
    const Matrix one = Matrix::Identity(1, 1);
    double rel1 = 0.0;
    double rel2 = 0.0;
    double null_max = 0.0;
    for (const Matrix& rho : states) {
        const std::array<Complex, 4> alpha = alpha_coefficients(beta, rho);
        Complex c1 = 0.0;
        Complex c2 = 0.0;
        for (int i = 0; i < 4; ++i) {
            c1 += alpha[i] * lambda(i, 0);
            c2 += alpha[i] * lambda(i, 1);
        }
        rel1 = std::max(rel1, std::abs(c1));
        rel2 = std::max(rel2, std::abs(c2));
        null_max = std::max(null_max, max_abs(generator_apply(h, ls, one, v * rho * v.adjoint())));
    }
    if (out.which == NoGoCase::Case3General) {
        out.residuals["alpha_lambda_col1"] = rel1;
        out.residuals["alpha_lambda_col2"] = rel2;
    }
    out.displayed_conditions = std::all_of(out.residuals.begin(), out.residuals.end(),
                                           [](const auto& kv) { return kv.second <= kNullTol; });
    out.residuals["generator_null_max"] = null_max;
    out.generator_null = null_max <= kNullTol;
    out.conditions_met = out.displayed_conditions && out.generator_null;
    return out;
}

Matrix basis_rotation(double theta, double phi) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Complex e = std::polar(1.0, phi);
    Matrix u(2, 2);
    u << c, -std::conj(e) * s, e * s, c;
    return u;
}

Eigen::Vector3d basis_axis(double theta, double phi) {
    return {std::sin(2 * theta) * std::cos(phi), std::sin(2 * theta) * std::sin(phi), std::cos(2 * theta)};
}

double basis_residual(const Matrix& hamiltonian, double theta, double phi) {
    const Matrix u = basis_rotation(theta, phi);
    const Matrix hr = u.adjoint() * hamiltonian * u;
    return std::abs(hr(1, 0));
}

}  // namespace qstoch
