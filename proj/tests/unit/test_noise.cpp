#include "qstoch/errors.hpp"
#include "qstoch/model.hpp"
#include "qstoch/noise.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace qstoch;

TEST_CASE("random streams are reproducible and keyed on (seed, index)") {
    RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
    CHECK(x != d.normal());
    CHECK(RandomStream(1, 2).key() == RandomStream(1, 2).key());
    CHECK(RandomStream(1, 2).substream(3).key() != RandomStream(1, 3).substream(2).key());
}

TEST_CASE("complex normal is circular with unit variance") {
    RandomStream s(5);
    const int n = 200000;
    Complex sum = 0, sum_sq = 0;
    double sum_abs = 0;
    for (int k = 0; k < n; ++k) {
        const Complex z = s.complex_normal();
        sum += z;
        sum_sq += z * z;
        sum_abs += std::norm(z);
    }
    // standard errors: mean 1/sqrt(n), |z|^2 mean 1/sqrt(n), z^2 mean 1/sqrt(n)
    const double tol = 5.0 / std::sqrt(n);
    CHECK(std::abs(sum / double(n)) < tol);
    CHECK(std::abs(sum_sq / double(n)) < tol);
    CHECK(std::abs(sum_abs / n - 1.0) < tol);
}

TEST_CASE("circular Gaussian sampler reproduces its covariance") {
    Matrix cov(2, 2);
    cov << 2.0, Complex(0.5, 0.3), Complex(0.5, -0.3), 1.0;
    const CircularGaussian g(cov);
    CHECK(max_abs(g.factor() * g.factor().adjoint() - cov) < 1e-14);
    RandomStream s(9);
    const int n = 100000;
    Matrix emp = Matrix::Zero(2, 2);
    Matrix pseudo = Matrix::Zero(2, 2);
    for (int k = 0; k < n; ++k) {
        const Vector z = g.sample(s);
        emp += z * z.adjoint();
        pseudo += z * z.transpose();
    }
    emp /= n;
    pseudo /= n;
    CHECK(max_abs(emp - cov) < 5.0 * 2.0 / std::sqrt(n));
    CHECK(max_abs(pseudo) < 5.0 * 2.0 / std::sqrt(n));
    // rank-deficient covariance is fine, indefinite is not
    CHECK_NOTHROW(CircularGaussian(Matrix::Constant(2, 2, 1.0)));
    CHECK_THROWS_AS(CircularGaussian(qtest::diag2(1.0, -0.1)), NotPositive);
}

TEST_CASE("integrated cross-variance: closed form against Simpson") {
    for (int col : {0, 1}) {
        for (double t1 : {0.3, 1.0, 4.0}) {
            const CouplingTerm n = CouplingTerm::stationary(1, col, 0.7, 1.3);
            const CouplingTerm m = CouplingTerm::stationary(0, 1 - col, 1.9, 1.3);
            const Complex a(0.4, -0.2);
            const Complex closed = integrated_cross_variance(n, m, a, 0.2, t1 + 0.2);
            const Complex oracle =
                a * qtest::simpson([&](double s) { return n.amplitude(s) * std::conj(m.amplitude(s)); }, 0.2, t1 + 0.2);
            CHECK(std::abs(closed - oracle) < 1e-12);
        }
    }
    // equal-term variance: gamma int exp(-gamma s) = 1 - exp(-gamma t)
    const CouplingTerm e21 = CouplingTerm::stationary(1, 0, 2.0, 1.0);
    CHECK(std::abs(integrated_cross_variance(e21, e21, 1.0, 0.0, 1.5) - (1.0 - std::exp(-3.0))) < 1e-15);
}

TEST_CASE("variance integral stays accurate for tiny decay rates") {
    CouplingTerm c = CouplingTerm::constant(1, 0, 1.0);
    for (double decay : {1e-12, 1e-9, 1e-6, 9e-5, 1.1e-4, 1e-3, 0.5}) {
        c.decay = decay;
        const double t = 1.0;
        const Complex v = integrated_cross_variance(c, c, 1.0, 0.0, t);
        const double exact = -std::expm1(-decay * t) / decay;
        CHECK(std::abs(v.real() - exact) < 2e-15);
    }
}

TEST_CASE("custom profiles go through adaptive quadrature") {
    CouplingTerm c = CouplingTerm::constant(1, 0, 1.0);
    c.profile = [](double s) { return Complex(std::cos(3 * s), std::sin(s) * s); };
    CouplingTerm d = CouplingTerm::constant(0, 1, 1.0);
    d.profile = [](double s) { return Complex(1.0 / (1.0 + s * s), 0.5); };
    const Complex q = integrated_cross_variance(c, d, Complex(0.3, 0.1), 0.0, 2.5);
    const Complex oracle = Complex(0.3, 0.1) *
                           qtest::simpson([&](double s) { return c.profile(s) * std::conj(d.profile(s)); }, 0.0, 2.5);
    CHECK(std::abs(q - oracle) < 1e-10);
    c.profile = [](double s) { return Complex(1.0 / std::sqrt(s), 0.0) * 1e8; };
    CHECK_THROWS_AS(integrated_cross_variance(c, c, 1.0, 0.0, 1.0), QuadratureFailure);
}

TEST_CASE("interval and grid validation") {
    const CouplingTerm c = CouplingTerm::stationary(1, 0, 1.0, 1.0);
    CHECK_THROWS_AS(integrated_cross_variance(c, c, 1.0, 1.0, 0.5), InvalidInterval);
    CHECK_THROWS_AS(integrated_cross_variance(c, c, 1.0, -0.1, 0.5), InvalidInterval);
    CHECK(integrated_cross_variance(c, c, 1.0, 0.5, 0.5) == Complex(0.0));
    CHECK(integrated_cross_variance(c, c, 0.0, 0.0, 0.5) == Complex(0.0));
    const std::vector<double> good{0.0, 0.5, 1.0};
    const std::vector<double> late{0.1, 0.5};
    const std::vector<double> flat{0.0, 0.5, 0.5};
    CHECK_NOTHROW(validate_grid(good));
    CHECK_THROWS_AS(validate_grid(late), InvalidInterval);
    CHECK_THROWS_AS(validate_grid(flat), InvalidInterval);
}

TEST_CASE("increment plan covariances sum to the cumulative variance") {
    const StochasticModel model =
        two_level_model(1.0, {CouplingTerm::stationary(0, 0, 1.0, 1.0), CouplingTerm::stationary(0, 1, 0.5, 1.0)});
    std::vector<double> grid{0.0, 0.3, 0.8, 2.0};
    const GaussianIncrementPlan plan = build_increment_plan(model, grid);
    REQUIRE(plan.num_intervals() == 3);
    Matrix total = Matrix::Zero(2, 2);
    for (const Matrix& c : plan.covariances) total += c;
    CHECK(max_abs(total - cross_variance_matrix(model, 0.0, 2.0)) < 1e-15);
}
