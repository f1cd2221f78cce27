#include "qstoch/errors.hpp"
#include "qstoch/jaynes_cummings.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qstoch;
using qtest::Gen;

namespace {

JCParameters params(double w0, double w, double eps, int n_max) {
    JCParameters p;
    p.omega0 = w0;
    p.omega = w;
    p.epsilon = eps;
    p.n_max = n_max;
    return p;
}

Matrix dressed_projector(const JCParameters& p, Eigen::Index k) {
    Matrix m = Matrix::Zero(p.dim(), p.dim());
    m(k, k) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("Hamiltonian entries") {
    const JCParameters p = params(1.3, 0.9, 0.2, 4);
    const Matrix h = jc_hamiltonian(p);
    CHECK(h.rows() == 10);
    CHECK(hermiticity_residual(h) == 0.0);
    CHECK(h(product_index(p, 0, 2), product_index(p, 0, 2)).real() == doctest::Approx(0.65 + 1.8));
    CHECK(h(product_index(p, 1, 0), product_index(p, 1, 0)).real() == doctest::Approx(-0.65));
    CHECK(h(product_index(p, 0, 2), product_index(p, 1, 3)).real() == doctest::Approx(0.2 * std::sqrt(3.0)));
    CHECK(std::abs(h(product_index(p, 0, 2), product_index(p, 1, 2))) == 0.0);
    CHECK(product_index(p, 1, 0) == 5);
    CHECK_THROWS_AS(jc_hamiltonian(params(1, 1, -0.1, 4)), InvalidArgument);
    CHECK_THROWS_AS(jc_hamiltonian(params(1, 1, 0.1, 0)), InvalidArgument);
}

TEST_CASE("dressed states diagonalise each manifold") {
    Gen g(83);
    for (int trial = 0; trial < 50; ++trial) {
        const JCParameters p = params(g.uniform(0.2, 2), g.uniform(0.2, 2), g.uniform(0.01, 0.5), g.integer(1, 20));
        const Matrix h = jc_hamiltonian(p);
        const Matrix b = dressed_basis(p);
        CHECK(max_abs(b.adjoint() * b - Matrix::Identity(p.dim(), p.dim())) <= 1e-13);
        const std::vector<DressedState> states = dressed_basis_states(p);
        REQUIRE(states.size() == static_cast<std::size_t>(p.dim()));
        for (const DressedState& s : states) {
            const double scale = std::max(1.0, max_abs(h));
            CHECK((h * s.vector - s.energy * s.vector).cwiseAbs().maxCoeff() <= 1e-12 * scale);
        }
        const int n = g.integer(0, p.n_max - 1);
        auto [plus, minus] = dressed_states(p, n);
        const double delta = 0.5 * (p.omega - p.omega0);
        const double r = std::hypot(delta, p.epsilon * std::sqrt(n + 1.0));
        CHECK(plus.energy - minus.energy == doctest::Approx(2 * r));
        CHECK(plus.manifold == n + 1);
        CHECK(std::tan(plus.mixing_angle) == doctest::Approx((delta + r) / (p.epsilon * std::sqrt(n + 1.0))));
    }
}

TEST_CASE("mixing angle limits") {
    CHECK(mixing_angle(params(1, 1, 0.1, 4), 0) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
    // far detuning, |delta| / g = 1e3
    const double tiny = 1e-3;
    CHECK(std::abs(mixing_angle(params(1, 3, tiny, 4), 0) - std::numbers::pi / 2) <= 1e-3);
    CHECK(std::abs(mixing_angle(params(3, 1, tiny, 4), 0)) <= 1e-3);
    // red detuning must not lose the small angle to cancellation
    const double theta = mixing_angle(params(3, 1, 1e-9, 4), 0);
    CHECK(theta > 0.0);
    CHECK(theta == doctest::Approx(0.5e-9).epsilon(1e-6));
    CHECK_THROWS_AS(dressed_states(params(1, 1, 0.0, 4), 0), DegenerateCoupling);
    CHECK_THROWS_AS(dressed_states(params(1, 1, 0.1, 4), 4), InvalidArgument);
    CHECK_THROWS_AS(dressed_states(params(1, 1, 0.1, 4), -1), InvalidArgument);
}

TEST_CASE("zero coupling falls back to bare states") {
    const JCParameters p = params(1, 1.5, 0.0, 3);
    const Matrix b = dressed_basis(p);
    CHECK(max_abs((b.adjoint() * b) - Matrix::Identity(p.dim(), p.dim())) <= 1e-15);
    const Matrix h = jc_hamiltonian(p);
    CHECK(max_abs(b.adjoint() * h * b - Matrix((b.adjoint() * h * b).diagonal().asDiagonal())) <= 1e-14);
}

TEST_CASE("dressed evolution examples") {
    const JCParameters p = params(1, 1, 0.1, 3);
    const DressedNoiseSpec noise = DressedNoiseSpec::uniform(p, 0.5);
    CHECK(noise.slowest_time() == doctest::Approx(1.0));
    const Eigen::Index d = p.dim();
    // diagonal states are stationary
    Gen g(89);
    Matrix diag = Matrix::Zero(d, d);
    double total = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) total += (diag(k, k) = g.uniform()).real();
    diag /= total;
    const DensityMatrix rd(diag);
    CHECK(max_abs(jc_dressed_evolution(p, noise, rd, 7.0).matrix() - diag) == 0.0);
    // a coherence decays at the mean rate and rotates at the energy difference
    Matrix c = Matrix::Zero(d, d);
    c(1, 1) = c(2, 2) = c(1, 2) = c(2, 1) = 0.5;
    const DensityMatrix out = jc_dressed_evolution(p, noise, DensityMatrix(c), 2.0);
    const Complex want = 0.5 * std::exp(Complex(-0.5 * 2.0, -(noise.frequencies(1) - noise.frequencies(2)) * 2.0));
    CHECK(std::abs(out(1, 2) - want) <= 1e-15);
    CHECK_THROWS_AS(jc_dressed_evolution(params(1, 1, 0.1, 4), noise, rd, 1.0), BasisMismatch);
    CHECK_THROWS_AS(jc_dressed_evolution(p, noise, DensityMatrix(qtest::diag2(1, 0)), 1.0), BasisMismatch);
}

TEST_CASE("noise is energy preserving: dressed populations are constant") {
    Gen g(97);
    const JCParameters p = params(1.1, 0.9, 0.15, 5);
    DressedNoiseSpec noise = DressedNoiseSpec::uniform(p, 0.3);
    for (Eigen::Index k = 0; k < noise.rates.size(); ++k) noise.rates(k) = g.uniform(0.0, 1.0);
    const DensityMatrix r0(g.density(static_cast<int>(p.dim())));
    for (double t : {0.5, 3.0, 40.0}) {
        const DensityMatrix r = jc_dressed_evolution(p, noise, r0, t);
        CHECK((r.matrix().diagonal() - r0.matrix().diagonal()).cwiseAbs().maxCoeff() <= 1e-15);
        const Matrix h = jc_hamiltonian(p);
        const Matrix prod0 = to_product(p, r0).matrix(), prod = to_product(p, r).matrix();
        CHECK(std::abs((h * prod).trace() - (h * prod0).trace()) <= 1e-12);
    }
}

TEST_CASE("zero rates reduce to unitary evolution") {
    Gen g(101);
    const JCParameters p = params(1.2, 0.8, 0.3, 4);
    const DressedNoiseSpec noise = DressedNoiseSpec::uniform(p, 0.0);
    const Matrix h = jc_hamiltonian(p);
    const Matrix r0 = g.density(static_cast<int>(p.dim()));
    for (double t : {0.7, 5.0}) {
        const Matrix u = qtest::expm_taylor(-kI * h * t);
        const Matrix want = u * r0 * u.adjoint();
        const DensityMatrix got = to_product(p, jc_dressed_evolution(p, noise, to_dressed(p, DensityMatrix(r0)), t));
        CHECK(max_abs(got.matrix() - want) <= 1e-9);
    }
}

TEST_CASE("basis changes round-trip") {
    Gen g(103);
    const JCParameters p = params(1, 1.4, 0.2, 6);
    const DensityMatrix r(g.density(static_cast<int>(p.dim())));
    CHECK(max_abs(to_product(p, to_dressed(p, r)).matrix() - r.matrix()) <= 1e-14);
    CHECK_THROWS_AS(to_dressed(p, DensityMatrix(qtest::diag2(1, 0))), BasisMismatch);
}

TEST_CASE("atom reduction examples") {
    const JCParameters p = params(1, 1.2, 0.1, 4);
    CHECK(max_abs(reduce_atom(DensityMatrix(dressed_projector(p, 0)), p).matrix() - qtest::diag2(0, 1)) <= 1e-15);
    const double th = mixing_angle(p, 1);
    const double c2 = std::pow(std::cos(th), 2), s2 = std::pow(std::sin(th), 2);
    CHECK(max_abs(reduce_atom(DensityMatrix(dressed_projector(p, 3)), p).matrix() - qtest::diag2(c2, s2)) <= 1e-14);
    CHECK(max_abs(reduce_atom(DensityMatrix(dressed_projector(p, 4)), p).matrix() - qtest::diag2(s2, c2)) <= 1e-14);
    CHECK(max_abs(reduce_atom(DensityMatrix(dressed_projector(p, p.dim() - 1)), p).matrix() - qtest::diag2(1, 0)) <= 1e-15);
    CHECK_THROWS_AS(reduce_atom(DensityMatrix(qtest::diag2(1, 0)), p), DimensionMismatch);
}

TEST_CASE("asymptotic atom state") {
    const DensityMatrix res = asymptotic_atom(params(1, 1, 0.1, 4), 0);
    CHECK(max_abs(res.matrix() - qtest::diag2(0.5, 0.5)) <= 1e-15);
    Gen g(107);
    for (int k = 0; k < 30; ++k) {
        const JCParameters p = params(g.uniform(0.5, 2), g.uniform(0.5, 2), g.uniform(0.01, 0.5), 6);
        const int n = g.integer(0, 5);
        const double th = mixing_angle(p, n);
        const double c = std::cos(th), s = std::sin(th);
        const DensityMatrix a = asymptotic_atom(p, n);
        CHECK(a(0, 0).real() == doctest::Approx(std::pow(c, 4) + std::pow(s, 4)));
        CHECK(a(1, 1).real() == doctest::Approx(2 * c * c * s * s));
        CHECK(a(1, 1).real() <= 0.5 + 1e-15);
    }
    CHECK_THROWS_AS(asymptotic_atom(params(1, 1, 0.1, 4), 4), InvalidArgument);
}

TEST_CASE("full run follows the closed-form excited population") {
    Gen g(109);
    for (int k = 0; k < 10; ++k) {
        const int n = g.integer(0, 3);
        const JCParameters p = params(g.uniform(0.5, 2), g.uniform(0.5, 2), g.uniform(0.05, 0.5), n + 6);
        const double gamma = g.uniform(0.1, 1.0);
        const DressedNoiseSpec noise = DressedNoiseSpec::uniform(p, gamma);
        std::vector<double> grid;
        for (int j = 0; j <= 50; ++j) grid.push_back(0.4 * j);
        const JCRun run = jc_full_run(p, noise, n, grid);
        const double th = mixing_angle(p, n);
        const double c = std::cos(th), s = std::sin(th);
        const double r = std::hypot(0.5 * (p.omega - p.omega0), p.epsilon * std::sqrt(n + 1.0));
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double t = grid[j];
            const double want = std::pow(c, 4) + std::pow(s, 4) +
                                2 * c * c * s * s * std::exp(-gamma * t) * std::cos(2 * r * t);
            CHECK(run.atom[j](0, 0).real() == doctest::Approx(want).epsilon(1e-12));
            CHECK(std::abs(run.atom[j](0, 1)) <= 1e-14);
        }
        CHECK(run.max_trace_drift <= 1e-12);
        CHECK(run.boundary_population <= 1e-14);
    }
    CHECK_THROWS_AS(jc_initial_state(params(1, 1, 0.1, 4), 4), InvalidArgument);
}
