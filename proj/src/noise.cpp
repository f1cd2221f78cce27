#include "qstoch/noise.hpp"

#include "qstoch/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>

namespace qstoch {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t index)
    : key_(splitmix64(splitmix64(seed) ^ splitmix64(index ^ 0xD1B54A32D192ED03ULL))),
      engine_(key_) {}

Complex RandomStream::complex_normal() {
    constexpr double kHalf = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {kHalf * re, kHalf * im};
}

CircularGaussian::CircularGaussian(const Matrix& cov) {
    if (cov.rows() != cov.cols()) {
        throw DimensionMismatch("CircularGaussian: covariance must be square");
    }
    if (cov.size() == 0) {
        factor_ = Matrix(0, 0);
        return;
    }
    const HermitianEigen eig = eigen_hermitian(cov);
    const double scale = std::max(1.0, max_abs(cov));
    if (eig.values(0) < -1e-10 * scale) {
        throw NotPositive("CircularGaussian: covariance eigenvalue " +
                              std::to_string(eig.values(0)),
                          eig.values(0));
    }
    const RealVector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
    factor_ = eig.vectors * roots.cast<Complex>().asDiagonal();
}

Vector CircularGaussian::sample(RandomStream& stream) const {
    Vector g(factor_.cols());
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        g(k) = stream.complex_normal();
    }
    return factor_ * g;
}

Vector circular_complex_gaussian(const Matrix& cov, RandomStream& stream) {
    return CircularGaussian(cov).sample(stream);
}

namespace {

// 1 - exp(-w) without cancellation for small |w|
Complex one_minus_exp(Complex w) {
    const double a = w.real();
    const double b = w.imag();
    const double sb = std::sin(0.5 * b);
    return {-std::expm1(-a) + 2.0 * std::exp(-a) * sb * sb, std::exp(-a) * std::sin(b)};
}

// int_{t0}^{t1} exp(-z s) ds
Complex exp_integral(Complex z, double t0, double t1) {
    const double width = t1 - t0;
    const Complex w = z * width;
    const Complex g = w == Complex(0.0) ? Complex(1.0) : one_minus_exp(w) / w;
    return std::exp(-z * t0) * g * width;
}

Complex quadrature(const std::function<Complex(double)>& f, double t0, double t1) {
    using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
    constexpr double kTol = 1e-10;
    double err_re = 0.0;
    double err_im = 0.0;
    const double re = Integrator::integrate([&](double s) { return f(s).real(); }, t0, t1, 15,
                                            kTol, &err_re);
    const double im = Integrator::integrate([&](double s) { return f(s).imag(); }, t0, t1, 15,
                                            kTol, &err_im);
    const Complex value(re, im);
    const double allowed = 1e3 * kTol * std::max(1.0, std::abs(value));
    if (!std::isfinite(re) || !std::isfinite(im) || err_re > allowed || err_im > allowed) {
        throw QuadratureFailure("adaptive quadrature did not reach tolerance on [" +
                                std::to_string(t0) + ", " + std::to_string(t1) + "]");
    }
    return value;
}

}  // namespace

Complex integrated_cross_variance(const CouplingTerm& term_n, const CouplingTerm& term_m,
                                  Complex a_nm, double t0, double t1) {
    if (!(t0 >= 0.0) || !(t1 >= t0)) {
        throw InvalidInterval("integrated_cross_variance: need 0 <= t0 <= t1, got [" +
                              std::to_string(t0) + ", " + std::to_string(t1) + "]");
    }
    if (t1 == t0 || a_nm == Complex(0.0)) {
        return 0.0;
    }
    if (term_n.has_closed_form() && term_m.has_closed_form()) {
        const Complex z(0.5 * (term_n.decay + term_m.decay),
                        term_n.phase_sign() * term_n.frequency -
                            term_m.phase_sign() * term_m.frequency);
        return a_nm * std::sqrt(term_n.rate * term_m.rate) * exp_integral(z, t0, t1);
    }
    return a_nm * quadrature(
                      [&](double s) {
                          return term_n.amplitude(s) * std::conj(term_m.amplitude(s));
                      },
                      t0, t1);
}

Matrix cross_variance_matrix(const StochasticModel& model, double t0, double t1) {
    const auto k = static_cast<Eigen::Index>(model.couplings.size());
    Matrix c = Matrix::Zero(k, k);
    for (Eigen::Index n = 0; n < k; ++n) {
        for (Eigen::Index m = 0; m <= n; ++m) {
            c(n, m) = integrated_cross_variance(model.couplings[n], model.couplings[m],
                                                model.noise.covariance(n, m), t0, t1);
            if (m != n) {
                c(m, n) = std::conj(c(n, m));
            }
        }
        c(n, n) = c(n, n).real();
    }
    return c;
}

void validate_grid(std::span<const double> grid) {
    if (grid.empty() || grid.front() != 0.0) {
        throw InvalidInterval("time grid must start at 0");
    }
    for (std::size_t j = 1; j < grid.size(); ++j) {
        if (!(grid[j] > grid[j - 1]) || !std::isfinite(grid[j])) {
            throw InvalidInterval("time grid must be strictly increasing (index " +
                                  std::to_string(j) + ")");
        }
    }
}

GaussianIncrementPlan build_increment_plan(const StochasticModel& model,
                                           std::span<const double> grid) {
    validate_grid(grid);
    GaussianIncrementPlan plan;
    plan.grid.assign(grid.begin(), grid.end());
    plan.covariances.reserve(grid.size() - 1);
    plan.samplers.reserve(grid.size() - 1);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        plan.covariances.push_back(cross_variance_matrix(model, grid[j], grid[j + 1]));
        plan.samplers.emplace_back(plan.covariances.back());
    }
    return plan;
}

}  // namespace qstoch
