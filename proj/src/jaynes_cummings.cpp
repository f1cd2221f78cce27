#include "qstoch/jaynes_cummings.hpp"

#include "qstoch/errors.hpp"
#include "qstoch/noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qstoch {

void JCParameters::validate() const {
    if (!std::isfinite(omega0) || !std::isfinite(omega) || !std::isfinite(epsilon)) {
        throw InvalidArgument("JCParameters: frequencies must be finite");
    }
    if (epsilon < 0.0) {
        throw InvalidArgument("JCParameters: epsilon must be non-negative");
    }
    if (n_max < 1) {
        throw InvalidArgument("JCParameters: n_max must be at least 1");
    }
}

Eigen::Index product_index(const JCParameters& p, int atom, int photons) {
    return atom * p.field_dim() + photons;
}

Matrix jc_hamiltonian(const JCParameters& p) {
    p.validate();
    Matrix h = Matrix::Zero(p.dim(), p.dim());
    for (int m = 0; m <= p.n_max; ++m) {
        h(product_index(p, 0, m), product_index(p, 0, m)) = 0.5 * p.omega0 + m * p.omega;
        h(product_index(p, 1, m), product_index(p, 1, m)) = -0.5 * p.omega0 + m * p.omega;
    }
    for (int n = 0; n < p.n_max; ++n) {
        const double g = p.epsilon * std::sqrt(n + 1.0);
        h(product_index(p, 0, n), product_index(p, 1, n + 1)) = g;
        h(product_index(p, 1, n + 1), product_index(p, 0, n)) = g;
    }
    return h;
}

namespace {

double angle_for(const JCParameters& p, int n) {
    const double g = p.epsilon * std::sqrt(n + 1.0);
    const double delta = 0.5 * (p.omega - p.omega0);
    if (g == 0.0) {
        // zero-coupling limit
        return delta > 0 ? std::numbers::pi / 2 : (delta < 0 ? 0.0 : std::numbers::pi / 4);
    }
    const double r = std::hypot(delta, g);
    // delta + r without cancellation when delta < 0
    const double num = delta >= 0 ? delta + r : g * g / (r - delta);
    return std::atan2(num, g);
}

std::pair<DressedState, DressedState> manifold_pair(const JCParameters& p, int n) {
    const double g = p.epsilon * std::sqrt(n + 1.0);
    const double delta = 0.5 * (p.omega - p.omega0);
    const double r = std::hypot(delta, g);
    const double theta = angle_for(p, n);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Eigen::Index ip = product_index(p, 0, n);
    const Eigen::Index im = product_index(p, 1, n + 1);

    DressedState plus;
    plus.manifold = n + 1;
    plus.branch = Branch::Plus;
    plus.energy = (n + 0.5) * p.omega + r;
    plus.mixing_angle = theta;
    plus.vector = Vector::Zero(p.dim());
    plus.vector(ip) = c;
    plus.vector(im) = s;

    DressedState minus = plus;
    minus.branch = Branch::Minus;
    minus.energy = (n + 0.5) * p.omega - r;
    minus.vector = Vector::Zero(p.dim());
    minus.vector(ip) = -s;
    minus.vector(im) = c;
    return {plus, minus};
}

}  // namespace

double mixing_angle(const JCParameters& p, int n) {
    return dressed_states(p, n).first.mixing_angle;
}

std::pair<DressedState, DressedState> dressed_states(const JCParameters& p, int n) {
    p.validate();
    if (n < 0 || n >= p.n_max) {
        throw InvalidArgument("dressed_states: manifold index outside the truncation");
    }
    if (p.epsilon * std::sqrt(n + 1.0) < 1e-14) {
        throw DegenerateCoupling("dressed_states: coupling vanishes, mixing angle undefined");
    }
    return manifold_pair(p, n);
}

std::vector<DressedState> dressed_basis_states(const JCParameters& p) {
    p.validate();
    std::vector<DressedState> out;
    DressedState ground;
    ground.manifold = 0;
    ground.branch = Branch::Minus;
    ground.energy = -0.5 * p.omega0;
    ground.vector = Vector::Zero(p.dim());
    ground.vector(product_index(p, 1, 0)) = 1.0;
    out.push_back(ground);
    for (int n = 0; n < p.n_max; ++n) {
        auto [plus, minus] = manifold_pair(p, n);
        out.push_back(plus);
        out.push_back(minus);
    }
    DressedState top;
    top.manifold = p.n_max + 1;
    top.branch = Branch::Plus;
    top.energy = 0.5 * p.omega0 + p.n_max * p.omega;
    top.vector = Vector::Zero(p.dim());
    top.vector(product_index(p, 0, p.n_max)) = 1.0;
    out.push_back(top);
    return out;
}

Matrix dressed_basis(const JCParameters& p) {
    const std::vector<DressedState> states = dressed_basis_states(p);
    Matrix b(p.dim(), p.dim());
    for (std::size_t k = 0; k < states.size(); ++k) {
        b.col(k) = states[k].vector;
    }
    return b;
}

DressedNoiseSpec DressedNoiseSpec::uniform(const JCParameters& p, double gamma) {
    if (!(gamma >= 0.0)) {
        throw InvalidArgument("DressedNoiseSpec: rates must be non-negative");
    }
    const std::vector<DressedState> states = dressed_basis_states(p);
    DressedNoiseSpec spec;
    spec.rates = RealVector::Constant(p.dim(), gamma);
    spec.frequencies.resize(p.dim());
    for (std::size_t k = 0; k < states.size(); ++k) {
        spec.frequencies(k) = states[k].energy;
    }
    return spec;
}

double DressedNoiseSpec::slowest_time() const {
    double slowest = 0.0;
    for (Eigen::Index i = 0; i < rates.size(); ++i) {
        for (Eigen::Index j = i + 1; j < rates.size(); ++j) {
            const double s = rates(i) + rates(j);
            if (s == 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            slowest = std::max(slowest, 1.0 / s);
        }
    }
    return slowest;
}

DensityMatrix jc_dressed_evolution(const JCParameters& p, const DressedNoiseSpec& noise,
                                   const DensityMatrix& rho0_dressed, double t) {
    p.validate();
    const Eigen::Index d = p.dim();
    if (rho0_dressed.dim() != d || noise.rates.size() != d || noise.frequencies.size() != d) {
        throw BasisMismatch("jc_dressed_evolution: state or noise spec does not match the truncation");
    }
    if ((noise.rates.array() < 0.0).any()) {
        throw InvalidArgument("jc_dressed_evolution: rates must be non-negative");
    }
    if (!(t >= 0.0)) {
        throw InvalidInterval("jc_dressed_evolution: t must be non-negative");
    }
    Matrix rho = rho0_dressed.matrix();
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index l = k + 1; l < d; ++l) {
            const Complex f = std::exp(Complex(-0.5 * (noise.rates(k) + noise.rates(l)) * t,
                                               -(noise.frequencies(k) - noise.frequencies(l)) * t));
            rho(k, l) *= f;
            rho(l, k) = std::conj(rho(k, l));
        }
    }
    return DensityMatrix(std::move(rho));
}

DensityMatrix to_dressed(const JCParameters& p, const DensityMatrix& rho_product) {
    if (rho_product.dim() != p.dim()) {
        throw BasisMismatch("to_dressed: state does not match the truncation");
    }
    const Matrix b = dressed_basis(p);
    Matrix r = b.adjoint() * rho_product.matrix() * b;
    return DensityMatrix(0.5 * (r + r.adjoint()));
}

DensityMatrix to_product(const JCParameters& p, const DensityMatrix& rho_dressed) {
    if (rho_dressed.dim() != p.dim()) {
        throw BasisMismatch("to_product: state does not match the truncation");
    }
    const Matrix b = dressed_basis(p);
    Matrix r = b * rho_dressed.matrix() * b.adjoint();
    return DensityMatrix(0.5 * (r + r.adjoint()));
}

DensityMatrix reduce_atom(const DensityMatrix& rho_dressed, const JCParameters& p) {
    if (rho_dressed.dim() != p.dim()) {
        throw DimensionMismatch("reduce_atom: state does not match the truncation");
    }
    return partial_trace_field(to_product(p, rho_dressed), 2, p.field_dim());
}

DensityMatrix asymptotic_atom(const JCParameters& p, int n) {
    p.validate();
    if (n < 0 || n >= p.n_max) {
        throw InvalidArgument("asymptotic_atom: photon number outside the truncation");
    }
    const double theta = angle_for(p, n);
    const double c2 = std::cos(theta) * std::cos(theta);
    const double s2 = std::sin(theta) * std::sin(theta);
    Matrix m = Matrix::Zero(2, 2);
    m(1, 1) = 2.0 * c2 * s2;
    m(0, 0) = 1.0 - m(1, 1).real();  // = c^4 + s^4
    return DensityMatrix(std::move(m));
}

DensityMatrix jc_initial_state(const JCParameters& p, int n) {
    p.validate();
    if (n < 0 || n >= p.n_max) {
        throw InvalidArgument("jc_initial_state: photon number must lie below n_max");
    }
    Vector psi = Vector::Zero(p.dim());
    psi(product_index(p, 0, n)) = 1.0;
    return DensityMatrix::pure(psi);
}

JCRun jc_full_run(const JCParameters& p, const DressedNoiseSpec& noise, int n_initial,
                  std::span<const double> grid) {
    validate_grid(grid);
    const DensityMatrix rho0 = to_dressed(p, jc_initial_state(p, n_initial));
    JCRun run;
    run.times.assign(grid.begin(), grid.end());
    auto track = [&run](const Matrix& m) {
        run.max_trace_drift = std::max(run.max_trace_drift, std::abs(m.trace() - 1.0));
        run.max_hermiticity = std::max(run.max_hermiticity, hermiticity_residual(m));
    };
    track(rho0.matrix());
    for (double t : grid) {
        const DensityMatrix dressed = jc_dressed_evolution(p, noise, rho0, t);
        track(dressed.matrix());
        const DensityMatrix product = to_product(p, dressed);
        track(product.matrix());
        run.boundary_population = std::max(
            run.boundary_population,
            std::abs(product(product_index(p, 0, p.n_max), product_index(p, 0, p.n_max))) +
                std::abs(product(product_index(p, 1, p.n_max), product_index(p, 1, p.n_max))));
        DensityMatrix atom = partial_trace_field(product, 2, p.field_dim());
        track(atom.matrix());
        run.atom.push_back(std::move(atom));
    }
    return run;
}

}  // namespace qstoch
