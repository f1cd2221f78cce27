#include "qstoch/model.hpp"

#include "qstoch/errors.hpp"

#include <cmath>

namespace qstoch {

CouplingTerm CouplingTerm::stationary(Eigen::Index row, Eigen::Index col, double gamma,
                                      double omega0, double a_kk) {
    CouplingTerm c;
    c.row = row;
    c.col = col;
    c.rate = gamma;
    c.frequency = omega0;
    // level 0 carries +omega0, level 1 carries -omega0
    c.phase = col == 0 ? Phase::Negative : Phase::Positive;
    c.decay = a_kk * gamma;
    return c;
}

CouplingTerm CouplingTerm::constant(Eigen::Index row, Eigen::Index col, double gamma) {
    CouplingTerm c;
    c.row = row;
    c.col = col;
    c.rate = gamma;
    c.frequency = 0.0;
    c.decay = 0.0;
    return c;
}

CouplingTerm CouplingTerm::from_label(std::string_view label, double gamma, double omega0,
                                      double a_kk) {
    if (label.size() != 3 || (label[0] != 'E' && label[0] != 'e') || label[1] < '1' ||
        label[1] > '2' || label[2] < '1' || label[2] > '2') {
        throw InvalidArgument("unknown coupling label '" + std::string(label) +
                              "' (expected E11, E12, E21 or E22)");
    }
    return stationary(label[1] - '1', label[2] - '1', gamma, omega0, a_kk);
}

Complex CouplingTerm::amplitude(double t) const {
    if (profile) {
        return profile(t);
    }
    return std::sqrt(rate) * std::exp(Complex(-0.5 * decay * t, -phase_sign() * frequency * t));
}

std::string CouplingTerm::label() const {
    return "E" + std::to_string(row + 1) + std::to_string(col + 1);
}

NoiseModel NoiseModel::independent(Eigen::Index n, std::uint64_t seed) {
    return NoiseModel{Matrix::Identity(n, n), seed};
}

void NoiseModel::validate() const {
    if (covariance.rows() != covariance.cols()) {
        throw DimensionMismatch("NoiseModel: covariance must be square");
    }
    if (covariance.size() == 0) {
        return;
    }
    if (hermiticity_residual(covariance) > 1e-12) {
        throw NotHermitian("NoiseModel: covariance is not Hermitian");
    }
    for (Eigen::Index k = 0; k < covariance.rows(); ++k) {
        if (covariance(k, k).real() < 0.0) {
            throw NotPositive("NoiseModel: negative variance a_kk", covariance(k, k).real());
        }
    }
    const double lowest = min_eigenvalue(covariance);
    if (lowest < -1e-12) {
        throw NotPositive("NoiseModel: covariance is not positive semidefinite", lowest);
    }
}

void StochasticModel::validate() const {
    if (hamiltonian.rows() < 1 || hamiltonian.rows() != hamiltonian.cols()) {
        throw DimensionMismatch("StochasticModel: Hamiltonian must be square and non-empty");
    }
    if (hermiticity_residual(hamiltonian) > 1e-10 * std::max(1.0, max_abs(hamiltonian))) {
        throw NotHermitian("StochasticModel: Hamiltonian is not Hermitian");
    }
    if (static_cast<Eigen::Index>(couplings.size()) != noise.num_processes()) {
        throw DimensionMismatch("StochasticModel: " + std::to_string(couplings.size()) +
                                " couplings but " + std::to_string(noise.num_processes()) +
                                " noise processes");
    }
    noise.validate();
    for (const CouplingTerm& c : couplings) {
        if (c.row < 0 || c.col < 0 || c.row >= dim() || c.col >= dim()) {
            throw InvalidArgument("StochasticModel: coupling " + c.label() +
                                  " addresses a level outside the system");
        }
        if (!(c.rate > 0.0)) {
            throw InvalidArgument("StochasticModel: coupling rate must be positive");
        }
    }
}

Matrix two_level_hamiltonian(double omega0) {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = omega0;
    h(1, 1) = -omega0;
    return h;
}

StochasticModel two_level_model(double omega0, std::vector<CouplingTerm> couplings,
                                Matrix covariance) {
    const auto n = static_cast<Eigen::Index>(couplings.size());
    if (covariance.size() == 0) {
        covariance = Matrix::Identity(n, n);
    }
    StochasticModel model{two_level_hamiltonian(omega0), std::move(couplings),
                          NoiseModel{std::move(covariance), 0}};
    model.validate();
    return model;
}

}  // namespace qstoch
