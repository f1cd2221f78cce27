#pragma once

// Lindblad generator, memory term, an RK4 master-equation integrator and the
// catalogue of admissible one- and two-coupling vacuum models on two levels.

#include "qstoch/evolution.hpp"
#include "qstoch/linalg.hpp"
#include "qstoch/model.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qstoch {

struct LindbladOperator {
    Matrix matrix;
    const CouplingTerm* source = nullptr;  // points into the model it came from
};

// v_k(t) E[U]^{-1}(t). Throws Singular when (I - K(t))^{1/2} has an eigenvalue
// below 1e-14.
Matrix lindblad_from_coupling(const StochasticModel& model, std::size_t k, double t);

std::vector<LindbladOperator> lindblad_operators(const StochasticModel& model, double t);
std::vector<Matrix> lindblad_matrices(const StochasticModel& model, double t);

// -i[H, X] + 1/2 sum_nm a_nm ([l_n X, l_m^dagger] + [l_n, X l_m^dagger])
Matrix generator_apply(const Matrix& h, std::span<const Matrix> lindblads, const Matrix& a,
                       const Matrix& x);

// -L_t[ sum_nm a_nm int_0^t v_n rho0 v_m^dagger ds ], with L_t built from the
// time-dependent operators l_n(t) of the model.
Matrix memory_term(const StochasticModel& model, const Matrix& rho0, double t);

struct MasterTrajectory {
    std::vector<double> times;
    std::vector<Matrix> states;
};

// Fixed-step RK4 for d rho/dt = L[rho]. States are recorded at the grid
// times; between grid points the step is the largest h <= dt that divides the
// interval evenly.
MasterTrajectory integrate_master(const Matrix& h, std::span<const Matrix> lindblads,
                                  const Matrix& a, const Matrix& rho0,
                                  std::span<const double> grid, double dt = 1e-3);

// Records every step on [0, t_end].
MasterTrajectory integrate_master(const Matrix& h, std::span<const Matrix> lindblads,
                                  const Matrix& a, const Matrix& rho0, double t_end,
                                  double dt = 1e-3);

enum class Verdict {
    MarkovianStationary,
    NonMarkovian,
    TimeDependentLindblad,
    DoubleCouplingSameLevel,
    CorrelationForbidden,
};

std::string_view to_string(Verdict v) noexcept;

struct AdmissibilityReport {
    Verdict verdict = Verdict::MarkovianStationary;
    std::string details;
    double memory_norm = 0.0;          // max |memory_term| over probe states and times
    double lindblad_variation = 0.0;   // max |l(t) - l(0)| over probe times
    bool window_violated = false;      // E[U] undefined at some probe time
    bool confirmed = false;            // numeric evidence agrees with the verdict
    std::vector<Matrix> lindblads;     // l_n(0), filled when the verdict is Markovian
};

// Two-level catalogue. Rules, first match wins:
//  1. two couplings leaving the same level (same column)  -> DoubleCouplingSameLevel
//  2. the pair E12, E21                                    -> NonMarkovian
//  3. correlated Wiener processes (a_nm != 0, n != m)      -> CorrelationForbidden
//  4. decay or phase not matched to the level energy       -> TimeDependentLindblad
// Every verdict is backed by evaluating the memory term on a spanning set of
// states and the drift of l_n(t); a structurally stationary model whose memory
// term does not vanish is reported non-Markovian.
AdmissibilityReport classify_couplings(const StochasticModel& model);

// Re tr(H L[rho])
double energy_derivative(const Matrix& h, std::span<const Matrix> lindblads, const Matrix& a,
                         const Matrix& rho);

// diag(1,0), diag(0,1), (I + sigma_x)/2, (I + sigma_y)/2
std::vector<Matrix> spanning_density_set();

}  // namespace qstoch
