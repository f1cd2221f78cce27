#pragma once

// Single-mode Jaynes-Cummings atom coupled to the vacuum through
// energy-preserving noise on the dressed states.
//
// Product basis |a, m>, atom-major: index = a * (n_max + 1) + m with a = 0 for
// the excited level |+> and a = 1 for |->.
//
// Dressed basis ordering:
//   0          |u_0^->  = |-, 0>
//   1 + 2n     |u_{n+1}^+>   (0 <= n < n_max)
//   2 + 2n     |u_{n+1}^->
//   2 n_max+1  |+, n_max>, whose partner |-, n_max+1> lies outside the truncation

#include "qstoch/linalg.hpp"

#include <span>
#include <utility>
#include <vector>

namespace qstoch {

struct JCParameters {
    double omega0 = 1.0;
    double omega = 1.0;
    double epsilon = 0.1;
    int n_max = 8;

    Eigen::Index field_dim() const noexcept { return n_max + 1; }
    Eigen::Index dim() const noexcept { return 2 * (n_max + 1); }

    // epsilon >= 0, n_max >= 1, finite frequencies.
    void validate() const;
};

Eigen::Index product_index(const JCParameters& p, int atom, int photons);

Matrix jc_hamiltonian(const JCParameters& p);

enum class Branch { Plus, Minus };

struct DressedState {
    int manifold = 0;  // excitation number: n + 1 for u_{n+1}, 0 for u_0
    Branch branch = Branch::Minus;
    double energy = 0.0;
    double mixing_angle = 0.0;
    Vector vector;  // product-basis coefficients
};

// (u_{n+1}^+, u_{n+1}^-) for 0 <= n < n_max. Throws DegenerateCoupling when
// epsilon sqrt(n+1) < 1e-14 and InvalidArgument for n out of range.
std::pair<DressedState, DressedState> dressed_states(const JCParameters& p, int n);

double mixing_angle(const JCParameters& p, int n);

// All dressed states in the ordering above. epsilon = 0 falls back to the
// bare states.
std::vector<DressedState> dressed_basis_states(const JCParameters& p);

// Columns are the dressed states in product coordinates.
Matrix dressed_basis(const JCParameters& p);

struct DressedNoiseSpec {
    RealVector rates;        // gamma per dressed state
    RealVector frequencies;  // omega per dressed state, the phases of lambda(t)

    // Same rate for every state, frequencies equal to the dressed energies.
    static DressedNoiseSpec uniform(const JCParameters& p, double gamma);

    // max over pairs of 1 / (gamma_i + gamma_j); infinite if two rates vanish
    double slowest_time() const;
};

DensityMatrix jc_dressed_evolution(const JCParameters& p, const DressedNoiseSpec& noise,
                                   const DensityMatrix& rho0_dressed, double t);

DensityMatrix to_dressed(const JCParameters& p, const DensityMatrix& rho_product);
DensityMatrix to_product(const JCParameters& p, const DensityMatrix& rho_dressed);

// Atom factor of a dressed-basis state.
DensityMatrix reduce_atom(const DensityMatrix& rho_dressed, const JCParameters& p);

// Long-time atom state for the excited atom with n photons:
// diag(cos^4 + sin^4, 2 cos^2 sin^2) of the mixing angle theta_{n+1}.
DensityMatrix asymptotic_atom(const JCParameters& p, int n);

// |+, n><+, n| in the product basis; needs n < n_max.
DensityMatrix jc_initial_state(const JCParameters& p, int n);

struct JCRun {
    std::vector<double> times;
    std::vector<DensityMatrix> atom;
    double max_trace_drift = 0.0;         // |tr rho - 1| over all stages and times
    double max_hermiticity = 0.0;
    double boundary_population = 0.0;     // population on field level n_max
};

JCRun jc_full_run(const JCParameters& p, const DressedNoiseSpec& noise, int n_initial,
                  std::span<const double> grid);

}  // namespace qstoch
