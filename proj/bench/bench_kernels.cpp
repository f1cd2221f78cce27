// Wall-clock comparison of the OpenMP kernels against their serial references.
//   bench_kernels [trajectories] [repeats]

#include "qstoch/evolution.hpp"
#include "qstoch/preferred_basis.hpp"
#include "qstoch/reference/serial.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double best_of(int repeats, const std::function<void()>& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace qstoch;
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("threads: %d\n", threads);

    const StochasticModel model = two_level_model(1.0, {CouplingTerm::stationary(1, 0, 1.0, 1.0)});
    const DensityMatrix rho0(two_level_hamiltonian(0.5) + Matrix::Identity(2, 2) * 0.5);
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(0.25 * k);

    double diff = 0.0;
    const double serial = best_of(repeats, [&] { reference::ensemble_density(model, rho0, grid, n, 7); });
    const double parallel = best_of(repeats, [&] { ensemble_density(model, rho0, grid, n, 7); });
    {
        const auto a = reference::ensemble_density(model, rho0, grid, n, 7);
        const auto b = ensemble_density(model, rho0, grid, n, 7);
        for (std::size_t k = 0; k < grid.size(); ++k) diff = std::max(diff, max_abs(a.mean_density[k] - b.mean_density[k]));
    }
    std::printf("ensemble_density  N=%zu points=%zu  serial %.4fs  parallel %.4fs  speedup %.2fx  max diff %.1e\n",
                n, grid.size(), serial, parallel, serial / parallel, diff);

    Matrix h(2, 2);
    h << 0.3, Complex(0.7, -0.2), Complex(0.7, 0.2), -0.4;
    const double s_scan = best_of(repeats, [&] { reference::preferred_basis_scan(h, {}); });
    const double p_scan = best_of(repeats, [&] { preferred_basis_scan(h, {}); });
    std::printf("preferred_basis_scan 181x181  serial %.4fs  parallel %.4fs  speedup %.2fx\n", s_scan, p_scan,
                s_scan / p_scan);
    return 0;
}
