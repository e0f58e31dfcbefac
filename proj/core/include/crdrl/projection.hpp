#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "crdrl/staircase.hpp"

namespace crdrl {

struct ProjectionResult {
    QuantileVector thetas;       // theta*_i = F^{-1}((tau_{i-1} + tau_i) / 2)
    std::vector<double> levels;  // tau_i = i / N, i = 0..N
};

using InverseCdf = std::function<double(double omega)>;

/// Projection of an arbitrary distribution onto N uniform quantile levels:
/// evaluates the inverse CDF at the level midpoints (2i - 1) / 2N. This
/// minimizes the Cramér (l_p, p > 1) distance and coincides with the
/// 1-Wasserstein projection.
ProjectionResult project_midpoints(const InverseCdf& inverse_cdf, std::size_t n);
ProjectionResult project_midpoints(const DiracMixture& target, std::size_t n);
ProjectionResult project_midpoints(const StaircaseCdf& target, std::size_t n);

struct OptimalityReport {
    double base_distance = 0.0;          // l2^2(projection, target)
    double min_perturbed_distance = 0.0;  // smallest l2^2 over all perturbations
    std::size_t trials = 0;
    std::size_t violations = 0;  // perturbations with l2^2 < base - 1e-12
    bool locally_optimal() const noexcept { return violations == 0; }
};

struct PerturbationConfig {
    std::size_t trials = 200;                  // per scale
    std::vector<double> scales{1e-3, 1e-2, 1e-1};
    std::uint64_t seed = 0x5eed;
};

/// Random sup-norm-bounded perturbations of the projected atoms never lower
/// the squared Cramér distance to the target.
OptimalityReport verify_local_optimality(const DiracMixture& target, const ProjectionResult& proj,
                                         const PerturbationConfig& config = {});

struct GridArgmin {
    std::vector<double> cramer_argmin;  // first minimizer in lexicographic grid order
    double cramer_min = 0.0;
    std::vector<std::vector<double>> cramer_argmin_set;  // every grid point within 1e-12 of min
    std::vector<double> qr_argmin;
    double qr_min = 0.0;
    std::vector<double> grid;  // 1-D grid used on every axis
};

struct GridConfig {
    double resolution = 1e-2;
    double padding = 0.1;  // fraction of the atom span added on each side
};

/// Exhaustive search over grid^N (N <= 3) for the minimizers of the squared
/// Cramér distance and of the QR loss against a Dirac mixture.
GridArgmin grid_argmin_check(const DiracMixture& target, std::size_t n,
                             const GridConfig& config = {});

/// sum_i E_{Z ~ m} rho_{tau_hat_i}(Z - theta_i), theta_i paired with tau_hat_i.
double qr_loss_vs_mixture(std::span<const double> theta, const DiracMixture& m);

}  // namespace crdrl
