#include "crdrl/projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "crdrl/losses.hpp"
#include "crdrl/metrics.hpp"

namespace crdrl {

ProjectionResult project_midpoints(const InverseCdf& inverse_cdf, std::size_t n) {
    if (n == 0) throw std::invalid_argument("project_midpoints: n must be positive");
    const auto tau_hat = quantile_midpoints(n);
    std::vector<double> thetas(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        try {
            v = inverse_cdf(tau_hat[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("project_midpoints: inverse CDF failed at level " +
                                     std::to_string(tau_hat[i]) + ": " + e.what());
        }
        if (!std::isfinite(v)) {
            throw std::runtime_error("project_midpoints: inverse CDF is not finite at level " +
                                     std::to_string(tau_hat[i]));
        }
        thetas[i] = v;
    }
    ProjectionResult out{QuantileVector(std::move(thetas)), std::vector<double>(n + 1)};
    for (std::size_t i = 0; i <= n; ++i) {
        out.levels[i] = static_cast<double>(i) / static_cast<double>(n);
    }
    return out;
}

ProjectionResult project_midpoints(const DiracMixture& target, std::size_t n) {
    return project_midpoints([&](double w) { return target.inverse_cdf(w); }, n);
}

ProjectionResult project_midpoints(const StaircaseCdf& target, std::size_t n) {
    return project_midpoints([&](double w) { return target.inverse_cdf(w); }, n);
}

double qr_loss_vs_mixture(std::span<const double> theta, const DiracMixture& m) {
    const auto tau = quantile_midpoints(theta.size());
    double total = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        for (const auto& atom : m.atoms()) {
            const double u = atom.location - theta[i];
            total += atom.weight * u * (tau[i] - (u < 0.0 ? 1.0 : 0.0));
        }
    }
    return total;
}

OptimalityReport verify_local_optimality(const DiracMixture& target, const ProjectionResult& proj,
                                         const PerturbationConfig& config) {
    OptimalityReport report;
    report.base_distance = cramer_vs_mixture(proj.thetas.values(), target);
    report.min_perturbed_distance = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(config.seed);
    std::vector<double> x(proj.thetas.size());
    for (double scale : config.scales) {
        std::uniform_real_distribution<double> noise(-scale, scale);
        for (std::size_t t = 0; t < config.trials; ++t) {
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = proj.thetas[i] + noise(rng);
            const double d = cramer_vs_mixture(x, target);
            report.min_perturbed_distance = std::min(report.min_perturbed_distance, d);
            if (d < report.base_distance - 1e-12) ++report.violations;
            ++report.trials;
        }
    }
    return report;
}

namespace {

// Cramér distance for n <= 3 without heap traffic; the grid search calls this
// millions of times.
double small_cramer(std::array<double, 3> th, std::size_t n, std::span<const DiracAtom> atoms) {
    std::sort(th.begin(), th.begin() + static_cast<std::ptrdiff_t>(n));
    const double step = 1.0 / static_cast<double>(n);
    double diff = 0.0, prev = 0.0, total = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n || j < atoms.size()) {
        const bool take_left = j == atoms.size() || (i < n && th[i] <= atoms[j].location);
        const double z = take_left ? th[i] : atoms[j].location;
        if (diff != 0.0) total += (z - prev) * diff * diff;
        diff += take_left ? step : -atoms[j].weight;
        take_left ? ++i : ++j;
        prev = z;
    }
    return total;
}

}  // namespace

GridArgmin grid_argmin_check(const DiracMixture& target, std::size_t n, const GridConfig& config) {
    if (n == 0 || n > 3) throw std::invalid_argument("grid_argmin_check: n must be in 1..3");
    if (!(config.resolution > 0.0)) {
        throw std::invalid_argument("grid_argmin_check: resolution must be positive");
    }
    const auto atoms = target.atoms();
    const double lo_atom = atoms.front().location;
    const double hi_atom = atoms.back().location;
    const double pad = config.padding * std::max(hi_atom - lo_atom, 1.0);
    // Anchor the grid on the lowest atom so it is hit exactly.
    const auto below = static_cast<long>(std::floor(pad / config.resolution));
    const auto above = static_cast<long>(std::ceil((hi_atom - lo_atom + pad) / config.resolution));

    GridArgmin out;
    for (long k = -below; k <= above; ++k) {
        out.grid.push_back(lo_atom + static_cast<double>(k) * config.resolution);
    }
    const std::size_t g = out.grid.size();
    std::size_t total = 1;
    for (std::size_t d = 0; d < n; ++d) total *= g;

    const auto tau = quantile_midpoints(n);
    out.cramer_min = std::numeric_limits<double>::infinity();
    out.qr_min = std::numeric_limits<double>::infinity();
    std::size_t cramer_best = 0, qr_best = 0;

    std::array<double, 3> th{};
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        for (std::size_t d = n; d-- > 0;) {
            th[d] = out.grid[rest % g];
            rest /= g;
        }
        const double c = small_cramer(th, n, atoms);
        if (c < out.cramer_min) {
            out.cramer_min = c;
            cramer_best = flat;
        }
        double qr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& atom : atoms) {
                const double u = atom.location - th[i];
                qr += atom.weight * u * (tau[i] - (u < 0.0 ? 1.0 : 0.0));
            }
        }
        if (qr < out.qr_min) {
            out.qr_min = qr;
            qr_best = flat;
        }
    }

    auto decode = [&](std::size_t flat) {
        std::vector<double> v(n);
        for (std::size_t d = n; d-- > 0;) {
            v[d] = out.grid[flat % g];
            flat /= g;
        }
        return v;
    };
    out.cramer_argmin = decode(cramer_best);
    out.qr_argmin = decode(qr_best);
    // Second pass instead of storing grid^N values.
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        for (std::size_t d = n; d-- > 0;) {
            th[d] = out.grid[rest % g];
            rest /= g;
        }
        if (small_cramer(th, n, atoms) <= out.cramer_min + 1e-12) {
            out.cramer_argmin_set.push_back(decode(flat));
        }
    }
    return out;
}

}  // namespace crdrl
