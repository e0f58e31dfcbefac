#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <stdexcept>
#include <vector>

#include "crdrl/staircase.hpp"

namespace crdrl {

/// Merged grid of two equal-size staircases and the CDF difference F - F̄ on
/// each of the 2N - 1 intervals between consecutive boundaries.
struct MergedProfile {
    std::vector<double> boundaries;  // 2N values, nondecreasing
    std::vector<double> deltas;      // 2N - 1 values, multiples of 1/N in [-1, 1]
};

/// Stable merge of both inputs (left first on ties); deltas accumulate +1/N
/// for each left boundary and -1/N for each right boundary.
MergedProfile merged_profile(std::span<const double> left, std::span<const double> right);

/// Squared Cramér distance  ∫ (F - F̄)^2 dz  by sorting the merged quantiles.
/// Inputs need not be sorted; O(N log N).
double cramer_sorted(std::span<const double> left, std::span<const double> right);
double cramer_sorted(const QuantileVector& left, const QuantileVector& right);

/// The same quantity from the pairwise closed form over sorted inputs; O(N^2).
/// Kept as an independent oracle for cramer_sorted.
double cramer_quadratic(const StaircaseCdf& left, const StaircaseCdf& right);
double cramer_quadratic_sorted(std::span<const double> left_sorted,
                               std::span<const double> right_sorted);

enum class WassersteinOrder { one, infinity };

/// d_1 or d_inf between two equal-N uniform staircases (sorted pairing).
double wasserstein_p(const QuantileVector& left, const QuantileVector& right,
                     WassersteinOrder order);
double wasserstein_sorted(std::span<const double> left_sorted,
                          std::span<const double> right_sorted, WassersteinOrder order);

/// Exact d_1 between a uniform staircase and an arbitrary Dirac mixture, by
/// integrating |F_q^{-1} - F_m^{-1}| over the union of both level partitions.
double wasserstein_1_vs_mixture(const QuantileVector& q, const DiracMixture& m);

/// Exact ∫ (F_q - F_m)^2 dz between a uniform staircase and a Dirac mixture.
double cramer_vs_mixture(std::span<const double> q, const DiracMixture& m);

/// Anything exposing a right-continuous step CDF with finitely many jumps.
template <class T>
concept StepCdf = requires(const T& f, double z) {
    { f.cdf(z) } -> std::convertible_to<double>;
    f.jump_points();
};

/// Interval assumed to contain every jump of both CDFs.
struct IntegrationSpan {
    double lo;
    double hi;
};

/// ∫ |F - G|^p dz, summed exactly over the pieces between consecutive jumps.
template <StepCdf F, StepCdf G>
double lp_power_numeric(const F& f, const G& g, double p, IntegrationSpan span) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_numeric: p must be >= 1");
    if (!(span.lo <= span.hi)) throw std::invalid_argument("lp_numeric: empty span");
    std::vector<double> knots;
    for (double z : f.jump_points()) knots.push_back(z);
    for (double z : g.jump_points()) knots.push_back(z);
    for (double z : knots) {
        if (z < span.lo || z > span.hi) {
            throw std::invalid_argument("lp_numeric: a jump lies outside the integration span");
        }
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double gap = std::abs(f.cdf(knots[k]) - g.cdf(knots[k]));
        if (gap > 0.0) total += (knots[k + 1] - knots[k]) * std::pow(gap, p);
    }
    return total;
}

/// ( ∫ |F - G|^p dz )^{1/p}.
template <StepCdf F, StepCdf G>
double lp_numeric(const F& f, const G& g, double p, IntegrationSpan span) {
    return std::pow(lp_power_numeric(f, g, p, span), 1.0 / p);
}

}  // namespace crdrl
