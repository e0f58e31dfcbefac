#include "crdrl/metrics.hpp"

#include <string>

namespace crdrl {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": sizes differ (" + std::to_string(a) +
                                    " vs " + std::to_string(b) + ")");
    }
    if (a == 0) throw std::invalid_argument(std::string(what) + ": empty input");
}

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
    }
}

std::vector<double> sorted_copy(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

MergedProfile merged_profile(std::span<const double> left, std::span<const double> right) {
    require_same_size(left.size(), right.size(), "merged_profile");
    require_finite(left, "merged_profile");
    require_finite(right, "merged_profile");
    const auto a = sorted_copy(left);
    const auto b = sorted_copy(right);
    const std::size_t n = a.size();
    const double step = 1.0 / static_cast<double>(n);

    MergedProfile out;
    out.boundaries.reserve(2 * n);
    out.deltas.reserve(2 * n - 1);
    double running = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n || j < n) {
        const bool take_left = j == n || (i < n && a[i] <= b[j]);
        out.boundaries.push_back(take_left ? a[i++] : b[j++]);
        running += take_left ? step : -step;
        if (out.boundaries.size() < 2 * n) out.deltas.push_back(running);
    }
    return out;
}

double cramer_sorted(std::span<const double> left, std::span<const double> right) {
    require_same_size(left.size(), right.size(), "cramer_sorted");
    require_finite(left, "cramer_sorted");
    require_finite(right, "cramer_sorted");
    const auto a = sorted_copy(left);
    const auto b = sorted_copy(right);
    const std::size_t n = a.size();

    // Integer count difference F - F̄ (in units of 1/N) between consecutive
    // merged boundaries; zero-width intervals from ties contribute nothing.
    long long diff = 0;
    double total = 0.0;
    double prev = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n || j < n) {
        const bool take_left = j == n || (i < n && a[i] <= b[j]);
        const double z = take_left ? a[i++] : b[j++];
        if (diff != 0) total += (z - prev) * static_cast<double>(diff * diff);
        diff += take_left ? 1 : -1;
        prev = z;
    }
    const auto nn = static_cast<double>(n);
    return total / (nn * nn);
}

double cramer_sorted(const QuantileVector& left, const QuantileVector& right) {
    return cramer_sorted(left.values(), right.values());
}

double cramer_quadratic_sorted(std::span<const double> theta, std::span<const double> target) {
    require_same_size(theta.size(), target.size(), "cramer_quadratic");
    const std::size_t n = theta.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = std::abs(target[i] - theta[i]);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double u = target[j] - theta[i];
            const bool negative = u < 0.0;
            if (j > i ? negative : !negative) row += 2.0 * std::abs(u);
        }
        total += row;
    }
    const auto nn = static_cast<double>(n);
    return total / (nn * nn);
}

double cramer_quadratic(const StaircaseCdf& left, const StaircaseCdf& right) {
    return cramer_quadratic_sorted(left.sorted_values(), right.sorted_values());
}

double wasserstein_sorted(std::span<const double> a, std::span<const double> b,
                          WassersteinOrder order) {
    require_same_size(a.size(), b.size(), "wasserstein_p");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double gap = std::abs(a[i] - b[i]);
        acc = order == WassersteinOrder::one ? acc + gap : std::max(acc, gap);
    }
    return order == WassersteinOrder::one ? acc / static_cast<double>(a.size()) : acc;
}

double wasserstein_p(const QuantileVector& left, const QuantileVector& right,
                     WassersteinOrder order) {
    require_same_size(left.size(), right.size(), "wasserstein_p");
    const auto a = sorted_copy(left.values());
    const auto b = sorted_copy(right.values());
    return wasserstein_sorted(a, b, order);
}

double wasserstein_1_vs_mixture(const QuantileVector& q, const DiracMixture& m) {
    const auto cdf = make_cdf(q);
    const std::size_t n = q.size();
    std::vector<double> levels;
    levels.reserve(n + m.size() + 1);
    levels.push_back(0.0);
    for (std::size_t k = 1; k <= n; ++k) levels.push_back(cdf.level(k));
    double acc = 0.0;
    for (const auto& atom : m.atoms()) {
        acc += atom.weight;
        levels.push_back(std::min(acc, 1.0));
    }
    std::sort(levels.begin(), levels.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        const double lo = levels[k], hi = levels[k + 1];
        if (!(hi > lo)) continue;
        const double mid = 0.5 * (lo + hi);
        total += (hi - lo) * std::abs(cdf.inverse_cdf(mid) - m.inverse_cdf(mid));
    }
    return total;
}

double cramer_vs_mixture(std::span<const double> q, const DiracMixture& m) {
    if (q.empty()) throw std::invalid_argument("cramer_vs_mixture: empty input");
    const auto a = sorted_copy(q);
    const auto atoms = m.atoms();
    const double step = 1.0 / static_cast<double>(a.size());
    double diff = 0.0;  // F_q - F_m just right of prev
    double prev = 0.0;
    double total = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < atoms.size()) {
        const bool take_left = j == atoms.size() || (i < a.size() && a[i] <= atoms[j].location);
        const double z = take_left ? a[i] : atoms[j].location;
        if (diff != 0.0) total += (z - prev) * diff * diff;
        diff += take_left ? step : -atoms[j].weight;
        take_left ? ++i : ++j;
        prev = z;
    }
    return total;
}

}  // namespace crdrl
