#include "crdrl/staircase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace crdrl {

namespace {

void require_level(double omega) {
    if (!(omega > 0.0 && omega <= 1.0)) {
        throw std::invalid_argument("quantile level must lie in (0, 1], got " +
                                    std::to_string(omega));
    }
}

// Cumulative weights of a mixture are sums of rounded products; a level that
// should coincide with a cumulative weight may miss it by a few ulps.
constexpr double kLevelSlack = 4 * std::numeric_limits<double>::epsilon();

}  // namespace

QuantileVector::QuantileVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw std::invalid_argument("QuantileVector needs at least one value");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw std::invalid_argument("QuantileVector value " + std::to_string(i) +
                                        " is not finite");
        }
    }
}

QuantileVector QuantileVector::constant(std::size_t n, double value) {
    return QuantileVector(std::vector<double>(n, value));
}

StaircaseCdf make_cdf(const QuantileVector& q) {
    if (q.empty()) throw std::invalid_argument("make_cdf: empty QuantileVector");
    std::vector<double> sorted(q.begin(), q.end());
    std::stable_sort(sorted.begin(), sorted.end());
    return StaircaseCdf(std::move(sorted));
}

double StaircaseCdf::cdf(double z) const {
    const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), z) - sorted_.begin();
    return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double StaircaseCdf::inverse_cdf(double omega) const {
    require_level(omega);
    const auto n = static_cast<double>(sorted_.size());
    // Smallest k with k/N >= omega, using the same k/N levels that cdf() reports.
    auto k = static_cast<std::size_t>(std::ceil(omega * n));
    k = std::clamp<std::size_t>(k, 1, sorted_.size());
    while (k > 1 && static_cast<double>(k - 1) / n >= omega) --k;
    while (k < sorted_.size() && static_cast<double>(k) / n < omega) ++k;
    return sorted_[k - 1];
}

double cdf_eval(const StaircaseCdf& c, double z) { return c.cdf(z); }
double inverse_cdf(const StaircaseCdf& c, double omega) { return c.inverse_cdf(omega); }

DiracMixture::DiracMixture(std::vector<DiracAtom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("DiracMixture needs at least one atom");
    for (const auto& a : atoms) {
        if (!std::isfinite(a.location)) {
            throw std::invalid_argument("DiracMixture location is not finite");
        }
        if (!std::isfinite(a.weight) || a.weight <= 0.0) {
            throw std::invalid_argument("DiracMixture weights must be positive and finite");
        }
    }
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const DiracAtom& a, const DiracAtom& b) { return a.location < b.location; });
    atoms_.reserve(atoms.size());
    for (const auto& a : atoms) {
        if (!atoms_.empty() && atoms_.back().location == a.location) {
            atoms_.back().weight += a.weight;
        } else {
            atoms_.push_back(a);
        }
    }
    if (std::abs(total_weight() - 1.0) > 1e-12) {
        throw std::invalid_argument("DiracMixture weights sum to " +
                                    std::to_string(total_weight()) + ", expected 1");
    }
}

DiracMixture DiracMixture::dropping_zero_weights(std::vector<DiracAtom> atoms) {
    std::erase_if(atoms, [](const DiracAtom& a) { return a.weight == 0.0; });
    return DiracMixture(std::move(atoms));
}

DiracMixture DiracMixture::uniform(const QuantileVector& q) {
    if (q.empty()) throw std::invalid_argument("DiracMixture::uniform: empty input");
    const double w = 1.0 / static_cast<double>(q.size());
    std::vector<DiracAtom> atoms;
    atoms.reserve(q.size());
    for (double v : q) atoms.push_back({v, w});
    // Merging N weights of 1/N can drift from 1 by ~N ulps; that is far
    // inside the 1e-12 tolerance for any N we handle.
    return DiracMixture(std::move(atoms));
}

double DiracMixture::total_weight() const noexcept {
    double total = 0.0;
    for (const auto& a : atoms_) total += a.weight;
    return total;
}

double DiracMixture::cdf(double z) const {
    double acc = 0.0;
    for (const auto& a : atoms_) {
        if (a.location > z) break;
        acc += a.weight;
    }
    return std::min(acc, 1.0);
}

double DiracMixture::inverse_cdf(double omega) const {
    require_level(omega);
    if (atoms_.empty()) throw std::logic_error("inverse_cdf on an empty DiracMixture");
    double acc = 0.0;
    for (const auto& a : atoms_) {
        acc += a.weight;
        if (acc >= omega - kLevelSlack) return a.location;
    }
    return atoms_.back().location;
}

std::vector<double> DiracMixture::jump_points() const {
    std::vector<double> out;
    out.reserve(atoms_.size());
    for (const auto& a : atoms_) out.push_back(a.location);
    return out;
}

double DiracMixture::mean() const noexcept {
    double acc = 0.0;
    for (const auto& a : atoms_) acc += a.weight * a.location;
    return acc;
}

double mixture_inverse_cdf(const DiracMixture& m, double omega) { return m.inverse_cdf(omega); }

QuantileVector push_forward(const QuantileVector& q, double reward, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("push_forward: discount must lie in [0, 1), got " +
                                    std::to_string(gamma));
    }
    return affine_map(q, reward, gamma);
}

QuantileVector affine_map(const QuantileVector& q, double offset, double scale) {
    std::vector<double> out(q.begin(), q.end());
    for (double& v : out) v = offset + scale * v;
    return QuantileVector(std::move(out));
}

}  // namespace crdrl
