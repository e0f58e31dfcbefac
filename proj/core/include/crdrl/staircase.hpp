#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace crdrl {

/// N quantile values, each carrying probability mass 1/N. Order is not
/// significant for the distribution it represents.
class QuantileVector {
public:
    QuantileVector() = default;
    /// Throws std::invalid_argument if empty or if any value is NaN/Inf.
    explicit QuantileVector(std::vector<double> values);

    /// N copies of `value`.
    static QuantileVector constant(std::size_t n, double value);

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    friend bool operator==(const QuantileVector&, const QuantileVector&) = default;

private:
    std::vector<double> values_;
};

/// Sorted view of a QuantileVector, read as a right-continuous step CDF with
/// jumps of 1/N.
class StaircaseCdf {
public:
    std::size_t size() const noexcept { return sorted_.size(); }
    std::span<const double> sorted_values() const noexcept { return sorted_; }

    /// Pr(Z <= z).
    double cdf(double z) const;
    /// inf{y : omega <= F(y)} for omega in (0, 1].
    double inverse_cdf(double omega) const;
    /// Locations where the CDF jumps (with repetition).
    std::span<const double> jump_points() const noexcept { return sorted_; }

    double level(std::size_t i) const noexcept {
        return static_cast<double>(i) / static_cast<double>(sorted_.size());
    }

private:
    friend StaircaseCdf make_cdf(const QuantileVector& q);
    explicit StaircaseCdf(std::vector<double> sorted) : sorted_(std::move(sorted)) {}
    std::vector<double> sorted_;
};

StaircaseCdf make_cdf(const QuantileVector& q);
double cdf_eval(const StaircaseCdf& c, double z);
double inverse_cdf(const StaircaseCdf& c, double omega);

struct DiracAtom {
    double location;
    double weight;
    friend bool operator==(const DiracAtom&, const DiracAtom&) = default;
};

/// Finite mixture of Diracs with arbitrary positive weights. Used for targets
/// (the synthetic two-Dirac mixture, exact Bellman backups), never as a
/// learned object. Atoms are kept sorted by location with duplicates merged.
class DiracMixture {
public:
    DiracMixture() = default;
    /// Sorts atoms, merges equal locations and validates the weights
    /// (positive, finite, summing to 1 within 1e-12).
    explicit DiracMixture(std::vector<DiracAtom> atoms);

    /// Drops zero-weight atoms, then constructs. Exact backups carry one atom
    /// per successor, including zero-probability ones.
    static DiracMixture dropping_zero_weights(std::vector<DiracAtom> atoms);

    static DiracMixture uniform(const QuantileVector& q);

    std::span<const DiracAtom> atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    double total_weight() const noexcept;

    double cdf(double z) const;
    /// Smallest location whose cumulative weight reaches omega.
    double inverse_cdf(double omega) const;
    std::vector<double> jump_points() const;
    double mean() const noexcept;

private:
    std::vector<DiracAtom> atoms_;
};

double mixture_inverse_cdf(const DiracMixture& m, double omega);

/// Elementwise r + gamma * x, the law of the discounted return after one
/// transition. Requires gamma in [0, 1).
QuantileVector push_forward(const QuantileVector& q, double reward, double gamma);

/// Unrestricted affine map a + b * x (no range check on b); used by tests and
/// by inverse maps of push_forward.
QuantileVector affine_map(const QuantileVector& q, double offset, double scale);

}  // namespace crdrl
