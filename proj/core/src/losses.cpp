#include "crdrl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "crdrl/metrics.hpp"

namespace crdrl {

namespace {

void require_pair(std::span<const double> theta, std::span<const double> target,
                  const char* what) {
    if (theta.size() != target.size()) {
        throw std::invalid_argument(std::string(what) + ": sizes differ (" +
                                    std::to_string(theta.size()) + " vs " +
                                    std::to_string(target.size()) + ")");
    }
    if (theta.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
}

// 1-based stable rank of each element.
std::vector<std::size_t> stable_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<std::size_t> rank(v.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k + 1;
    return rank;
}

double huber(double u, double kappa) {
    const double a = std::abs(u);
    return a <= kappa ? 0.5 * u * u : kappa * (a - 0.5 * kappa);
}

double huber_slope(double u, double kappa) {
    if (std::abs(u) <= kappa) return u;
    return u > 0.0 ? kappa : -kappa;
}

}  // namespace

std::vector<double> quantile_midpoints(std::size_t n) {
    if (n == 0) throw std::invalid_argument("quantile_midpoints: n must be positive");
    std::vector<double> tau(n);
    for (std::size_t i = 0; i < n; ++i) {
        tau[i] = static_cast<double>(2 * i + 1) / static_cast<double>(2 * n);
    }
    return tau;
}

LossGradient qr_loss(std::span<const double> theta, std::span<const double> target) {
    require_pair(theta, target, "qr_loss");
    const std::size_t n = theta.size();
    const auto nn = static_cast<double>(n);
    const auto tau = quantile_midpoints(n);
    LossGradient out;
    out.grad.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t below = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double u = target[j] - theta[i];
            const double indicator = u < 0.0 ? 1.0 : 0.0;
            out.value += u * (tau[i] - indicator);
            below += u < 0.0;
        }
        // (1/N) ((1 - 2i)/2 + sum_j delta_ij), with 1-based i.
        out.grad[i] = (static_cast<double>(below) - nn * tau[i]) / nn;
    }
    out.value /= nn;
    return out;
}

LossGradient qr_loss(const QuantileVector& theta, const QuantileVector& target) {
    return qr_loss(theta.values(), target.values());
}

LossGradient huber_qr_loss(std::span<const double> theta, std::span<const double> target,
                           double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("huber_qr_loss: kappa must be positive");
    }
    require_pair(theta, target, "huber_qr_loss");
    const std::size_t n = theta.size();
    const auto nn = static_cast<double>(n);
    const auto tau = quantile_midpoints(n);
    LossGradient out;
    out.grad.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double u = target[j] - theta[i];
            const double weight = std::abs(tau[i] - (u < 0.0 ? 1.0 : 0.0));
            out.value += weight * huber(u, kappa);
            out.grad[i] -= weight * huber_slope(u, kappa);
        }
        out.grad[i] /= nn;
    }
    out.value /= nn;
    return out;
}

LossGradient huber_qr_loss(const QuantileVector& theta, const QuantileVector& target,
                           double kappa) {
    return huber_qr_loss(theta.values(), target.values(), kappa);
}

LossGradient cramer_loss(std::span<const double> theta, std::span<const double> target) {
    require_pair(theta, target, "cramer_loss");
    const std::size_t n = theta.size();
    const auto nn = static_cast<double>(n);
    LossGradient out;
    out.value = cramer_sorted(theta, target);

    std::vector<double> sorted_target(target.begin(), target.end());
    std::sort(sorted_target.begin(), sorted_target.end());
    const auto rank = stable_ranks(theta);
    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto below = static_cast<double>(
            std::lower_bound(sorted_target.begin(), sorted_target.end(), theta[i]) -
            sorted_target.begin());
        out.grad[i] = (1.0 - 2.0 * static_cast<double>(rank[i]) + 2.0 * below) / (nn * nn);
    }
    return out;
}

LossGradient cramer_loss(const QuantileVector& theta, const QuantileVector& target) {
    return cramer_loss(theta.values(), target.values());
}

std::vector<double> cramer_gradient_piecewise(std::span<const double> theta,
                                              std::span<const double> target) {
    require_pair(theta, target, "cramer_gradient_piecewise");
    const std::size_t n = theta.size();
    const double step = 1.0 / static_cast<double>(n);

    // argsort of concat(theta, target); stable so theta wins ties.
    std::vector<double> merged(theta.begin(), theta.end());
    merged.insert(merged.end(), target.begin(), target.end());
    std::vector<std::size_t> order(2 * n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return merged[a] < merged[b]; });

    std::vector<double> grad(n, 0.0);
    double before = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const bool from_theta = order[k] < n;
        const double after = before + (from_theta ? step : -step);
        // d/dz of (z - z_prev) D_before^2 + (z_next - z) D_after^2
        if (from_theta) grad[order[k]] = before * before - after * after;
        before = after;
    }
    return grad;
}

LossGradient wasserstein1_loss(std::span<const double> theta, std::span<const double> target) {
    require_pair(theta, target, "wasserstein1_loss");
    const std::size_t n = theta.size();
    const auto nn = static_cast<double>(n);
    std::vector<double> sorted_target(target.begin(), target.end());
    std::sort(sorted_target.begin(), sorted_target.end());
    const auto rank = stable_ranks(theta);
    LossGradient out;
    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = theta[i] - sorted_target[rank[i] - 1];
        out.value += std::abs(u);
        out.grad[i] = (u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0)) / nn;
    }
    out.value /= nn;
    return out;
}

CollinearityReport check_collinearity(std::span<const double> theta,
                                      std::span<const double> target) {
    require_pair(theta, target, "check_collinearity");
    if (!std::is_sorted(theta.begin(), theta.end()) ||
        !std::is_sorted(target.begin(), target.end())) {
        throw std::invalid_argument("check_collinearity: inputs must be sorted");
    }
    for (double t : theta) {
        if (std::binary_search(target.begin(), target.end(), t)) {
            throw std::invalid_argument(
                "check_collinearity: tie between prediction and target (ambiguous subgradient)");
        }
    }
    CollinearityReport report;
    report.n = theta.size();
    report.qr_grad = qr_loss(theta, target).grad;
    report.cramer_grad = cramer_loss(theta, target).grad;
    const double half_n = 0.5 * static_cast<double>(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        report.max_deviation = std::max(
            report.max_deviation, std::abs(report.qr_grad[i] - half_n * report.cramer_grad[i]));
    }
    return report;
}

std::vector<double> finite_diff_grad(const LossFunction& loss, std::span<const double> theta,
                                     std::span<const double> target, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
    for (double t : theta) {
        for (double b : target) {
            if (std::abs(t - b) < 10.0 * h) {
                throw std::invalid_argument(
                    "finite_diff_grad: stencil crosses a kink (|theta_i - theta_bar_j| < 10h)");
            }
        }
    }
    std::vector<double> x(theta.begin(), theta.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = loss(x, target);
        x[i] = saved - h;
        const double down = loss(x, target);
        x[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace crdrl
