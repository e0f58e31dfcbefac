#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "crdrl/staircase.hpp"

namespace crdrl {

struct LossGradient {
    double value = 0.0;
    std::vector<double> grad;  // d value / d theta_i, same order as theta
};

/// tau_hat_i = (2i - 1) / (2N), i = 1..N.
std::vector<double> quantile_midpoints(std::size_t n);

/// Quantile-regression (pinball) loss of prediction theta against target
/// theta_bar: (1/N) sum_i sum_j rho_{tau_hat_i}(theta_bar_j - theta_i).
/// theta_i is paired with tau_hat_i in the given order.
LossGradient qr_loss(std::span<const double> theta, std::span<const double> target);
LossGradient qr_loss(const QuantileVector& theta, const QuantileVector& target);

/// Huberized QR loss, |tau_hat_i - 1{u<0}| * L_kappa(u); kappa > 0.
LossGradient huber_qr_loss(std::span<const double> theta, std::span<const double> target,
                           double kappa);
LossGradient huber_qr_loss(const QuantileVector& theta, const QuantileVector& target,
                           double kappa);

/// Cramér loss (squared Cramér distance) and its gradient. The gradient uses
/// each theta_i's stable rank r_i in place of its index:
///   grad_i = (1 - 2 r_i + 2 #{j : theta_bar_j < theta_i}) / N^2,
/// which equals the closed form for sorted theta and is the gradient of the
/// (order-free) value elsewhere.
LossGradient cramer_loss(std::span<const double> theta, std::span<const double> target);
LossGradient cramer_loss(const QuantileVector& theta, const QuantileVector& target);

/// Gradient of the Cramér loss obtained by differentiating the merged-grid
/// sum directly: moving boundary theta_i changes the widths of its two
/// adjacent intervals, so grad_i = (D_before^2 - D_after^2) with D the CDF
/// difference on either side. Independent of cramer_loss's rank formula.
std::vector<double> cramer_gradient_piecewise(std::span<const double> theta,
                                              std::span<const double> target);

/// d_1(theta, theta_bar) with the subgradient (1/N) sign(theta_i - theta_bar_(r_i)).
/// Biased as a sample-based training signal; used to demonstrate the bias.
LossGradient wasserstein1_loss(std::span<const double> theta, std::span<const double> target);

struct CollinearityReport {
    std::size_t n = 0;
    double max_deviation = 0.0;  // max_i |qr_grad_i - (N/2) cramer_grad_i|
    std::vector<double> qr_grad;
    std::vector<double> cramer_grad;
};

/// Requires both inputs sorted with no theta_i equal to any theta_bar_j;
/// throws std::invalid_argument otherwise.
CollinearityReport check_collinearity(std::span<const double> theta,
                                      std::span<const double> target);

using LossFunction =
    std::function<double(std::span<const double> theta, std::span<const double> target)>;

/// Central differences (L(theta + h e_i) - L(theta - h e_i)) / 2h. Throws if
/// any |theta_i - theta_bar_j| < 10h, since the stencil would straddle a kink.
std::vector<double> finite_diff_grad(const LossFunction& loss, std::span<const double> theta,
                                     std::span<const double> target, double h);

}  // namespace crdrl
