#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "crdrl/losses.hpp"
#include "crdrl/metrics.hpp"
#include "oracles.hpp"

using namespace crdrl;

namespace {

using Vec = std::vector<double>;

// Distinct draws from a 0.01 lattice, shifted per side so no theta equals a
// target and every gap is at least 0.005: safe for h = 1e-6 stencils.
Vec lattice(std::mt19937_64& rng, std::size_t n, double shift) {
    std::vector<int> k(601);
    for (int i = 0; i < 601; ++i) k[i] = i - 300;
    std::shuffle(k.begin(), k.end(), rng);
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 0.01 * k[i] + shift;
    return v;
}

double value_of(LossGradient (*f)(std::span<const double>, std::span<const double>),
                std::span<const double> t, std::span<const double> b) {
    return f(t, b).value;
}

}  // namespace

TEST(QuantileMidpoints, StrictlyIncreasingInsideUnitInterval) {
    for (std::size_t n : {1u, 2u, 12u, 201u}) {
        const auto tau = quantile_midpoints(n);
        EXPECT_GT(tau.front(), 0.0);
        EXPECT_LT(tau.back(), 1.0);
        EXPECT_TRUE(std::is_sorted(tau.begin(), tau.end()));
        EXPECT_EQ(std::adjacent_find(tau.begin(), tau.end()), tau.end());
    }
    EXPECT_EQ(quantile_midpoints(2), (Vec{0.25, 0.75}));
}

TEST(QrLoss, Examples) {
    const auto a = qr_loss(Vec{0}, Vec{1});
    EXPECT_DOUBLE_EQ(a.value, 0.5);
    EXPECT_EQ(a.grad, (Vec{-0.5}));
    EXPECT_EQ(qr_loss(Vec{-1}, Vec{-1}).value, 0.0);
    // theta = theta_bar sorted distinct: every gradient entry is -1/(2N).
    const Vec s{-2, -0.5, 1, 4};
    for (double g : qr_loss(s, s).grad) EXPECT_DOUBLE_EQ(g, -1.0 / 8.0);
    EXPECT_THROW(qr_loss(Vec{0, 1}, Vec{0}), std::invalid_argument);
}

TEST(QrLoss, MatchesPinballOracleAndPermutationRules) {
    std::mt19937_64 rng(1);
    std::size_t theta_order_matters = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 20;
        auto t = lattice(rng, n, 0.0), b = lattice(rng, n, 0.005);
        const double v = qr_loss(t, b).value;
        EXPECT_NEAR(v, oracle::qr_value(t, b), 1e-12);
        auto pb = b;
        std::shuffle(pb.begin(), pb.end(), rng);
        EXPECT_NEAR(qr_loss(t, pb).value, v, 1e-12);
        auto pt = t;
        std::reverse(pt.begin(), pt.end());
        if (std::abs(qr_loss(pt, b).value - v) > 1e-9) ++theta_order_matters;
    }
    EXPECT_GT(theta_order_matters, 150u);
}

TEST(HuberQrLoss, Examples) {
    EXPECT_DOUBLE_EQ(huber_qr_loss(Vec{0}, Vec{1}, 2.0).value, 0.25);
    EXPECT_EQ(huber_qr_loss(Vec{0.3}, Vec{0.3}, 1.0).value, 0.0);
    EXPECT_THROW(huber_qr_loss(Vec{0}, Vec{1}, 0.0), std::invalid_argument);
    EXPECT_THROW(huber_qr_loss(Vec{0}, Vec{1}, -1.0), std::invalid_argument);
}

TEST(HuberQrLoss, SmallKappaLimitRecoversQr) {
    // Once kappa is below every |u|, value / kappa = qr - (kappa / 2N) sum_ij |tau_i - delta_ij|,
    // so the gap is at most kappa N / 2.
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + trial % 10;
        const auto t = lattice(rng, n, 0.0), b = lattice(rng, n, 0.005);
        const double qr = qr_loss(t, b).value;
        for (double kappa : {1e-3, 1e-4}) {
            EXPECT_NEAR(huber_qr_loss(t, b, kappa).value / kappa, qr, kappa * n / 2.0);
        }
    }
    EXPECT_NEAR(huber_qr_loss(Vec{0}, Vec{1}, 1e-6).value / 1e-6, 0.5, 1e-6);
}

TEST(HuberQrLoss, LinearBranchSlope) {
    // Every residual beyond kappa: slope of theta_i is -kappa sum_j w_ij sign(u_ij) / N.
    const Vec t{10.0, 11.0}, b{-1.0, 0.5};
    const double kappa = 0.1;
    const auto lg = huber_qr_loss(t, b, kappa);
    const auto tau = quantile_midpoints(2);
    for (std::size_t i = 0; i < 2; ++i) {
        const double expect = kappa * 2.0 * std::abs(tau[i] - 1.0) / 2.0;
        EXPECT_NEAR(lg.grad[i], expect, 1e-15);
    }
}

TEST(CramerLoss, Examples) {
    const auto a = cramer_loss(Vec{0}, Vec{1});
    EXPECT_DOUBLE_EQ(a.value, 1.0);
    EXPECT_EQ(a.grad, (Vec{-1.0}));
    EXPECT_EQ(cramer_loss(Vec{2, -1}, Vec{-1, 2}).value, 0.0);
    const auto b = cramer_loss(Vec{0, 2}, Vec{1, 3});
    EXPECT_DOUBLE_EQ(b.value, 0.5);
    EXPECT_DOUBLE_EQ(b.grad[0], -0.25);
    EXPECT_DOUBLE_EQ(b.grad[1], -0.25);
}

TEST(CramerLoss, ValueIsCramerSortedAndPermutationInvariant) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 30;
        auto t = lattice(rng, n, 0.0), b = lattice(rng, n, 0.005);
        const auto lg = cramer_loss(t, b);
        EXPECT_EQ(lg.value, cramer_sorted(t, b));
        auto pt = t;
        std::shuffle(pt.begin(), pt.end(), rng);
        EXPECT_EQ(cramer_loss(pt, b).value, lg.value);
    }
}

TEST(CramerLoss, RankGradientMatchesPiecewiseDerivative) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 40;
        auto t = lattice(rng, n, 0.0), b = lattice(rng, n, 0.005);
        const auto rank_grad = cramer_loss(t, b).grad;
        const auto piece = cramer_gradient_piecewise(t, b);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(rank_grad[i], piece[i], 1e-14);
    }
}

TEST(CramerLoss, GradientIsPermutationEquivariant) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 20;
        const auto t = lattice(rng, n, 0.0), b = lattice(rng, n, 0.005);
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        Vec pt(n);
        for (std::size_t i = 0; i < n; ++i) pt[i] = t[perm[i]];
        const auto g = cramer_loss(t, b).grad, pg = cramer_loss(pt, b).grad;
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(pg[i], g[perm[i]]);
    }
}

TEST(Wasserstein1Loss, ValueAndSubgradient) {
    const auto lg = wasserstein1_loss(Vec{3, -1}, Vec{0, 0});
    EXPECT_DOUBLE_EQ(lg.value, 2.0);
    EXPECT_EQ(lg.grad, (Vec{0.5, -0.5}));
}

TEST(Collinearity, Examples) {
    const auto r = check_collinearity(Vec{0}, Vec{1});
    EXPECT_EQ(r.max_deviation, 0.0);
    EXPECT_EQ(r.qr_grad, (Vec{-0.5}));
    EXPECT_EQ(r.cramer_grad, (Vec{-1.0}));
    EXPECT_THROW(check_collinearity(Vec{0}, Vec{0}), std::invalid_argument);
    EXPECT_THROW(check_collinearity(Vec{1, 0}, Vec{2, 3}), std::invalid_argument);
}

TEST(Collinearity, HoldsOnRandomSortedPairs) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 64;
        auto t = lattice(rng, n, 0.0), b = lattice(rng, n, 0.005);
        std::sort(t.begin(), t.end());
        std::sort(b.begin(), b.end());
        EXPECT_LE(check_collinearity(t, b).max_deviation, 1e-12);
    }
}

TEST(FiniteDiff, Examples) {
    auto cramer = [](std::span<const double> t, std::span<const double> b) {
        return value_of(cramer_loss, t, b);
    };
    auto qr = [](std::span<const double> t, std::span<const double> b) {
        return value_of(qr_loss, t, b);
    };
    EXPECT_NEAR(finite_diff_grad(cramer, Vec{0}, Vec{1}, 1e-6)[0], -1.0, 1e-4);
    EXPECT_NEAR(finite_diff_grad(qr, Vec{0}, Vec{1}, 1e-6)[0], -0.5, 1e-4);
    EXPECT_THROW(finite_diff_grad(qr, Vec{0}, Vec{5e-6}, 1e-6), std::invalid_argument);
    EXPECT_THROW(finite_diff_grad(qr, Vec{0}, Vec{1}, 0.0), std::invalid_argument);
}

TEST(FiniteDiff, HuberLinearRegionSlope) {
    const double kappa = 1e-3;
    auto huber = [kappa](std::span<const double> t, std::span<const double> b) {
        return huber_qr_loss(t, b, kappa).value;
    };
    const Vec t{5.0, 6.0, 7.0}, b{-1.0, 0.0, 1.0};
    const auto fd = finite_diff_grad(huber, t, b, 1e-6);
    const auto tau = quantile_midpoints(3);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(fd[i], kappa * 3.0 * (1.0 - tau[i]) / 3.0, 1e-4);
    }
}

TEST(FiniteDiff, AnalyticGradientsMatchForAllLosses) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 20;
        const auto t = lattice(rng, n, 0.0), b = lattice(rng, n, 0.005);
        const double kappa = 0.5 + 0.01 * trial;
        const LossFunction losses[] = {
            [](auto x, auto y) { return value_of(cramer_loss, x, y); },
            [](auto x, auto y) { return value_of(qr_loss, x, y); },
            [kappa](auto x, auto y) { return huber_qr_loss(x, y, kappa).value; }};
        const Vec analytic[] = {cramer_loss(t, b).grad, qr_loss(t, b).grad,
                                huber_qr_loss(t, b, kappa).grad};
        for (int k = 0; k < 3; ++k) {
            const auto fd = finite_diff_grad(losses[k], t, b, 1e-6);
            for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(fd[i], analytic[k][i], 1e-4);
        }
    }
}
