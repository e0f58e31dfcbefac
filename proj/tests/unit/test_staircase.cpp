#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "crdrl/csv.hpp"
#include "crdrl/staircase.hpp"

using namespace crdrl;

namespace {

QuantileVector qv(std::vector<double> v) { return QuantileVector(std::move(v)); }

}  // namespace

TEST(QuantileVector, RejectsEmptyAndNonFinite) {
    EXPECT_THROW(qv({}), std::invalid_argument);
    EXPECT_THROW(qv({0.0, std::numeric_limits<double>::quiet_NaN()}), std::invalid_argument);
    EXPECT_THROW(qv({std::numeric_limits<double>::infinity()}), std::invalid_argument);
    EXPECT_NO_THROW(qv({3.0}));
}

TEST(MakeCdf, SortsAndKeepsDuplicates) {
    auto sorted = [](std::vector<double> v) {
        const auto c = make_cdf(qv(std::move(v)));
        return std::vector<double>(c.sorted_values().begin(), c.sorted_values().end());
    };
    EXPECT_EQ(sorted({3, 1, 2}), (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(sorted({0}), (std::vector<double>{0}));
    EXPECT_EQ(sorted({-1, -1, 1}), (std::vector<double>{-1, -1, 1}));
}

TEST(CdfEval, CountsAtOrBelow) {
    EXPECT_DOUBLE_EQ(cdf_eval(make_cdf(qv({-1, -1, 1})), 0.0), 2.0 / 3.0);
    EXPECT_EQ(cdf_eval(make_cdf(qv({0})), -5.0), 0.0);
    EXPECT_EQ(cdf_eval(make_cdf(qv({0, 2})), 2.0), 1.0);
}

TEST(InverseCdf, InfimumConvention) {
    const auto c = make_cdf(qv({-1, -1, 1}));
    EXPECT_EQ(inverse_cdf(c, 2.0 / 3.0), -1.0);
    EXPECT_EQ(inverse_cdf(c, 0.7), 1.0);
    const auto single = make_cdf(qv({5}));
    for (double w : {1e-9, 0.3, 1.0}) EXPECT_EQ(inverse_cdf(single, w), 5.0);
}

TEST(InverseCdf, RejectsLevelsOutsideUnitInterval) {
    const auto c = make_cdf(qv({0, 1}));
    EXPECT_THROW(inverse_cdf(c, 0.0), std::invalid_argument);
    EXPECT_THROW(inverse_cdf(c, -0.1), std::invalid_argument);
    EXPECT_THROW(inverse_cdf(c, 1.0 + 1e-12), std::invalid_argument);
    EXPECT_THROW(inverse_cdf(c, std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}

TEST(InverseCdf, MatchesCeilIndexAtEveryLevel) {
    // sorted_values[ceil(omega N) - 1] at the exact levels k/N.
    for (std::size_t n = 1; n <= 50; ++n) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
        const auto c = make_cdf(qv(v));
        for (std::size_t k = 1; k <= n; ++k) {
            const double omega = static_cast<double>(k) / static_cast<double>(n);
            EXPECT_EQ(inverse_cdf(c, omega), static_cast<double>(k - 1)) << n << " " << k;
        }
    }
}

TEST(Staircase, CdfMonotoneAndRoundTrips) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> ints(-3, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 17;
        std::vector<double> v(n);
        for (double& x : v) x = ints(rng);
        const auto c = make_cdf(qv(v));
        EXPECT_EQ(c.cdf(-1e300), 0.0);
        EXPECT_EQ(c.cdf(1e300), 1.0);
        double prev = 0.0;
        for (double z = -4.0; z <= 4.0; z += 0.25) {
            const double f = c.cdf(z);
            EXPECT_GE(f, prev);
            prev = f;
        }
        for (double atom : v) EXPECT_LE(c.inverse_cdf(c.cdf(atom)), atom);
        for (int k = 1; k <= 100; ++k) {
            const double omega = k / 100.0;
            EXPECT_GE(c.cdf(c.inverse_cdf(omega)), omega);
        }
    }
}

TEST(MixtureInverseCdf, CumulativeScan) {
    const DiracMixture m({{-1.0, 2.0 / 3.0}, {1.0, 1.0 / 3.0}});
    EXPECT_EQ(mixture_inverse_cdf(m, 0.5), -1.0);
    EXPECT_EQ(mixture_inverse_cdf(m, 17.0 / 24.0), 1.0);
    EXPECT_EQ(mixture_inverse_cdf(m, 2.0 / 3.0), -1.0);
    EXPECT_EQ(mixture_inverse_cdf(DiracMixture({{0.0, 1.0}}), 0.999), 0.0);
    EXPECT_THROW(mixture_inverse_cdf(m, 0.0), std::invalid_argument);
    EXPECT_THROW(mixture_inverse_cdf(m, 1.5), std::invalid_argument);
}

TEST(DiracMixture, SortsMergesAndValidates) {
    const DiracMixture m({{1.0, 0.25}, {-1.0, 0.5}, {1.0, 0.25}});
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.atoms()[0], (DiracAtom{-1.0, 0.5}));
    EXPECT_EQ(m.atoms()[1], (DiracAtom{1.0, 0.5}));
    EXPECT_DOUBLE_EQ(m.mean(), 0.0);
    EXPECT_THROW(DiracMixture({{0.0, 0.5}}), std::invalid_argument);
    EXPECT_THROW(DiracMixture({{0.0, 1.5}, {1.0, -0.5}}), std::invalid_argument);
    EXPECT_THROW(DiracMixture({{0.0, 0.0}, {1.0, 1.0}}), std::invalid_argument);
    EXPECT_NO_THROW(DiracMixture::dropping_zero_weights({{0.0, 0.0}, {1.0, 1.0}}));
}

TEST(PushForward, AffineMap) {
    EXPECT_EQ(push_forward(qv({0, 1}), 1.0, 0.5), qv({1, 1.5}));
    EXPECT_EQ(push_forward(qv({2}), 0.0, 0.0), qv({0}));
    const auto near = push_forward(qv({-1, 1}), 0.0, 1.0 - 1e-9);
    EXPECT_NEAR(near[0], -1.0, 1e-8);
    EXPECT_NEAR(near[1], 1.0, 1e-8);
    EXPECT_THROW(push_forward(qv({0}), 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(push_forward(qv({0}), 0.0, -0.1), std::invalid_argument);
}

TEST(PushForward, IsInvertibleForPositiveGamma) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 3.0);
    std::uniform_real_distribution<double> gammas(0.05, 0.999);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(1 + trial % 9);
        for (double& x : v) x = normal(rng);
        const double r = normal(rng), g = gammas(rng);
        const auto back = affine_map(push_forward(qv(v), r, g), -r / g, 1.0 / g);
        for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(back[i], v[i], 1e-12 * (1 + std::abs(v[i])));
    }
}

TEST(Csv, ParsesRowsAndReportsLines) {
    std::istringstream good("# comment\n1, 2.5,-3\n\n+4,5,6\n");
    const auto rows = parse_csv_rows(good, "good.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1][0], 4.0);

    std::istringstream bad("1,2\n3,abc\n");
    try {
        parse_csv_rows(bad, "bad.csv");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("bad.csv:2"), std::string::npos);
    }
}

TEST(Csv, FormatsWithRoundTripPrecision) {
    for (double v : {0.1, 1.0 / 3.0, -2.0 / 3.0, 1e-300, 123456789.123456789}) {
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
}
