#include <gtest/gtest.h>

#include <cmath>

#include "crdrl/bench.hpp"

using namespace crdrl;

TEST(Bench, KernelsAgreeAtEverySize) {
    const std::vector<std::size_t> sizes{1, 2, 16, 201, 256};
    const auto reports = run_bench(sizes, 20);
    ASSERT_EQ(reports.size(), sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const auto& r = reports[k];
        EXPECT_EQ(r.n, sizes[k]);
        EXPECT_EQ(r.repetitions, 20u);
        EXPECT_GT(r.median_ns_sorted, 0.0);
        EXPECT_GT(r.median_ns_quadratic, 0.0);
        EXPECT_NEAR(r.ratio, r.median_ns_quadratic / r.median_ns_sorted, 1e-12 * r.ratio);
        EXPECT_LE(std::abs(r.value_sorted - r.value_quadratic),
                  1e-10 * std::max(1.0, std::abs(r.value_sorted)));
    }
}

TEST(Bench, InputsAreSeeded) {
    const std::vector<std::size_t> sizes{64};
    EXPECT_EQ(run_bench(sizes, 20, 7)[0].value_sorted, run_bench(sizes, 20, 7)[0].value_sorted);
    EXPECT_NE(run_bench(sizes, 20, 7)[0].value_sorted, run_bench(sizes, 20, 8)[0].value_sorted);
}

TEST(Bench, RejectsBadArguments) {
    const std::vector<std::size_t> zero{0}, ok{4};
    EXPECT_THROW(run_bench(zero, 20), std::invalid_argument);
    EXPECT_THROW(run_bench(ok, 5), std::invalid_argument);
    EXPECT_EQ(default_bench_sizes(), (std::vector<std::size_t>{16, 64, 201, 256, 1024, 4096}));
}
