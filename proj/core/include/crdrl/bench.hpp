#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace crdrl {

struct BenchReport {
    std::size_t n = 0;
    double median_ns_sorted = 0.0;     // per call, merge-sort kernel
    double median_ns_quadratic = 0.0;  // per call, pairwise kernel
    double ratio = 0.0;                // quadratic / sorted
    std::size_t repetitions = 0;
    double value_sorted = 0.0;
    double value_quadratic = 0.0;
};

/// Sizes ladder used when none is given.
std::vector<std::size_t> default_bench_sizes();

/// Times the Cramér kernels on one seeded random pair per size. Both kernels
/// must agree within 1e-10 relative first, otherwise std::runtime_error.
/// Each repetition times a calibrated inner loop after warmup; reps >= 20.
std::vector<BenchReport> run_bench(std::span<const std::size_t> sizes, std::size_t reps,
                                   std::uint64_t seed = 0xbe7c);

}  // namespace crdrl
