#include "crdrl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "crdrl/metrics.hpp"

namespace crdrl {

namespace {

using Clock = std::chrono::steady_clock;

// Keeps the optimizer from discarding kernel results.
volatile double g_sink = 0.0;

template <class Kernel>
double time_once(Kernel&& kernel, std::size_t inner) {
    const auto start = Clock::now();
    double acc = 0.0;
    for (std::size_t k = 0; k < inner; ++k) acc += kernel();
    const auto stop = Clock::now();
    g_sink = g_sink + acc;
    return std::chrono::duration<double, std::nano>(stop - start).count() /
           static_cast<double>(inner);
}

// Smallest power-of-two loop count that runs for at least ~200 microseconds.
template <class Kernel>
std::size_t calibrate(Kernel&& kernel) {
    std::size_t inner = 1;
    while (inner < (std::size_t{1} << 24)) {
        if (time_once(kernel, inner) * static_cast<double>(inner) >= 2e5) break;
        inner *= 2;
    }
    return inner;
}

template <class Kernel>
double median_ns(Kernel&& kernel, std::size_t reps) {
    for (int w = 0; w < 3; ++w) g_sink = g_sink + kernel();
    const std::size_t inner = calibrate(kernel);
    std::vector<double> samples(reps);
    for (auto& s : samples) s = time_once(kernel, inner);
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(reps / 2),
                     samples.end());
    return samples[reps / 2];
}

}  // namespace

std::vector<std::size_t> default_bench_sizes() { return {16, 64, 201, 256, 1024, 4096}; }

std::vector<BenchReport> run_bench(std::span<const std::size_t> sizes, std::size_t reps,
                                   std::uint64_t seed) {
    if (reps < 20) throw std::invalid_argument("run_bench: need at least 20 repetitions");
    std::vector<BenchReport> out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t n : sizes) {
        if (n == 0) throw std::invalid_argument("run_bench: sizes must be positive");
        std::vector<double> left(n), right(n);
        for (double& x : left) x = normal(rng);
        for (double& x : right) x = normal(rng) + 0.5;
        // The quadratic kernel consumes sorted views; building them is not timed.
        const auto left_cdf = make_cdf(QuantileVector(left));
        const auto right_cdf = make_cdf(QuantileVector(right));

        BenchReport r;
        r.n = n;
        r.repetitions = reps;
        r.value_sorted = cramer_sorted(left, right);
        r.value_quadratic = cramer_quadratic(left_cdf, right_cdf);
        const double scale = std::max({std::abs(r.value_sorted), std::abs(r.value_quadratic), 1e-300});
        if (std::abs(r.value_sorted - r.value_quadratic) > 1e-10 * scale) {
            throw std::runtime_error("run_bench: kernels disagree at N=" + std::to_string(n) +
                                     " (" + std::to_string(r.value_sorted) + " vs " +
                                     std::to_string(r.value_quadratic) + ")");
        }
        r.median_ns_sorted = median_ns([&] { return cramer_sorted(left, right); }, reps);
        r.median_ns_quadratic =
            median_ns([&] { return cramer_quadratic(left_cdf, right_cdf); }, reps);
        r.ratio = r.median_ns_quadratic / r.median_ns_sorted;
        out.push_back(r);
    }
    return out;
}

}  // namespace crdrl
