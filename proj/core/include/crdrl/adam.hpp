#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace crdrl {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected ADAM moments. Invariants: t >= 0, v >= 0 entrywise.
/// Moments are kept in extended precision: with plain doubles, feeding c * g
/// and c * eps drifts about 10 ulps away from the (g, eps) updates.
struct AdamState {
    explicit AdamState(std::size_t n, AdamConfig config = {});

    AdamConfig config;
    std::vector<long double> m;
    std::vector<long double> v;
    std::uint64_t t = 0;
};

/// Advances the moments by one step and returns the parameter delta
/// -lr * m_hat / (sqrt(v_hat) + eps). Throws std::invalid_argument on a
/// size mismatch or a non-finite gradient; the state is untouched then.
std::vector<double> adam_step(AdamState& state, std::span<const double> grad);

}  // namespace crdrl
