#include "crdrl/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace crdrl {

AdamState::AdamState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, 0.0L), v(n, 0.0L) {
    if (!(cfg.lr > 0.0) || !(cfg.eps >= 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
        !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
        throw std::invalid_argument("AdamState: invalid hyperparameters");
    }
}

std::vector<double> adam_step(AdamState& state, std::span<const double> grad) {
    if (grad.size() != state.m.size()) {
        throw std::invalid_argument("adam_step: gradient has " + std::to_string(grad.size()) +
                                    " entries, state has " + std::to_string(state.m.size()));
    }
    for (std::size_t k = 0; k < grad.size(); ++k) {
        if (!std::isfinite(grad[k])) {
            throw std::invalid_argument("adam_step: non-finite gradient at index " +
                                        std::to_string(k));
        }
    }
    using ext = long double;
    const auto& c = state.config;
    ++state.t;
    const ext beta1 = c.beta1, beta2 = c.beta2;
    const ext t = static_cast<ext>(state.t);
    const ext bias1 = 1.0L - std::pow(beta1, t);
    const ext bias2 = 1.0L - std::pow(beta2, t);
    std::vector<double> delta(grad.size());
    for (std::size_t k = 0; k < grad.size(); ++k) {
        const ext g = grad[k];
        state.m[k] = beta1 * state.m[k] + (1.0L - beta1) * g;
        state.v[k] = beta2 * state.v[k] + (1.0L - beta2) * g * g;
        const ext m_hat = state.m[k] / bias1;
        const ext v_hat = state.v[k] / bias2;
        delta[k] = static_cast<double>(-static_cast<ext>(c.lr) * m_hat /
                                       (std::sqrt(v_hat) + static_cast<ext>(c.eps)));
    }
    return delta;
}

}  // namespace crdrl
