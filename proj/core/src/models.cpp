#include "crdrl/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace crdrl {

std::string to_string(HeadKind head) {
    switch (head) {
        case HeadKind::flat: return "flat";
        case HeadKind::nc_relu: return "nc-relu";
        case HeadKind::nc_softplus: return "nc-softplus";
    }
    return "?";
}

HeadKind parse_head_kind(const std::string& name) {
    if (name == "flat") return HeadKind::flat;
    if (name == "nc-relu") return HeadKind::nc_relu;
    if (name == "nc-softplus") return HeadKind::nc_softplus;
    throw std::invalid_argument("unknown head '" + name + "' (flat, nc-relu, nc-softplus)");
}

double softplus(double x) {
    // max(x, 0) + log1p(exp(-|x|)) never overflows.
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double softplus_inverse(double y) {
    if (!(y > 0.0)) throw std::invalid_argument("softplus_inverse: argument must be positive");
    return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

double activate(Activation act, double x) {
    return act == Activation::relu ? std::max(x, 0.0) : softplus(x);
}

double activate_slope(Activation act, double x) {
    if (act == Activation::relu) return x > 0.0 ? 1.0 : 0.0;
    // logistic(x), evaluated on the stable side.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

Activation activation_of(HeadKind head) {
    return head == HeadKind::nc_relu ? Activation::relu : Activation::softplus;
}

}  // namespace

NcOutput nc_forward(const NonCrossingHead& head) {
    const std::size_t n = head.logits.size();
    if (n == 0) throw std::invalid_argument("nc_forward: empty logits");
    NcOutput out;
    out.probs.resize(n);
    const double top = *std::max_element(head.logits.begin(), head.logits.end());
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += (out.probs[i] = std::exp(head.logits[i] - top));
    for (double& p : out.probs) p /= z;
    out.psi.resize(n);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) out.psi[i] = (running += out.probs[i]);
    out.alpha = activate(head.activation, head.scale_raw);
    out.alpha_slope = activate_slope(head.activation, head.scale_raw);
    out.quantiles.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.quantiles[i] = out.alpha * out.psi[i] + head.location;
    return out;
}

NcGrad nc_backward(const NonCrossingHead&, const NcOutput& out, std::span<const double> dq) {
    const std::size_t n = out.probs.size();
    if (dq.size() != n) throw std::invalid_argument("nc_backward: dq size mismatch");
    NcGrad g;
    g.logits.resize(n);
    double dalpha = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        g.location += dq[i];
        dalpha += dq[i] * out.psi[i];
    }
    g.scale_raw = out.alpha_slope * dalpha;
    // dL/dp_k = alpha * sum_{i >= k} dq_i; then the softmax Jacobian.
    std::vector<double> dp(n);
    double tail = 0.0;
    for (std::size_t k = n; k-- > 0;) dp[k] = out.alpha * (tail += dq[k]);
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += out.probs[k] * dp[k];
    for (std::size_t k = 0; k < n; ++k) g.logits[k] = out.probs[k] * (dp[k] - mean);
    return g;
}

std::vector<double> nc_jacobian(const NonCrossingHead& head) {
    const auto out = nc_forward(head);
    const std::size_t n = out.probs.size();
    const std::size_t cols = n + 2;
    std::vector<double> jac(n * cols);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double cum = k <= i ? out.probs[k] : 0.0;
            jac[i * cols + k] = out.alpha * (cum - out.psi[i] * out.probs[k]);
        }
        jac[i * cols + n] = out.alpha_slope * out.psi[i];
        jac[i * cols + n + 1] = 1.0;
    }
    return jac;
}

// ---------------------------------------------------------------------------

TabularModel::TabularModel(std::size_t n_states, std::size_t n_actions, std::size_t n,
                           HeadKind head)
    : n_states_(n_states),
      n_actions_(n_actions),
      n_(n),
      head_(head),
      block_(head == HeadKind::flat ? n : n + 2) {
    if (n_states == 0 || n_actions == 0 || n == 0) {
        throw std::invalid_argument("TabularModel: dimensions must be positive");
    }
}

std::vector<double> TabularModel::init(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> small(-0.1, 0.1);
    std::vector<double> params(n_params());
    const double unit_scale = head_ == HeadKind::nc_relu ? 1.0 : softplus_inverse(1.0);
    for (std::size_t k = 0; k < n_states_ * n_actions_; ++k) {
        const std::size_t base = k * block_;
        for (std::size_t i = 0; i < n_; ++i) params[base + i] = small(rng);
        if (head_ != HeadKind::flat) {
            params[base + n_] = unit_scale;
            params[base + n_ + 1] = 0.0;
        }
    }
    return params;
}

std::vector<double> TabularModel::quantiles(std::span<const double> params, std::size_t s,
                                            std::size_t a) const {
    const auto block = params.subspan(offset(s, a), block_);
    if (head_ == HeadKind::flat) return {block.begin(), block.end()};
    return nc_forward({block.first(n_), block[n_], block[n_ + 1], activation_of(head_)}).quantiles;
}

void TabularModel::accumulate_grad(std::span<const double> params, std::size_t s, std::size_t a,
                                   std::span<const double> dq, std::span<double> grad) const {
    const std::size_t base = offset(s, a);
    if (head_ == HeadKind::flat) {
        for (std::size_t i = 0; i < n_; ++i) grad[base + i] += dq[i];
        return;
    }
    const auto block = params.subspan(base, block_);
    const NonCrossingHead h{block.first(n_), block[n_], block[n_ + 1], activation_of(head_)};
    const auto g = nc_backward(h, nc_forward(h), dq);
    for (std::size_t i = 0; i < n_; ++i) grad[base + i] += g.logits[i];
    grad[base + n_] += g.scale_raw;
    grad[base + n_ + 1] += g.location;
}

double TabularModel::scale(std::span<const double> params, std::size_t s, std::size_t a) const {
    if (head_ == HeadKind::flat) return 1.0;
    return activate(activation_of(head_), params[offset(s, a) + n_]);
}

// ---------------------------------------------------------------------------

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output");
    for (std::size_t layer = 0; layer + 1 < sizes_.size(); ++layer) {
        if (sizes_[layer] == 0 || sizes_[layer + 1] == 0) {
            throw std::invalid_argument("Mlp: zero-width layer");
        }
        offsets_.push_back(n_params_);
        n_params_ += sizes_[layer + 1] * (sizes_[layer] + 1);
    }
}

void Mlp::init(std::span<double> params, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    for (std::size_t layer = 0; layer + 1 < sizes_.size(); ++layer) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[layer]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        const std::size_t count = sizes_[layer + 1] * (sizes_[layer] + 1);
        for (std::size_t k = 0; k < count; ++k) params[offsets_[layer] + k] = dist(rng);
    }
}

std::vector<std::vector<double>> Mlp::forward(std::span<const double> params,
                                              std::span<const double> input) const {
    std::vector<std::vector<double>> acts;
    acts.reserve(sizes_.size());
    acts.emplace_back(input.begin(), input.end());
    for (std::size_t layer = 0; layer + 1 < sizes_.size(); ++layer) {
        const std::size_t in = sizes_[layer], out = sizes_[layer + 1];
        const double* w = params.data() + offsets_[layer];
        const double* b = w + out * in;
        const auto& x = acts.back();
        std::vector<double> y(out);
        const bool hidden = layer + 2 < sizes_.size();
        for (std::size_t o = 0; o < out; ++o) {
            double sum = b[o];
            for (std::size_t i = 0; i < in; ++i) sum += w[o * in + i] * x[i];
            y[o] = hidden ? std::max(sum, 0.0) : sum;
        }
        acts.push_back(std::move(y));
    }
    return acts;
}

void Mlp::backward(std::span<const double> params,
                   const std::vector<std::vector<double>>& activations,
                   std::span<const double> dout, std::span<double> grad) const {
    std::vector<double> delta(dout.begin(), dout.end());
    for (std::size_t layer = sizes_.size() - 1; layer-- > 0;) {
        const std::size_t in = sizes_[layer], out = sizes_[layer + 1];
        const double* w = params.data() + offsets_[layer];
        double* gw = grad.data() + offsets_[layer];
        double* gb = gw + out * in;
        const auto& x = activations[layer];
        for (std::size_t o = 0; o < out; ++o) {
            gb[o] += delta[o];
            for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += delta[o] * x[i];
        }
        if (layer == 0) break;
        std::vector<double> prev(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            for (std::size_t i = 0; i < in; ++i) prev[i] += w[o * in + i] * delta[o];
        }
        // ReLU mask: a hidden unit is active iff its stored output is positive.
        for (std::size_t i = 0; i < in; ++i) {
            if (!(x[i] > 0.0)) prev[i] = 0.0;
        }
        delta = std::move(prev);
    }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> layer_sizes(std::size_t in, std::size_t hidden, std::size_t depth,
                                     std::size_t out) {
    std::vector<std::size_t> sizes{in};
    for (std::size_t d = 0; d < depth; ++d) sizes.push_back(hidden);
    sizes.push_back(out);
    return sizes;
}

}  // namespace

MlpModel::MlpModel(std::size_t n_states, std::size_t n_actions, std::size_t n, HeadKind head,
                   std::size_t hidden, std::size_t depth)
    : n_states_(n_states),
      n_actions_(n_actions),
      n_(n),
      head_(head),
      main_(layer_sizes(n_states, hidden, depth, n * n_actions)),
      sf_(layer_sizes(n_states, hidden, depth, 2 * n_actions)) {
    if (n_states == 0 || n_actions == 0 || n == 0 || hidden == 0) {
        throw std::invalid_argument("MlpModel: dimensions must be positive");
    }
}

std::size_t MlpModel::n_params() const {
    return main_.n_params() + (head_ == HeadKind::flat ? 0 : sf_.n_params());
}

std::vector<double> MlpModel::one_hot(std::size_t s) const {
    std::vector<double> x(n_states_, 0.0);
    x[s] = 1.0;
    return x;
}

std::vector<double> MlpModel::init(std::uint64_t seed) const {
    std::vector<double> params(n_params());
    std::mt19937_64 split(seed);
    const std::uint64_t main_seed = split();
    const std::uint64_t sf_seed = split();
    main_.init(std::span<double>(params).first(main_.n_params()), main_seed);
    if (head_ != HeadKind::flat) {
        sf_.init(std::span<double>(params).subspan(main_.n_params()), sf_seed);
    }
    return params;
}

std::vector<double> MlpModel::quantiles(std::span<const double> params, std::size_t s,
                                        std::size_t a) const {
    const auto x = one_hot(s);
    const auto out = main_.forward(params.first(main_.n_params()), x).back();
    const std::span<const double> raw = std::span<const double>(out).subspan(a * n_, n_);
    if (head_ == HeadKind::flat) return {raw.begin(), raw.end()};
    const auto sf = sf_.forward(sf_params(params), x).back();
    return nc_forward({raw, sf[2 * a], sf[2 * a + 1], activation_of(head_)}).quantiles;
}

void MlpModel::accumulate_grad(std::span<const double> params, std::size_t s, std::size_t a,
                               std::span<const double> dq, std::span<double> grad) const {
    const auto x = one_hot(s);
    const auto main_params = params.first(main_.n_params());
    const auto main_acts = main_.forward(main_params, x);
    std::vector<double> dout(main_.n_outputs(), 0.0);
    if (head_ == HeadKind::flat) {
        std::copy(dq.begin(), dq.end(), dout.begin() + static_cast<std::ptrdiff_t>(a * n_));
        main_.backward(main_params, main_acts, dout, grad.first(main_.n_params()));
        return;
    }
    const auto sf_acts = sf_.forward(sf_params(params), x);
    const auto& sf = sf_acts.back();
    const std::span<const double> raw =
        std::span<const double>(main_acts.back()).subspan(a * n_, n_);
    const NonCrossingHead h{raw, sf[2 * a], sf[2 * a + 1], activation_of(head_)};
    const auto g = nc_backward(h, nc_forward(h), dq);
    std::copy(g.logits.begin(), g.logits.end(), dout.begin() + static_cast<std::ptrdiff_t>(a * n_));
    main_.backward(main_params, main_acts, dout, grad.first(main_.n_params()));
    std::vector<double> dsf(sf_.n_outputs(), 0.0);
    dsf[2 * a] = g.scale_raw;
    dsf[2 * a + 1] = g.location;
    sf_.backward(sf_params(params), sf_acts, dsf, grad.subspan(main_.n_params()));
}

double MlpModel::scale(std::span<const double> params, std::size_t s, std::size_t a) const {
    if (head_ == HeadKind::flat) return 1.0;
    const auto sf = sf_.forward(sf_params(params), one_hot(s)).back();
    return activate(activation_of(head_), sf[2 * a]);
}

std::size_t default_hidden_width(HeadKind head) { return head == HeadKind::flat ? 45 : 32; }

std::unique_ptr<QuantileModel> make_model(ModelKind kind, std::size_t n_states, std::size_t n_actions,
                                          std::size_t n, HeadKind head) {
    if (kind == ModelKind::tabular) {
        return std::make_unique<TabularModel>(n_states, n_actions, n, head);
    }
    return std::make_unique<MlpModel>(n_states, n_actions, n, head, default_hidden_width(head));
}

}  // namespace crdrl
