#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace crdrl {

enum class HeadKind { flat, nc_relu, nc_softplus };
enum class Activation { relu, softplus };

std::string to_string(HeadKind head);
/// Accepts "flat", "nc-relu", "nc-softplus". Throws std::invalid_argument.
HeadKind parse_head_kind(const std::string& name);

/// log(1 + exp(x)) without overflow for large |x|.
double softplus(double x);
/// Inverse of softplus on (0, inf).
double softplus_inverse(double y);
double activate(Activation act, double x);
/// Derivative of activate; the ReLU slope at 0 is taken as 0.
double activate_slope(Activation act, double x);

/// q[i] = act(scale_raw) * psi[i] + location, psi = cumsum(softmax(logits)).
struct NonCrossingHead {
    std::span<const double> logits;
    double scale_raw = 0.0;
    double location = 0.0;
    Activation activation = Activation::softplus;
};

struct NcOutput {
    std::vector<double> quantiles;  // nondecreasing
    std::vector<double> probs;      // softmax(logits)
    std::vector<double> psi;        // cumsum(probs)
    double alpha = 0.0;             // act(scale_raw) >= 0
    double alpha_slope = 0.0;       // act'(scale_raw)
};

struct NcGrad {
    std::vector<double> logits;
    double scale_raw = 0.0;
    double location = 0.0;
};

NcOutput nc_forward(const NonCrossingHead& head);
/// Vector-Jacobian product: pulls dL/dq back to the raw head parameters.
NcGrad nc_backward(const NonCrossingHead& head, const NcOutput& out, std::span<const double> dq);
/// Full Jacobian dq/d(raw), N rows by N + 2 columns (logits, scale_raw,
/// location), row-major.
std::vector<double> nc_jacobian(const NonCrossingHead& head);

/// A parameterized map (s, a) -> N quantiles. Parameters live outside the
/// model so a frozen target copy is just another vector.
class QuantileModel {
public:
    virtual ~QuantileModel() = default;

    virtual std::size_t n_states() const = 0;
    virtual std::size_t n_actions() const = 0;
    virtual std::size_t n_quantiles() const = 0;
    virtual std::size_t n_params() const = 0;
    virtual HeadKind head() const = 0;

    /// Seeded initial parameters.
    virtual std::vector<double> init(std::uint64_t seed) const = 0;
    virtual std::vector<double> quantiles(std::span<const double> params, std::size_t s,
                                          std::size_t a) const = 0;
    /// grad += J(s, a)^T dq, J = dq/dparams.
    virtual void accumulate_grad(std::span<const double> params, std::size_t s, std::size_t a,
                                 std::span<const double> dq, std::span<double> grad) const = 0;
    /// act(scale_raw) for non-crossing heads; 1 for the flat head.
    virtual double scale(std::span<const double> params, std::size_t s, std::size_t a) const = 0;
};

/// One raw parameter block per (s, a): N values for the flat head,
/// N logits + scale_raw + location for the non-crossing heads.
/// Flat values and logits start i.i.d. U(-0.1, 0.1); the location starts at 0
/// and scale_raw at act^{-1}(1).
class TabularModel final : public QuantileModel {
public:
    TabularModel(std::size_t n_states, std::size_t n_actions, std::size_t n, HeadKind head);

    std::size_t n_states() const override { return n_states_; }
    std::size_t n_actions() const override { return n_actions_; }
    std::size_t n_quantiles() const override { return n_; }
    std::size_t n_params() const override { return n_states_ * n_actions_ * block_; }
    HeadKind head() const override { return head_; }

    std::vector<double> init(std::uint64_t seed) const override;
    std::vector<double> quantiles(std::span<const double> params, std::size_t s,
                                  std::size_t a) const override;
    void accumulate_grad(std::span<const double> params, std::size_t s, std::size_t a,
                         std::span<const double> dq, std::span<double> grad) const override;
    double scale(std::span<const double> params, std::size_t s, std::size_t a) const override;

    std::size_t block_size() const noexcept { return block_; }

private:
    std::size_t offset(std::size_t s, std::size_t a) const { return (s * n_actions_ + a) * block_; }

    std::size_t n_states_, n_actions_, n_;
    HeadKind head_;
    std::size_t block_;
};

/// Dense ReLU network with layer widths sizes[0] -> ... -> sizes.back().
/// Parameters per layer: weights (out x in, row-major) then biases.
class Mlp {
public:
    explicit Mlp(std::vector<std::size_t> sizes);

    std::size_t n_params() const noexcept { return n_params_; }
    std::size_t n_inputs() const noexcept { return sizes_.front(); }
    std::size_t n_outputs() const noexcept { return sizes_.back(); }

    /// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    void init(std::span<double> params, std::uint64_t seed) const;
    /// activations[0] is the input, activations.back() the linear output.
    std::vector<std::vector<double>> forward(std::span<const double> params,
                                             std::span<const double> input) const;
    void backward(std::span<const double> params,
                  const std::vector<std::vector<double>>& activations,
                  std::span<const double> dout, std::span<double> grad) const;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;
    std::size_t n_params_ = 0;
};

/// One-hot state input. The flat head is a single MLP with N * A outputs;
/// the non-crossing heads pair a logit MLP (N * A outputs) with a
/// scale/location MLP (2 * A outputs).
class MlpModel final : public QuantileModel {
public:
    MlpModel(std::size_t n_states, std::size_t n_actions, std::size_t n, HeadKind head,
             std::size_t hidden, std::size_t depth = 2);

    std::size_t n_states() const override { return n_states_; }
    std::size_t n_actions() const override { return n_actions_; }
    std::size_t n_quantiles() const override { return n_; }
    std::size_t n_params() const override;
    HeadKind head() const override { return head_; }

    std::vector<double> init(std::uint64_t seed) const override;
    std::vector<double> quantiles(std::span<const double> params, std::size_t s,
                                  std::size_t a) const override;
    void accumulate_grad(std::span<const double> params, std::size_t s, std::size_t a,
                         std::span<const double> dq, std::span<double> grad) const override;
    double scale(std::span<const double> params, std::size_t s, std::size_t a) const override;

private:
    std::vector<double> one_hot(std::size_t s) const;
    std::span<const double> sf_params(std::span<const double> params) const {
        return params.subspan(main_.n_params());
    }

    std::size_t n_states_, n_actions_, n_;
    HeadKind head_;
    Mlp main_;
    Mlp sf_;
};

/// Hidden width used for synthetic-task networks: 45 for the flat head, 32 for
/// each of the two non-crossing networks (about 2.7k parameters either way).
std::size_t default_hidden_width(HeadKind head);

enum class ModelKind { mlp, tabular };
std::unique_ptr<QuantileModel> make_model(ModelKind kind, std::size_t n_states, std::size_t n_actions,
                                          std::size_t n, HeadKind head);

}  // namespace crdrl
