#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "crdrl/adam.hpp"
#include "crdrl/losses.hpp"
#include "crdrl/mdp.hpp"
#include "crdrl/models.hpp"

namespace crdrl {

enum class LossKind { cramer, qr, huber, w1 };

std::string to_string(LossKind loss);
/// Accepts "cramer", "qr", "huber", "w1". Throws std::invalid_argument.
LossKind parse_loss_kind(const std::string& name);

struct LossSpec {
    LossKind kind = LossKind::cramer;
    double kappa = 1.0;  // Huber threshold, used by LossKind::huber only
};

/// Value and gradient w.r.t. theta of the chosen loss against one target.
LossGradient evaluate_loss(const LossSpec& loss, std::span<const double> theta,
                           std::span<const double> target);

struct Transition {
    std::size_t s = 0;
    std::size_t a = 0;
    double reward = 0.0;
    std::size_t s_next = 0;
    std::size_t a_next = 0;
    bool terminal = false;  // target is a Dirac at the reward
};

struct TdConfig {
    LossSpec loss;
    AdamConfig adam;
    double gamma = 0.0;
    std::size_t target_period = 1;  // K: sync the frozen copy every K steps
};

/// TD learning of a QuantileModel against a frozen parameter copy.
/// Each step: target theta_bar = r + gamma * Z_frozen(s', a') per sample,
/// gradient = batch mean of dloss/dparams, one ADAM update.
class TdTrainer {
public:
    TdTrainer(const QuantileModel& model, std::vector<double> init, TdConfig config);

    /// Applies one update and returns the parameter delta.
    std::vector<double> step(std::span<const Transition> batch);
    /// Batch-mean gradient with respect to params, without updating anything.
    std::vector<double> gradient(std::span<const Transition> batch) const;

    std::span<const double> params() const noexcept { return params_; }
    std::span<const double> target_params() const noexcept { return target_; }
    const AdamState& adam() const noexcept { return adam_; }
    std::size_t iterations() const noexcept { return iterations_; }
    std::vector<double> quantiles(std::size_t s, std::size_t a) const {
        return model_->quantiles(params_, s, a);
    }
    const QuantileModel& model() const noexcept { return *model_; }

private:
    const QuantileModel* model_;
    TdConfig config_;
    std::vector<double> params_;
    std::vector<double> target_;
    AdamState adam_;
    std::size_t iterations_ = 0;
};

/// Samples (s, a) uniformly, r = R(s, a), s' ~ P(. | s, a), a' ~ pi(. | s').
std::vector<Transition> sample_transitions(const FiniteMdp& mdp, const Policy& pi,
                                           std::size_t batch, std::mt19937_64& rng);

// --- synthetic two-Dirac task ----------------------------------------------
// One state, one action; every transition terminates with reward -1 with
// probability 2/3 and +1 with probability 1/3.

/// The true return distribution (2/3) delta_{-1} + (1/3) delta_{+1}.
DiracMixture synthetic_target();
std::vector<Transition> sample_synthetic(std::size_t batch, std::mt19937_64& rng);

struct SyntheticConfig {
    LossSpec loss;
    HeadKind head = HeadKind::flat;
    ModelKind model = ModelKind::mlp;
    std::size_t n = 12;
    std::size_t iters = 1000;
    std::size_t batch = 32;
    double lr = 1e-3;
    double eps = 1e-8;
};

struct SyntheticRun {
    std::uint64_t seed = 0;
    std::vector<double> d1_trace;  // after each update
    std::vector<double> final_quantiles;
    double final_d1 = 0.0;
    double nearest_dirac_d1 = 0.0;  // min over {-1, +1} of d1 to that Dirac
    double final_scale = 1.0;       // act(scale_raw); 1 for the flat head
};

/// One seeded run. The seed feeds separate streams for initialization and
/// transition sampling.
SyntheticRun run_synthetic(const SyntheticConfig& config, std::uint64_t seed);

struct SyntheticSummary {
    SyntheticConfig config;
    std::vector<SyntheticRun> runs;  // in seed order
    double mean_d1 = 0.0;
    double std_d1 = 0.0;  // population standard deviation
    double median_d1 = 0.0;
};

/// Runs seeds [first_seed, first_seed + n_seeds) concurrently; results are
/// merged in seed order.
SyntheticSummary run_synthetic_seeds(const SyntheticConfig& config, std::uint64_t first_seed,
                                     std::size_t n_seeds, std::size_t max_threads = 0);

}  // namespace crdrl
