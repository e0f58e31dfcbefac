#include "crdrl/training.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

#include "crdrl/metrics.hpp"

namespace crdrl {

std::string to_string(LossKind loss) {
    switch (loss) {
        case LossKind::cramer: return "cramer";
        case LossKind::qr: return "qr";
        case LossKind::huber: return "huber";
        case LossKind::w1: return "w1";
    }
    return "?";
}

LossKind parse_loss_kind(const std::string& name) {
    if (name == "cramer") return LossKind::cramer;
    if (name == "qr") return LossKind::qr;
    if (name == "huber") return LossKind::huber;
    if (name == "w1") return LossKind::w1;
    throw std::invalid_argument("unknown loss '" + name + "' (cramer, qr, huber, w1)");
}

LossGradient evaluate_loss(const LossSpec& loss, std::span<const double> theta,
                           std::span<const double> target) {
    switch (loss.kind) {
        case LossKind::cramer: return cramer_loss(theta, target);
        case LossKind::qr: return qr_loss(theta, target);
        case LossKind::huber: return huber_qr_loss(theta, target, loss.kappa);
        case LossKind::w1: return wasserstein1_loss(theta, target);
    }
    throw std::invalid_argument("evaluate_loss: unknown loss");
}

TdTrainer::TdTrainer(const QuantileModel& model, std::vector<double> init, TdConfig config)
    : model_(&model),
      config_(config),
      params_(std::move(init)),
      target_(params_),
      adam_(params_.size(), config.adam) {
    if (params_.size() != model.n_params()) {
        throw std::invalid_argument("TdTrainer: parameter vector does not match the model");
    }
    if (config_.target_period == 0) {
        throw std::invalid_argument("TdTrainer: target period must be positive");
    }
    if (!(config_.gamma >= 0.0 && config_.gamma < 1.0)) {
        throw std::invalid_argument("TdTrainer: gamma must lie in [0, 1)");
    }
}

std::vector<double> TdTrainer::gradient(std::span<const Transition> batch) const {
    if (batch.empty()) throw std::invalid_argument("TdTrainer: empty batch");
    const std::size_t n = model_->n_quantiles();
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    // Per-sample sensitivities are summed per (s, a) before backpropagation;
    // pairs are visited in first-appearance order so the sum is reproducible.
    struct PairGrad {
        std::size_t s, a;
        std::vector<double> theta;
        std::vector<double> dq;
    };
    std::vector<PairGrad> pairs;
    for (const auto& tr : batch) {
        auto it = std::find_if(pairs.begin(), pairs.end(),
                               [&](const PairGrad& p) { return p.s == tr.s && p.a == tr.a; });
        if (it == pairs.end()) {
            pairs.push_back({tr.s, tr.a, model_->quantiles(params_, tr.s, tr.a),
                             std::vector<double>(n, 0.0)});
            it = std::prev(pairs.end());
        }
        std::vector<double> target;
        if (tr.terminal) {
            target.assign(n, tr.reward);
        } else {
            target = model_->quantiles(target_, tr.s_next, tr.a_next);
            for (double& v : target) v = tr.reward + config_.gamma * v;
        }
        const auto lg = evaluate_loss(config_.loss, it->theta, target);
        for (std::size_t i = 0; i < n; ++i) it->dq[i] += lg.grad[i] * inv_batch;
    }
    std::vector<double> grad(params_.size(), 0.0);
    for (const auto& p : pairs) model_->accumulate_grad(params_, p.s, p.a, p.dq, grad);
    return grad;
}

std::vector<double> TdTrainer::step(std::span<const Transition> batch) {
    const auto grad = gradient(batch);
    auto delta = adam_step(adam_, grad);
    for (std::size_t k = 0; k < params_.size(); ++k) params_[k] += delta[k];
    ++iterations_;
    if (iterations_ % config_.target_period == 0) target_ = params_;
    return delta;
}

std::vector<Transition> sample_transitions(const FiniteMdp& mdp, const Policy& pi,
                                           std::size_t batch, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> state(0, mdp.n_states() - 1);
    std::uniform_int_distribution<std::size_t> action(0, mdp.n_actions() - 1);
    auto draw = [&](std::span<const double> probs) {
        return std::discrete_distribution<std::size_t>(probs.begin(), probs.end())(rng);
    };
    std::vector<Transition> out(batch);
    for (auto& tr : out) {
        tr.s = state(rng);
        tr.a = action(rng);
        tr.reward = mdp.reward(tr.s, tr.a);
        tr.s_next = draw(mdp.transition_row(tr.s, tr.a));
        tr.a_next = draw(pi.row(tr.s_next));
    }
    return out;
}

DiracMixture synthetic_target() { return DiracMixture({{-1.0, 2.0 / 3.0}, {1.0, 1.0 / 3.0}}); }

std::vector<Transition> sample_synthetic(std::size_t batch, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Transition> out(batch);
    for (auto& tr : out) {
        tr.reward = u(rng) < 2.0 / 3.0 ? -1.0 : 1.0;
        tr.terminal = true;
    }
    return out;
}

SyntheticRun run_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
    if (config.n == 0 || config.batch == 0) {
        throw std::invalid_argument("run_synthetic: n and batch must be positive");
    }
    const auto model = make_model(config.model, 1, 1, config.n, config.head);
    std::mt19937_64 split(seed);
    const std::uint64_t init_seed = split();
    std::mt19937_64 sampler(split());

    TdConfig td;
    td.loss = config.loss;
    td.adam.lr = config.lr;
    td.adam.eps = config.eps;
    TdTrainer trainer(*model, model->init(init_seed), td);

    const auto target = synthetic_target();
    SyntheticRun run;
    run.seed = seed;
    run.d1_trace.reserve(config.iters);
    for (std::size_t it = 0; it < config.iters; ++it) {
        trainer.step(sample_synthetic(config.batch, sampler));
        run.d1_trace.push_back(
            wasserstein_1_vs_mixture(QuantileVector(trainer.quantiles(0, 0)), target));
    }
    run.final_quantiles = trainer.quantiles(0, 0);
    run.final_d1 = wasserstein_1_vs_mixture(QuantileVector(run.final_quantiles), target);
    double to_low = 0.0, to_high = 0.0;
    for (double q : run.final_quantiles) {
        to_low += std::abs(q + 1.0);
        to_high += std::abs(q - 1.0);
    }
    run.nearest_dirac_d1 =
        std::min(to_low, to_high) / static_cast<double>(run.final_quantiles.size());
    run.final_scale = model->scale(trainer.params(), 0, 0);
    return run;
}

SyntheticSummary run_synthetic_seeds(const SyntheticConfig& config, std::uint64_t first_seed,
                                     std::size_t n_seeds, std::size_t max_threads) {
    if (n_seeds == 0) throw std::invalid_argument("run_synthetic_seeds: no seeds");
    if (max_threads == 0) max_threads = std::max(1u, std::thread::hardware_concurrency());

    SyntheticSummary summary;
    summary.config = config;
    summary.runs.resize(n_seeds);
    for (std::size_t start = 0; start < n_seeds; start += max_threads) {
        const std::size_t stop = std::min(n_seeds, start + max_threads);
        std::vector<std::future<SyntheticRun>> jobs;
        for (std::size_t k = start; k < stop; ++k) {
            jobs.push_back(std::async(std::launch::async, [&config, first_seed, k] {
                return run_synthetic(config, first_seed + k);
            }));
        }
        for (std::size_t k = start; k < stop; ++k) summary.runs[k] = jobs[k - start].get();
    }

    std::vector<double> finals;
    for (const auto& r : summary.runs) finals.push_back(r.final_d1);
    const double count = static_cast<double>(finals.size());
    for (double d : finals) summary.mean_d1 += d / count;
    for (double d : finals) summary.std_d1 += (d - summary.mean_d1) * (d - summary.mean_d1) / count;
    summary.std_d1 = std::sqrt(summary.std_d1);
    std::sort(finals.begin(), finals.end());
    const std::size_t mid = finals.size() / 2;
    summary.median_d1 =
        finals.size() % 2 == 1 ? finals[mid] : 0.5 * (finals[mid - 1] + finals[mid]);
    return summary;
}

}  // namespace crdrl
