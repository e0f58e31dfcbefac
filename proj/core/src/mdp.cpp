#include "crdrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "crdrl/metrics.hpp"
#include "crdrl/projection.hpp"

namespace crdrl {

namespace {

void check_stochastic_rows(std::span<const double> values, std::size_t row_len,
                           const std::string& what) {
    for (std::size_t r = 0; r * row_len < values.size(); ++r) {
        double sum = 0.0;
        for (std::size_t k = 0; k < row_len; ++k) {
            const double p = values[r * row_len + k];
            if (!std::isfinite(p) || p < 0.0) {
                throw std::invalid_argument(what + " row " + std::to_string(r) +
                                            " has a negative or non-finite entry");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw std::invalid_argument(what + " row " + std::to_string(r) + " sums to " +
                                        std::to_string(sum));
        }
    }
}

std::vector<double> dirichlet_row(std::size_t k, std::mt19937_64& rng) {
    std::exponential_distribution<double> gamma1(1.0);
    std::vector<double> row(k);
    double sum = 0.0;
    for (double& x : row) sum += (x = gamma1(rng));
    for (double& x : row) x /= sum;
    // Push the rounding residue onto the largest entry so the row sums to 1
    // as tightly as floating point allows.
    double total = 0.0;
    for (double x : row) total += x;
    *std::max_element(row.begin(), row.end()) += 1.0 - total;
    return row;
}

}  // namespace

FiniteMdp::FiniteMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> reward,
                     std::vector<double> transition, double gamma)
    : n_states_(n_states),
      n_actions_(n_actions),
      reward_(std::move(reward)),
      transition_(std::move(transition)),
      gamma_(gamma) {
    if (n_states_ == 0 || n_actions_ == 0) {
        throw std::invalid_argument("FiniteMdp needs at least one state and one action");
    }
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
        throw std::invalid_argument("FiniteMdp: gamma must lie in [0, 1)");
    }
    if (reward_.size() != n_pairs()) {
        throw std::invalid_argument("FiniteMdp: reward table must have S*A entries");
    }
    for (double r : reward_) {
        if (!std::isfinite(r)) throw std::invalid_argument("FiniteMdp: non-finite reward");
    }
    if (transition_.size() != n_pairs() * n_states_) {
        throw std::invalid_argument("FiniteMdp: transition table must have S*A*S entries");
    }
    check_stochastic_rows(transition_, n_states_, "transition");
}

Policy::Policy(std::size_t n_states, std::size_t n_actions, std::vector<double> probs)
    : n_states_(n_states), n_actions_(n_actions), probs_(std::move(probs)) {
    if (n_states_ == 0 || n_actions_ == 0) {
        throw std::invalid_argument("Policy needs at least one state and one action");
    }
    if (probs_.size() != n_states_ * n_actions_) {
        throw std::invalid_argument("Policy: table must have S*A entries");
    }
    check_stochastic_rows(probs_, n_actions_, "policy");
}

Policy Policy::uniform(std::size_t n_states, std::size_t n_actions) {
    return Policy(n_states, n_actions,
                  std::vector<double>(n_states * n_actions, 1.0 / static_cast<double>(n_actions)));
}

ReturnTable::ReturnTable(std::size_t n_states, std::size_t n_actions,
                         std::vector<QuantileVector> entries)
    : n_states_(n_states), n_actions_(n_actions), entries_(std::move(entries)) {
    if (entries_.size() != n_states_ * n_actions_ || entries_.empty()) {
        throw std::invalid_argument("ReturnTable: expected S*A entries, got " +
                                    std::to_string(entries_.size()));
    }
    for (const auto& e : entries_) {
        if (e.empty() || e.size() != entries_.front().size()) {
            throw std::invalid_argument("ReturnTable: entries must share the same N");
        }
    }
}

ReturnTable ReturnTable::constant(std::size_t n_states, std::size_t n_actions, std::size_t n,
                                  double value) {
    return ReturnTable(n_states, n_actions,
                       std::vector<QuantileVector>(n_states * n_actions,
                                                   QuantileVector::constant(n, value)));
}

namespace {

void require_compatible(const FiniteMdp& mdp, const Policy& pi, const ReturnTable& z) {
    if (pi.n_states() != mdp.n_states() || pi.n_actions() != mdp.n_actions()) {
        throw std::invalid_argument("policy shape does not match the MDP");
    }
    if (z.n_states() != mdp.n_states() || z.n_actions() != mdp.n_actions()) {
        throw std::invalid_argument("return table shape does not match the MDP");
    }
}

}  // namespace

std::vector<DiracMixture> bellman_apply(const FiniteMdp& mdp, const Policy& pi,
                                        const ReturnTable& z) {
    require_compatible(mdp, pi, z);
    const std::size_t n = z.n_quantiles();
    const double atom_share = 1.0 / static_cast<double>(n);
    std::vector<DiracMixture> out;
    out.reserve(mdp.n_pairs());
    std::vector<DiracAtom> atoms;
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            atoms.clear();
            const double r = mdp.reward(s, a);
            for (std::size_t next = 0; next < mdp.n_states(); ++next) {
                const double p = mdp.transition(s, a, next);
                for (std::size_t next_a = 0; next_a < mdp.n_actions(); ++next_a) {
                    const double w = p * pi.prob(next, next_a) * atom_share;
                    if (w == 0.0) continue;
                    for (double v : z.at(next, next_a)) {
                        atoms.push_back({r + mdp.gamma() * v, w});
                    }
                }
            }
            out.push_back(DiracMixture::dropping_zero_weights(atoms));
        }
    }
    return out;
}

ReturnTable projected_bellman_apply(const FiniteMdp& mdp, const Policy& pi, const ReturnTable& z) {
    const auto mixtures = bellman_apply(mdp, pi, z);
    std::vector<QuantileVector> entries;
    entries.reserve(mixtures.size());
    for (const auto& m : mixtures) entries.push_back(project_midpoints(m, z.n_quantiles()).thetas);
    return ReturnTable(mdp.n_states(), mdp.n_actions(), std::move(entries));
}

double max_wasserstein(const ReturnTable& z1, const ReturnTable& z2, bool infinity_order) {
    if (z1.n_states() != z2.n_states() || z1.n_actions() != z2.n_actions() ||
        z1.n_quantiles() != z2.n_quantiles()) {
        throw std::invalid_argument("max_wasserstein: tables differ in shape");
    }
    const auto order = infinity_order ? WassersteinOrder::infinity : WassersteinOrder::one;
    double sup = 0.0;
    for (std::size_t k = 0; k < z1.entries().size(); ++k) {
        sup = std::max(sup, wasserstein_p(z1.entries()[k], z2.entries()[k], order));
    }
    return sup;
}

ContractionReport contraction_check(const FiniteMdp& mdp, const Policy& pi, const ReturnTable& z1,
                                    const ReturnTable& z2) {
    ContractionReport report;
    report.gamma = mdp.gamma();
    report.before = max_wasserstein(z1, z2);
    report.after =
        max_wasserstein(projected_bellman_apply(mdp, pi, z1), projected_bellman_apply(mdp, pi, z2));
    if (report.before == 0.0) {
        report.skipped = true;
        return report;
    }
    report.ratio = report.after / report.before;
    return report;
}

FixedPointResult evaluation_fixed_point(const FiniteMdp& mdp, const Policy& pi, std::size_t n,
                                        double tol, std::size_t max_iters) {
    return evaluation_fixed_point(
        mdp, pi, ReturnTable::constant(mdp.n_states(), mdp.n_actions(), n, 0.0), tol, max_iters);
}

FixedPointResult evaluation_fixed_point(const FiniteMdp& mdp, const Policy& pi,
                                        ReturnTable initial, double tol, std::size_t max_iters) {
    if (!(tol >= 0.0)) throw std::invalid_argument("evaluation_fixed_point: tol must be >= 0");
    FixedPointResult result{std::move(initial), 0, {}};
    while (result.iterations < max_iters) {
        auto next = projected_bellman_apply(mdp, pi, result.table);
        const double d = max_wasserstein(result.table, next);
        result.sweep_distances.push_back(d);
        result.table = std::move(next);
        ++result.iterations;
        if (d <= tol) return result;
    }
    throw std::runtime_error("evaluation_fixed_point: no convergence to " + std::to_string(tol) +
                             " within " + std::to_string(max_iters) + " sweeps");
}

std::vector<double> policy_q_values(const FiniteMdp& mdp, const Policy& pi) {
    std::vector<double> q(mdp.n_pairs(), 0.0), next(q.size());
    for (std::size_t sweep = 0; sweep < 1000000; ++sweep) {
        double change = 0.0;
        for (std::size_t s = 0; s < mdp.n_states(); ++s) {
            for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
                double expected = 0.0;
                for (std::size_t ns = 0; ns < mdp.n_states(); ++ns) {
                    const double p = mdp.transition(s, a, ns);
                    if (p == 0.0) continue;
                    for (std::size_t na = 0; na < mdp.n_actions(); ++na) {
                        expected += p * pi.prob(ns, na) * q[ns * mdp.n_actions() + na];
                    }
                }
                const std::size_t k = s * mdp.n_actions() + a;
                next[k] = mdp.reward(s, a) + mdp.gamma() * expected;
                change = std::max(change, std::abs(next[k] - q[k]));
            }
        }
        q.swap(next);
        if (change <= 1e-13) break;
    }
    return q;
}

FiniteMdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> reward_dist(-1.0, 1.0);
    std::vector<double> reward(n_states * n_actions);
    for (double& r : reward) r = reward_dist(rng);
    std::vector<double> transition;
    transition.reserve(n_states * n_actions * n_states);
    for (std::size_t k = 0; k < n_states * n_actions; ++k) {
        const auto row = dirichlet_row(n_states, rng);
        transition.insert(transition.end(), row.begin(), row.end());
    }
    return FiniteMdp(n_states, n_actions, std::move(reward), std::move(transition), gamma);
}

Policy random_policy(std::size_t n_states, std::size_t n_actions, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> probs;
    probs.reserve(n_states * n_actions);
    for (std::size_t s = 0; s < n_states; ++s) {
        const auto row = dirichlet_row(n_actions, rng);
        probs.insert(probs.end(), row.begin(), row.end());
    }
    return Policy(n_states, n_actions, std::move(probs));
}

ReturnTable random_table(std::size_t n_states, std::size_t n_actions, std::size_t n,
                         std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<QuantileVector> entries;
    entries.reserve(n_states * n_actions);
    for (std::size_t k = 0; k < n_states * n_actions; ++k) {
        std::vector<double> v(n);
        for (double& x : v) x = dist(rng);
        entries.emplace_back(std::move(v));
    }
    return ReturnTable(n_states, n_actions, std::move(entries));
}

FiniteMdp two_dirac_mdp(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("two_dirac_mdp: gamma must lie in (0, 1)");
    }
    constexpr std::size_t kStates = 4;
    std::vector<double> reward{0.0, -1.0 / gamma, 1.0 / gamma, 0.0};
    std::vector<double> transition(kStates * kStates, 0.0);
    transition[0 * kStates + 1] = 2.0 / 3.0;
    transition[0 * kStates + 2] = 1.0 / 3.0;
    transition[1 * kStates + 3] = 1.0;
    transition[2 * kStates + 3] = 1.0;
    transition[3 * kStates + 3] = 1.0;
    return FiniteMdp(kStates, 1, std::move(reward), std::move(transition), gamma);
}

}  // namespace crdrl
