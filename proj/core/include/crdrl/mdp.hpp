#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "crdrl/staircase.hpp"

namespace crdrl {

/// Finite MDP with deterministic rewards R(s, a), transition kernel
/// P(s' | s, a) and discount gamma in [0, 1).
class FiniteMdp {
public:
    /// reward is S*A row-major, transition is S*A*S row-major. Throws
    /// std::invalid_argument when rows do not sum to 1 within 1e-12, entries
    /// are negative, or gamma is outside [0, 1).
    FiniteMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> reward,
              std::vector<double> transition, double gamma);

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::size_t n_pairs() const noexcept { return n_states_ * n_actions_; }
    double gamma() const noexcept { return gamma_; }

    double reward(std::size_t s, std::size_t a) const { return reward_[s * n_actions_ + a]; }
    double transition(std::size_t s, std::size_t a, std::size_t next) const {
        return transition_[(s * n_actions_ + a) * n_states_ + next];
    }
    std::span<const double> transition_row(std::size_t s, std::size_t a) const {
        return std::span<const double>(transition_).subspan((s * n_actions_ + a) * n_states_,
                                                            n_states_);
    }

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<double> reward_;
    std::vector<double> transition_;
    double gamma_;
};

/// Stochastic policy pi(a | s), S*A row-major.
class Policy {
public:
    Policy(std::size_t n_states, std::size_t n_actions, std::vector<double> probs);
    static Policy uniform(std::size_t n_states, std::size_t n_actions);

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    double prob(std::size_t s, std::size_t a) const { return probs_[s * n_actions_ + a]; }
    std::span<const double> row(std::size_t s) const {
        return std::span<const double>(probs_).subspan(s * n_actions_, n_actions_);
    }

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<double> probs_;
};

/// One QuantileVector per (s, a), all of the same size N.
class ReturnTable {
public:
    ReturnTable(std::size_t n_states, std::size_t n_actions, std::vector<QuantileVector> entries);
    static ReturnTable constant(std::size_t n_states, std::size_t n_actions, std::size_t n,
                                double value);

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::size_t n_quantiles() const noexcept { return entries_.front().size(); }
    const QuantileVector& at(std::size_t s, std::size_t a) const {
        return entries_[s * n_actions_ + a];
    }
    std::span<const QuantileVector> entries() const noexcept { return entries_; }

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<QuantileVector> entries_;
};

/// Exact distributional Bellman backup for a fixed policy: for each (s, a),
/// the mixture over (s', a') of R(s, a) + gamma Z(s', a') with weight
/// P(s' | s, a) pi(a' | s'). Indexed s * A + a.
std::vector<DiracMixture> bellman_apply(const FiniteMdp& mdp, const Policy& pi,
                                        const ReturnTable& z);

/// bellman_apply followed by the midpoint projection onto N levels.
ReturnTable projected_bellman_apply(const FiniteMdp& mdp, const Policy& pi, const ReturnTable& z);

/// Maximal Wasserstein metric sup_{s,a} d_p(Z1(s,a), Z2(s,a)).
double max_wasserstein(const ReturnTable& z1, const ReturnTable& z2, bool infinity_order = true);

struct ContractionReport {
    double before = 0.0;  // sup d_inf(Z1, Z2)
    double after = 0.0;   // sup d_inf(TZ1, TZ2) under the projected operator
    double ratio = 0.0;
    double gamma = 0.0;
    bool skipped = false;  // before == 0, ratio undefined
    bool holds() const noexcept { return skipped || ratio <= gamma + 1e-9; }
};

ContractionReport contraction_check(const FiniteMdp& mdp, const Policy& pi, const ReturnTable& z1,
                                    const ReturnTable& z2);

struct FixedPointResult {
    ReturnTable table;
    std::size_t iterations = 0;
    std::vector<double> sweep_distances;  // d̄_inf(Z_k, Z_{k+1}) per sweep
};

/// Iterates the projected operator from the all-zero table until successive
/// sup d_inf falls to tol. Throws std::runtime_error after max_iters sweeps.
FixedPointResult evaluation_fixed_point(const FiniteMdp& mdp, const Policy& pi, std::size_t n,
                                        double tol, std::size_t max_iters);
FixedPointResult evaluation_fixed_point(const FiniteMdp& mdp, const Policy& pi,
                                        ReturnTable initial, double tol, std::size_t max_iters);

/// Classical Q^pi from the linear Bellman equations (iterated to 1e-13).
std::vector<double> policy_q_values(const FiniteMdp& mdp, const Policy& pi);

/// Transition rows ~ flat Dirichlet, rewards ~ U[-1, 1].
FiniteMdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                     std::uint64_t seed);
/// Rows ~ flat Dirichlet.
Policy random_policy(std::size_t n_states, std::size_t n_actions, std::uint64_t seed);
/// Entries i.i.d. U[lo, hi].
ReturnTable random_table(std::size_t n_states, std::size_t n_actions, std::size_t n,
                         std::uint64_t seed, double lo = -5.0, double hi = 5.0);

/// Single-action chain whose start state returns -1 w.p. 2/3 and +1 w.p. 1/3:
/// start -> {low, high} -> absorbing zero-reward sink. Rewards at low/high are
/// -/+ 1/gamma so the discounted return from start is exactly -/+ 1.
/// Requires gamma in (0, 1). State indices: 0 start, 1 low, 2 high, 3 sink.
FiniteMdp two_dirac_mdp(double gamma = 0.5);

// JSON files:
//   MDP:    {"n_states", "n_actions", "gamma", "reward": [[..]] (S x A),
//            "transition": [[[..]]] (S x A x S)}
//   Policy: {"n_states", "n_actions", "probs": [[..]] (S x A)}
FiniteMdp load_mdp_json(const std::filesystem::path& path);
Policy load_policy_json(const std::filesystem::path& path);
FiniteMdp parse_mdp_json(const std::string& text, const std::string& source = "<mdp>");
Policy parse_policy_json(const std::string& text, const std::string& source = "<policy>");
std::string mdp_to_json(const FiniteMdp& mdp);
std::string policy_to_json(const Policy& pi);

}  // namespace crdrl
