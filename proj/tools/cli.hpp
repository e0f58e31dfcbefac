#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace crdrl::cli {

/// Everything a run depends on. Together with seed it fully determines the
/// output files.
struct RunConfig {
    std::string subcommand;

    std::string left, right;    // loss
    std::string theta, target;  // grad
    std::string mixture;        // project
    std::string mdp, policy;    // fixed-point, contract-check
    std::string out;            // primary output file; stdout when empty
    std::string summary;        // train-synthetic summary JSON; stdout when empty

    std::string metric = "cramer";
    std::string loss = "cramer";
    std::string head = "flat";
    std::string model = "mlp";

    std::size_t n = 12;
    double gamma = 0.9;
    double tol = 1e-10;
    double kappa = 1.0;
    double lr = 1e-3;
    double eps = 1e-8;
    double fd_step = 0.0;  // grad: also report central differences when > 0
    std::size_t batch = 32;
    std::size_t iters = 1000;
    std::size_t seeds = 20;
    std::size_t max_iters = 100000;
    std::size_t instances = 50;
    std::size_t states = 5;
    std::size_t actions = 3;
    std::size_t threads = 0;
    std::vector<std::size_t> sizes;
    std::size_t reps = 50;

    std::uint64_t seed = 0;
    bool no_header = false;
};

/// Parses argv (without the program name). Returns std::nullopt after
/// printing help; throws on bad flags. CRDRL_SEED, when set, replaces the
/// default seed; an explicit --seed still wins.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out);

/// Runs one subcommand. Returns 0 on success; on failure writes a single
/// "error: ..." line to err and returns nonzero.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + dispatch with the same error convention.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crdrl::cli
