#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "crdrl/bench.hpp"
#include "crdrl/csv.hpp"
#include "crdrl/losses.hpp"
#include "crdrl/mdp.hpp"
#include "crdrl/metrics.hpp"
#include "crdrl/projection.hpp"
#include "crdrl/training.hpp"
#include "json.hpp"

namespace crdrl::cli {

namespace {

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("CRDRL_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    char* end = nullptr;
    const auto v = std::strtoull(raw, &end, 10);
    if (end == raw || *end != '\0') {
        throw std::invalid_argument(std::string("CRDRL_SEED is not an unsigned integer: '") + raw +
                                    "'");
    }
    return v;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

using Echo = std::vector<std::pair<std::string, std::string>>;

std::string echo_line(const Echo& echo) {
    std::string line = "# config:";
    for (const auto& [k, v] : echo) line += " " + k + "=" + v;
    return line;
}

// Output sink: a file when a path is given, otherwise the provided stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file " + path);
            stream_ = &file_;
        }
    }
    std::ostream& operator*() { return *stream_; }

    void header(const RunConfig& cfg, const Echo& echo) {
        if (!cfg.no_header) {
            *stream_ << "# crdrl " << cfg.subcommand << " generated " << utc_timestamp() << '\n';
        }
        *stream_ << echo_line(echo) << '\n';
    }

    void finish() {
        stream_->flush();
        if (!*stream_) throw std::runtime_error("write failed");
    }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

void write_prefixed_row(std::ostream& out, const std::string& prefix,
                        std::span<const double> values) {
    out << prefix;
    for (double v : values) out << ',' << format_double(v);
    out << '\n';
}

// --- subcommands -----------------------------------------------------------

int cmd_loss(const RunConfig& cfg, std::ostream& out) {
    const auto left = read_quantile_vector(cfg.left);
    const auto right = read_quantile_vector(cfg.right);
    if (left.size() != right.size()) {
        throw std::invalid_argument("dimension mismatch: left has " + std::to_string(left.size()) +
                                    " values, right has " + std::to_string(right.size()));
    }
    double value = 0.0;
    if (cfg.metric == "cramer") {
        value = cramer_sorted(left, right);
    } else if (cfg.metric == "cramer-quadratic" || cfg.metric == "cramer-quad") {
        value = cramer_quadratic(make_cdf(left), make_cdf(right));
    } else if (cfg.metric == "w1") {
        value = wasserstein_p(left, right, WassersteinOrder::one);
    } else if (cfg.metric == "winf") {
        value = wasserstein_p(left, right, WassersteinOrder::infinity);
    } else if (cfg.metric == "qr") {
        value = qr_loss(left, right).value;
    } else if (cfg.metric == "huber") {
        value = huber_qr_loss(left, right, cfg.kappa).value;
    } else {
        throw std::invalid_argument("unknown metric '" + cfg.metric + "'");
    }
    Sink sink(cfg.out, out);
    if (!cfg.out.empty()) sink.header(cfg, {{"metric", cfg.metric}, {"left", cfg.left},
                                            {"right", cfg.right}, {"kappa", fmt(cfg.kappa)}});
    *sink << format_double(value) << '\n';
    sink.finish();
    return 0;
}

int cmd_grad(const RunConfig& cfg, std::ostream& out) {
    const auto theta = read_quantile_vector(cfg.theta);
    const auto target = read_quantile_vector(cfg.target);
    if (theta.size() != target.size()) {
        throw std::invalid_argument("dimension mismatch: theta has " +
                                    std::to_string(theta.size()) + " values, target has " +
                                    std::to_string(target.size()));
    }
    const LossSpec spec{parse_loss_kind(cfg.loss), cfg.kappa};
    const auto lg = evaluate_loss(spec, theta.values(), target.values());
    std::vector<double> fd;
    if (cfg.fd_step > 0.0) {
        fd = finite_diff_grad(
            [&](std::span<const double> t, std::span<const double> b) {
                return evaluate_loss(spec, t, b).value;
            },
            theta.values(), target.values(), cfg.fd_step);
    }
    Sink sink(cfg.out, out);
    if (!cfg.out.empty()) {
        sink.header(cfg, {{"loss", cfg.loss}, {"theta", cfg.theta}, {"target", cfg.target},
                          {"kappa", fmt(cfg.kappa)}, {"fd_step", fmt(cfg.fd_step)}});
    }
    *sink << "value," << format_double(lg.value) << '\n';
    write_prefixed_row(*sink, "grad", lg.grad);
    if (!fd.empty()) write_prefixed_row(*sink, "fd", fd);
    sink.finish();
    return 0;
}

int cmd_project(const RunConfig& cfg, std::ostream& out) {
    const auto mixture = read_mixture(cfg.mixture);
    const auto proj = project_midpoints(mixture, cfg.n);
    Sink sink(cfg.out, out);
    if (!cfg.out.empty()) sink.header(cfg, {{"mixture", cfg.mixture}, {"n", fmt(cfg.n)}});
    write_row(*sink, proj.thetas.values());
    sink.finish();
    return 0;
}

Policy policy_for(const RunConfig& cfg, const FiniteMdp& mdp) {
    if (cfg.policy.empty()) return Policy::uniform(mdp.n_states(), mdp.n_actions());
    auto pi = load_policy_json(cfg.policy);
    if (pi.n_states() != mdp.n_states() || pi.n_actions() != mdp.n_actions()) {
        throw std::invalid_argument("dimension mismatch: policy shape differs from the MDP");
    }
    return pi;
}

int cmd_fixed_point(const RunConfig& cfg, std::ostream& out) {
    const auto mdp = load_mdp_json(cfg.mdp);
    const auto pi = policy_for(cfg, mdp);
    const auto result = evaluation_fixed_point(mdp, pi, cfg.n, cfg.tol, cfg.max_iters);
    Sink sink(cfg.out, out);
    sink.header(cfg, {{"mdp", cfg.mdp}, {"policy", cfg.policy.empty() ? "uniform" : cfg.policy},
                      {"n", fmt(cfg.n)}, {"tol", fmt(cfg.tol)},
                      {"max_iters", fmt(cfg.max_iters)}});
    *sink << "# iterations=" << result.iterations << " final_sweep_distance="
          << format_double(result.sweep_distances.back()) << '\n';
    *sink << "# columns: s,a,theta_1..theta_N\n";
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            write_prefixed_row(*sink, std::to_string(s) + "," + std::to_string(a),
                               result.table.at(s, a).values());
        }
    }
    sink.finish();
    return 0;
}

int cmd_contract_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::optional<FiniteMdp> fixed_mdp;
    if (!cfg.mdp.empty()) fixed_mdp = load_mdp_json(cfg.mdp);
    std::mt19937_64 master(cfg.seed);

    struct Row {
        double gamma;
        ContractionReport report;
    };
    std::vector<Row> rows;
    for (std::size_t k = 0; k < cfg.instances; ++k) {
        const std::uint64_t mdp_seed = master(), pi_seed = master(), z1_seed = master(),
                            z2_seed = master();
        const FiniteMdp mdp =
            fixed_mdp ? *fixed_mdp : random_mdp(cfg.states, cfg.actions, cfg.gamma, mdp_seed);
        const Policy pi = fixed_mdp ? policy_for(cfg, mdp)
                                    : random_policy(mdp.n_states(), mdp.n_actions(), pi_seed);
        const auto z1 = random_table(mdp.n_states(), mdp.n_actions(), cfg.n, z1_seed);
        const auto z2 = random_table(mdp.n_states(), mdp.n_actions(), cfg.n, z2_seed);
        rows.push_back({mdp.gamma(), contraction_check(mdp, pi, z1, z2)});
    }

    Sink sink(cfg.out, out);
    Echo echo{{"instances", fmt(cfg.instances)}, {"n", fmt(cfg.n)},
              {"seed", std::to_string(cfg.seed)}};
    if (fixed_mdp) {
        echo.push_back({"mdp", cfg.mdp});
        echo.push_back({"policy", cfg.policy.empty() ? "uniform" : cfg.policy});
    } else {
        echo.push_back({"states", fmt(cfg.states)});
        echo.push_back({"actions", fmt(cfg.actions)});
        echo.push_back({"gamma", fmt(cfg.gamma)});
    }
    sink.header(cfg, echo);
    *sink << "instance,gamma,before,after,ratio,status\n";
    std::size_t violations = 0;
    double max_ratio = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k].report;
        const char* status = r.skipped ? "skip" : (r.holds() ? "ok" : "violation");
        violations += !r.holds();
        if (!r.skipped) max_ratio = std::max(max_ratio, r.ratio);
        *sink << k << ',' << format_double(rows[k].gamma) << ',' << format_double(r.before) << ','
              << format_double(r.after) << ',' << format_double(r.ratio) << ',' << status << '\n';
    }
    *sink << "# violations=" << violations << " max_ratio=" << format_double(max_ratio) << '\n';
    sink.finish();
    if (violations > 0) {
        err << "error: projected operator failed to contract on " << violations << " of "
            << rows.size() << " instances\n";
        return 3;
    }
    return 0;
}

int cmd_train_synthetic(const RunConfig& cfg, std::ostream& out) {
    SyntheticConfig sc;
    sc.loss = {parse_loss_kind(cfg.loss), cfg.kappa};
    sc.head = parse_head_kind(cfg.head);
    if (cfg.model == "mlp") {
        sc.model = ModelKind::mlp;
    } else if (cfg.model == "tabular") {
        sc.model = ModelKind::tabular;
    } else {
        throw std::invalid_argument("unknown model '" + cfg.model + "' (mlp, tabular)");
    }
    sc.n = cfg.n;
    sc.iters = cfg.iters;
    sc.batch = cfg.batch;
    sc.lr = cfg.lr;
    sc.eps = cfg.eps;
    if (cfg.seeds == 0) throw std::invalid_argument("--seeds must be positive");
    const auto summary = run_synthetic_seeds(sc, cfg.seed, cfg.seeds, cfg.threads);

    const Echo echo{{"loss", cfg.loss},          {"kappa", fmt(cfg.kappa)},
                    {"head", cfg.head},          {"model", cfg.model},
                    {"n", fmt(cfg.n)},           {"seeds", fmt(cfg.seeds)},
                    {"first_seed", std::to_string(cfg.seed)},
                    {"iters", fmt(cfg.iters)},   {"batch", fmt(cfg.batch)},
                    {"lr", fmt(cfg.lr)},         {"eps", fmt(cfg.eps)}};
    if (!cfg.out.empty()) {
        Sink trace(cfg.out, out);
        trace.header(cfg, echo);
        *trace << "seed,iteration,d1\n";
        for (const auto& run : summary.runs) {
            for (std::size_t it = 0; it < run.d1_trace.size(); ++it) {
                *trace << run.seed << ',' << it + 1 << ',' << format_double(run.d1_trace[it])
                       << '\n';
            }
        }
        trace.finish();
    }

    using nlohmann::json;
    std::size_t collapsed = 0, dead = 0;
    json per_seed = json::array();
    for (const auto& run : summary.runs) {
        collapsed += run.nearest_dirac_d1 < run.final_d1;
        dead += run.final_scale < 1e-6;
        const auto [lo, hi] =
            std::minmax_element(run.final_quantiles.begin(), run.final_quantiles.end());
        per_seed.push_back({{"seed", run.seed},
                            {"final_d1", run.final_d1},
                            {"nearest_dirac_d1", run.nearest_dirac_d1},
                            {"scale", run.final_scale},
                            {"min_quantile", *lo},
                            {"max_quantile", *hi}});
    }
    json doc{{"loss", cfg.loss},
             {"head", cfg.head},
             {"model", cfg.model},
             {"mean_d1", summary.mean_d1},
             {"std_d1", summary.std_d1},
             {"median_d1", summary.median_d1},
             {"seeds", cfg.seeds},
             {"collapsed_seeds", collapsed},
             {"dead_scale_seeds", dead},
             {"config", json::object()},
             {"per_seed", std::move(per_seed)}};
    for (const auto& [k, v] : echo) doc["config"][k] = v;
    if (!cfg.no_header) doc["generated"] = utc_timestamp();

    Sink sink(cfg.summary, out);
    *sink << doc.dump(2) << '\n';
    sink.finish();
    return 0;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
    const auto sizes = cfg.sizes.empty() ? default_bench_sizes() : cfg.sizes;
    const auto reports = run_bench(sizes, cfg.reps, cfg.seed);
    Sink sink(cfg.out, out);
    std::string ladder;
    for (std::size_t n : sizes) ladder += (ladder.empty() ? "" : ",") + std::to_string(n);
    sink.header(cfg, {{"sizes", ladder}, {"reps", fmt(cfg.reps)},
                      {"seed", std::to_string(cfg.seed)}});
    *sink << "n,median_ns_sorted,median_ns_quadratic,ratio,repetitions,value_sorted,"
             "value_quadratic\n";
    for (const auto& r : reports) {
        *sink << r.n << ',' << format_double(r.median_ns_sorted) << ','
              << format_double(r.median_ns_quadratic) << ',' << format_double(r.ratio) << ','
              << r.repetitions << ',' << format_double(r.value_sorted) << ','
              << format_double(r.value_quadratic) << '\n';
    }
    sink.finish();
    return 0;
}

}  // namespace

std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out) {
    RunConfig cfg;
    const auto seed_default = env_seed();
    if (seed_default) cfg.seed = *seed_default;

    CLI::App app{"Staircase return distributions: Cramér and quantile losses, projections, "
                 "Bellman fixed points and synthetic TD training.",
                 "crdrl"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--no-header", cfg.no_header, "Omit the timestamp line from output headers");
    app.add_option("--seed", cfg.seed, "RNG seed (default 0, or CRDRL_SEED)");

    auto* loss = app.add_subcommand("loss", "Distance or loss between two quantile CSV files");
    loss->add_option("--metric", cfg.metric, "cramer | cramer-quad | w1 | winf | qr | huber")
        ->capture_default_str();
    loss->add_option("--left", cfg.left, "CSV with one row of N values")->required();
    loss->add_option("--right", cfg.right, "CSV with one row of N values")->required();
    loss->add_option("--kappa", cfg.kappa, "Huber threshold")->capture_default_str();
    loss->add_option("--out", cfg.out, "Output file (default stdout)");

    auto* grad = app.add_subcommand("grad", "Loss value and gradient w.r.t. theta");
    grad->add_option("--loss", cfg.loss, "cramer | qr | huber | w1")->capture_default_str();
    grad->add_option("--theta", cfg.theta, "Predicted quantiles CSV")->required();
    grad->add_option("--target", cfg.target, "Target quantiles CSV")->required();
    grad->add_option("--kappa", cfg.kappa, "Huber threshold")->capture_default_str();
    grad->add_option("--check-fd", cfg.fd_step, "Also print central differences with this step");
    grad->add_option("--out", cfg.out, "Output file (default stdout)");

    auto* project = app.add_subcommand("project", "Midpoint projection of a Dirac mixture");
    project->add_option("--mixture", cfg.mixture, "CSV of location,weight rows")->required();
    project->add_option("--n", cfg.n, "Number of quantiles")->capture_default_str();
    project->add_option("--out", cfg.out, "Output file (default stdout)");

    auto* fixed = app.add_subcommand("fixed-point", "Iterate the projected Bellman operator");
    fixed->add_option("--mdp", cfg.mdp, "MDP JSON file")->required();
    fixed->add_option("--policy", cfg.policy, "Policy JSON file (default uniform)");
    fixed->add_option("--n", cfg.n, "Number of quantiles")->capture_default_str();
    fixed->add_option("--tol", cfg.tol, "Stop when sup d_inf between sweeps <= tol")
        ->capture_default_str();
    fixed->add_option("--max-iters", cfg.max_iters, "Sweep limit")->capture_default_str();
    fixed->add_option("--out", cfg.out, "Output CSV (default stdout)");

    auto* contract =
        app.add_subcommand("contract-check", "Measure d_inf contraction on random table pairs");
    contract->add_option("--mdp", cfg.mdp, "MDP JSON file (default: random MDPs)");
    contract->add_option("--policy", cfg.policy, "Policy JSON for --mdp (default uniform)");
    contract->add_option("--n", cfg.n, "Number of quantiles")->capture_default_str();
    contract->add_option("--instances", cfg.instances, "Number of instances")
        ->capture_default_str();
    contract->add_option("--states", cfg.states, "States per random MDP")->capture_default_str();
    contract->add_option("--actions", cfg.actions, "Actions per random MDP")
        ->capture_default_str();
    contract->add_option("--gamma", cfg.gamma, "Discount of random MDPs")->capture_default_str();
    contract->add_option("--out", cfg.out, "Output CSV (default stdout)");

    auto* train = app.add_subcommand("train-synthetic", "TD training on the two-Dirac task");
    train->add_option("--loss", cfg.loss, "cramer | qr | huber | w1")->capture_default_str();
    train->add_option("--kappa", cfg.kappa, "Huber threshold")->capture_default_str();
    train->add_option("--head", cfg.head, "flat | nc-relu | nc-softplus")->capture_default_str();
    train->add_option("--model", cfg.model, "mlp | tabular")->capture_default_str();
    train->add_option("--n", cfg.n, "Number of quantiles")->capture_default_str();
    train->add_option("--seeds", cfg.seeds, "Number of seeds, starting at --seed")
        ->capture_default_str();
    train->add_option("--iters", cfg.iters, "Updates per seed")->capture_default_str();
    train->add_option("--batch", cfg.batch, "Transitions per update")->capture_default_str();
    train->add_option("--lr", cfg.lr, "ADAM learning rate")->capture_default_str();
    train->add_option("--eps", cfg.eps, "ADAM epsilon")->capture_default_str();
    train->add_option("--threads", cfg.threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
    train->add_option("--out", cfg.out, "Trace CSV (seed,iteration,d1)");
    train->add_option("--summary", cfg.summary, "Summary JSON (default stdout)");

    auto* bench = app.add_subcommand("bench", "Time sorted vs quadratic Cramér kernels");
    bench->add_option("--sizes", cfg.sizes, "Comma-separated N ladder")->delimiter(',');
    bench->add_option("--reps", cfg.reps, "Timed repetitions per size")->capture_default_str();
    bench->add_option("--out", cfg.out, "Output CSV (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(e.what());
    }
    cfg.subcommand = app.get_subcommands().front()->get_name();
    return cfg;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.subcommand == "loss") return cmd_loss(cfg, out);
        if (cfg.subcommand == "grad") return cmd_grad(cfg, out);
        if (cfg.subcommand == "project") return cmd_project(cfg, out);
        if (cfg.subcommand == "fixed-point") return cmd_fixed_point(cfg, out);
        if (cfg.subcommand == "contract-check") return cmd_contract_check(cfg, out, err);
        if (cfg.subcommand == "train-synthetic") return cmd_train_synthetic(cfg, out);
        if (cfg.subcommand == "bench") return cmd_bench(cfg, out);
        err << "error: unknown subcommand '" << cfg.subcommand << "'\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::optional<RunConfig> cfg;
    try {
        cfg = parse_args(args, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    if (!cfg) return 0;
    return dispatch(*cfg, out, err);
}

}  // namespace crdrl::cli
