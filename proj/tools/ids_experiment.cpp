// Command-line driver: runs seeded Bayesian-regret experiments and writes the
// per-episode and aggregate CSV files (plus an optional SVG plot).

#include "ids/harness.hpp"
#include "ids/text_format.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitRuntime = 1;

std::optional<double> parse_lambda(const std::string& text) {
    if (text == "auto") { return std::nullopt; }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ids::ConfigError("--lambda expects 'auto' or a number, got '" + text + "'");
    }
    return value;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Run information-directed sampling and Thompson sampling experiments on tabular MDPs"};
    app.set_config("--config", "", "key=value file; command-line flags take precedence");

    std::string env = "dirichlet";
    std::string agent = "ts";
    std::string lambda = "auto";
    std::string out_dir = "out";
    bool emit_plots = false;
    ids::ExperimentConfig config;

    app.add_option("--env", env, "dirichlet | chain | finite:PATH")->capture_default_str();
    app.add_option("--agent", agent, "ts | vanilla-ids | regularized-ids | surrogate-ids | uniform")
        ->capture_default_str();
    app.add_option("--S", config.states, "number of states (ignored for finite:PATH)")->capture_default_str();
    app.add_option("--A", config.actions, "number of actions (ignored for finite:PATH)")->capture_default_str();
    app.add_option("--H", config.horizon, "horizon (ignored for finite:PATH)")->capture_default_str();
    app.add_option("--episodes", config.episodes, "episodes per run, L >= 2")->capture_default_str();
    app.add_option("--runs", config.runs, "independent seeded runs")->capture_default_str();
    app.add_option("--seed", config.seed, "base seed")->capture_default_str();
    app.add_option("--lambda", lambda, "regularization weight: auto | FLOAT")->capture_default_str();
    app.add_option("--mc-samples", config.agent.mc_samples, "posterior draws for regret estimates")
        ->capture_default_str();
    app.add_option("--candidates", config.agent.candidate_budget, "candidate policy budget for the IDS agents")
        ->capture_default_str();
    app.add_option("--epsilon", config.agent.epsilon, "distortion tolerance for surrogate-IDS")
        ->capture_default_str();
    app.add_option("--prior-count", config.env.prior_count, "symmetric Dirichlet pseudo-count")
        ->capture_default_str();
    app.add_option("--threads", config.threads, "worker threads across runs")->capture_default_str();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_flag("--emit-plots", emit_plots, "also write cumulative_regret.svg");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const double prior_count = config.env.prior_count;
        config.env = ids::parse_env_spec(env);
        config.env.prior_count = prior_count;
        config.agent.kind = ids::parse_agent_kind(agent);
        config.agent.fixed_lambda = parse_lambda(lambda);

        const ids::ExperimentResult result = ids::run_experiment(config);
        ids::emit_outputs(result, out_dir, emit_plots);

        const auto rows = ids::aggregate(result);
        const auto& last = rows.back();
        std::printf("agent=%s S=%zu A=%zu H=%zu L=%zu runs=%zu\n", std::string(ids::agent_name(config.agent.kind)).c_str(),
                    result.config.states, result.config.actions, result.config.horizon, result.config.episodes,
                    result.config.runs);
        std::printf("mean cumulative regret %.6g (se %.3g)\n", last.mean_cum_regret, last.se_cum_regret);
        std::printf("bounds: vanilla %.6g, regularized %.6g, surrogate %.6g\n", result.overlays.vanilla,
                    result.overlays.regularized, result.overlays.surrogate);
        std::printf("wrote %s\n", out_dir.c_str());
        return 0;
    } catch (const ids::BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kExitBudget;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
