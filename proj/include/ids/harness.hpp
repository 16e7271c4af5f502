#pragma once

// Experiment orchestration: environment generators, the episode loop
// (decide, act on the true environment, update the posterior), Bayesian
// regret bookkeeping over seeded runs and CSV / SVG emission.

#include "ids/agents.hpp"
#include "ids/beliefs.hpp"
#include "ids/info_metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ids {

enum class EnvMode { dirichlet, chain, finite };

struct EnvSpec {
    EnvMode mode = EnvMode::dirichlet;
    std::string path;        ///< prior file for EnvMode::finite
    double prior_count = 1.0; ///< symmetric Dirichlet pseudo-count
};

/// "dirichlet", "chain" or "finite:PATH". Throws ConfigError otherwise.
EnvSpec parse_env_spec(std::string_view text);
std::string env_spec_name(const EnvSpec& spec);

struct ExperimentConfig {
    EnvSpec env;
    std::size_t states = 2;
    std::size_t actions = 2;
    std::size_t horizon = 2;
    std::size_t episodes = 200;
    AgentConfig agent;
    std::size_t runs = 1;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    /// Throws ConfigError on invalid sizes or agent settings.
    void validate() const;
};

/// Stream indices below the run seed seed(base, r).
inline constexpr std::uint64_t kEnvStream = 1;
inline constexpr std::uint64_t kAgentStream = 2;
inline constexpr std::uint64_t kSimulationStream = 3;
/// Stream of the base seed that draws the shared reward table in dirichlet mode.
inline constexpr std::uint64_t kRewardStream = 0xFFFFFFFFULL;

/// Deterministic left/right chain: action 0 moves one state left, action 1
/// one state right, any other action stays; reward 1 for every action taken
/// in the last state, 0 elsewhere; start in state 0.
TabularMdp chain_mdp(const MdpShape& shape);

/// The prior shared by every run: Dirichlet(prior_count) over kernels with
/// uniform [0,1] rewards drawn from the reward stream (dirichlet mode) or the
/// chain's rewards (chain mode), or the finite-support prior read from file.
Posterior make_prior(const ExperimentConfig& config);

/// dirichlet and finite modes draw from `prior`; chain mode returns chain_mdp.
TabularMdp generate_true_env(const ExperimentConfig& config, const Posterior& prior, Rng& rng);

struct EpisodeRecord {
    std::size_t episode = 0; ///< 1-based
    double realized_return = 0.0;
    double regret = 0.0; ///< V*_1(s1) - V_1,pi(s1) on the true env, exact
    double cum_regret = 0.0; ///< running sum of max(regret, 0)
    double info_gain = 0.0;
    double info_ratio = 0.0;
    double lambda = 0.0;
};

struct RunRecord {
    std::size_t run = 0;
    std::vector<EpisodeRecord> episodes;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<RunRecord> runs;
    BoundOverlays overlays;
};

/// Runs are independent and may execute on `config.threads` threads; the
/// result is ordered by run index and does not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// One row per (run, episode).
void write_episode_csv(std::ostream& out, const ExperimentResult& result);
/// Mean and standard error across runs per episode, plus bound overlays.
void write_aggregate_csv(std::ostream& out, const ExperimentResult& result);
/// Static plot of mean cumulative regret against the bound overlays.
void write_regret_svg(std::ostream& out, const ExperimentResult& result);

struct AggregateRow {
    std::size_t episode = 0;
    double mean_regret = 0.0, se_regret = 0.0;
    double mean_cum_regret = 0.0, se_cum_regret = 0.0;
    double mean_info_gain = 0.0;
    double mean_info_ratio = 0.0;
};

std::vector<AggregateRow> aggregate(const ExperimentResult& result);

/// Writes episodes.csv, aggregate.csv and (optionally) cumulative_regret.svg
/// into `out_dir`, creating it if needed. Throws std::runtime_error on I/O failure.
void emit_outputs(const ExperimentResult& result, const std::string& out_dir, bool emit_plots);

} // namespace ids
