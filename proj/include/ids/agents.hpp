#pragma once

// Episode-level policy selectors. Each step maps the current posterior to the
// policy executed in the next episode, together with the diagnostics the
// harness records.

#include "ids/beliefs.hpp"
#include "ids/info_metrics.hpp"
#include "ids/surrogate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ids {

enum class AgentKind { thompson, vanilla_ids, regularized_ids, surrogate_ids, uniform };

/// Accepts "ts", "vanilla-ids", "regularized-ids", "surrogate-ids", "uniform".
/// Throws ConfigError otherwise.
AgentKind parse_agent_kind(std::string_view name);
std::string_view agent_name(AgentKind kind);

struct AgentConfig {
    AgentKind kind = AgentKind::thompson;
    /// Empty means the auto schedule sqrt(L * M1 / M2).
    std::optional<double> fixed_lambda;
    std::size_t mc_samples = 256;
    std::size_t candidate_budget = 32;
    double epsilon = 0.1;

    /// Throws ConfigError on out-of-range fields.
    void validate() const;
};

struct Diagnostics {
    double regret_estimate = 0.0; ///< posterior expected regret entering the ratio, clamped at 0
    double info_gain = 0.0;       ///< information gain of the executed policy
    /// For Thompson sampling this is the ratio of the sampling distribution
    /// itself, not of the single greedy policy that was drawn.
    double info_ratio = 0.0;
    double lambda_used = 0.0;
    std::size_t candidate_count = 0;
};

struct EpisodeDecision {
    PolicyMixture policy;
    Diagnostics diagnostics;
};

/// Minimizer of max(q D_i + (1-q) D_j - offset, 0)^2 / (q g_i + (1-q) g_j)
/// over pairs i <= j and q in [0,1]; `weight` is q, the probability of `first`.
struct TwoPointSolution {
    std::size_t first = 0;
    std::size_t second = 0;
    double weight = 1.0;
    double ratio = 0.0;
    /// Set when every single candidate has ratio +inf or every one has ratio 0;
    /// the agent then falls back to the mean-MDP greedy policy.
    bool degenerate = false;
};

/// Per pair the objective is evaluated at the endpoints, the root of the
/// numerator and the interior stationary point q = a/b - 2c/d of
/// (a + b q)^2 / (c + d q). Ties go to the lowest (first, second) pair.
TwoPointSolution minimize_two_point_ratio(std::span<const double> regrets, std::span<const double> gains,
                                          double offset = 0.0);

/// A^(S*H), as a double to avoid overflow.
double deterministic_policy_count(const MdpShape& shape);

/// Every deterministic stationary policy, enumerated with layer 0, state 0
/// varying slowest. Throws BudgetExceeded above `limit` policies.
std::vector<StationaryPolicy> enumerate_deterministic_policies(const MdpShape& shape, double limit = 1e6);

/// Candidate menu for the IDS agents: every deterministic policy when their
/// count is within the budget, otherwise the mean-MDP greedy policy plus the
/// greedy policies of budget-1 posterior draws (duplicates dropped).
std::vector<StationaryPolicy> candidate_menu(const Posterior& posterior, std::size_t budget, Rng& rng);

EpisodeDecision ts_step(const Posterior& posterior, const AgentConfig& config, Rng& rng);

/// Greedy policy of the mean MDP with rewards r + lambda * expected KL.
EpisodeDecision regularized_ids_step(const Posterior& posterior, std::size_t episodes, const AgentConfig& config,
                                     Rng& rng);

EpisodeDecision vanilla_ids_step(const Posterior& posterior, const AgentConfig& config, Rng& rng);

/// Requires a finite-support posterior; the surrogate law is rebuilt from
/// `partition` on every call. Throws BudgetExceeded when the trajectory
/// enumeration is too large.
EpisodeDecision surrogate_ids_step(const FiniteSupportPrior& posterior, const Partition& partition,
                                   const AgentConfig& config, Rng& rng);

/// Uniformly random policy; the reference baseline.
EpisodeDecision uniform_step(const Posterior& posterior, const AgentConfig& config, Rng& rng);

/// Dispatches on config.kind. `partition` is required for the surrogate agent.
/// Throws ConfigError when the posterior family does not suit the agent.
EpisodeDecision decide(const Posterior& posterior, std::size_t episodes, const AgentConfig& config,
                       const Partition* partition, Rng& rng);

} // namespace ids
