#pragma once

// Information-theoretic quantities: per-cell expected KL tables, policy
// information gain, exact mutual information by trajectory enumeration,
// the information ratio, posterior regret estimates and the closed-form
// regret-bound constants.

#include "ids/beliefs.hpp"
#include "ids/mdp.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ids {

/// kappa[h][s][a] = E[KL(P_h(.|s,a) || mean P_h(.|s,a))] for one posterior.
struct InfoGainTable {
    MdpShape shape;
    std::vector<double> kappa;
    std::uint64_t source_id = 0;

    double at(std::size_t h, std::size_t s, std::size_t a) const { return kappa[shape.sa_index(h, s, a)]; }
};

InfoGainTable info_gain_table(const Posterior& posterior);

/// Information gained about the whole environment by one episode of `policy`:
/// sum_h sum_{s,a} d^{mean}_{h}(s,a) kappa[h][s][a].
double info_gain_policy(const Posterior& posterior, const StationaryPolicy& policy);
double info_gain_policy(const InfoGainTable& table, const TabularMdp& mean, const StationaryPolicy& policy);
/// Weighted sum of base-policy gains (one base policy is committed per episode).
double info_gain_policy(const InfoGainTable& table, const TabularMdp& mean, const PolicyMixture& policy);

/// Learning target for exact mutual information, expressed as a channel from
/// the environment index: outcome x is produced with probability
/// channel[x][i] when the true environment is i. Each column sums to 1.
class InfoTarget {
public:
    static InfoTarget env_identity(std::size_t num_envs);
    /// chi = cell_of[i].
    static InfoTarget partition_cell(std::span<const std::size_t> cell_of, std::size_t num_cells);
    explicit InfoTarget(std::vector<std::vector<double>> channel);

    std::size_t outcomes() const { return channel_.size(); }
    std::size_t envs() const { return channel_.empty() ? 0 : channel_.front().size(); }
    double prob(std::size_t outcome, std::size_t env) const { return channel_[outcome][env]; }

private:
    std::vector<std::vector<double>> channel_;
};

/// Maximum (S*A)^H accepted by mutual_info_exact.
inline constexpr double kTrajectoryBudget = 1e6;

/// Number of (state, action) sequences enumerated for this shape, (S*A)^H.
double trajectory_count(const MdpShape& shape);

/// Exact I(chi; trajectory) in nats under the finite-support law, enumerating
/// every trajectory (including the final state). Throws BudgetExceeded when
/// (S*A)^H exceeds kTrajectoryBudget.
double mutual_info_exact(const FiniteSupportPrior& prior, const StationaryPolicy& policy,
                         const InfoTarget& target);

inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

/// max(regret - offset, 0)^2 / info_gain; 0 when the clamped numerator is 0,
/// +inf when only the denominator vanishes. Throws std::invalid_argument on
/// negative information gain.
double info_ratio(double regret_estimate, double info_gain, double offset = 0.0);

/// Posterior expectations of initial-state values.
///
/// Finite support: exact sums over the support. Dirichlet: the expected
/// optimal value is a Monte Carlo average over posterior draws, while the
/// expected value of a fixed policy is the mean-MDP value, which is exact
/// because the rows are independent under the posterior.
class RegretModel {
public:
    static RegretModel build(const Posterior& posterior, std::size_t mc_samples, Rng& rng);

    /// E[V*_1(s_1)].
    double expected_optimal_value() const { return expected_optimal_; }
    /// E[V^E_{1,pi}(s_1)].
    double expected_value(const StationaryPolicy& policy) const;
    double expected_value(const PolicyMixture& policy) const;
    /// E[V* - V_pi], not clamped.
    double regret(const StationaryPolicy& policy) const { return expected_optimal_ - expected_value(policy); }

    /// Optimal policies of the support points / posterior draws with weights;
    /// this is the law of the Thompson-sampling policy.
    std::span<const StationaryPolicy> sampled_policies() const { return sampled_policies_; }
    std::span<const double> sample_weights() const { return sample_weights_; }

    const TabularMdp& mean() const { return mean_; }

private:
    RegretModel(TabularMdp mean) : mean_(std::move(mean)) {}

    TabularMdp mean_;
    // finite support only; empty for Dirichlet posteriors
    std::vector<TabularMdp> support_;
    std::vector<StationaryPolicy> sampled_policies_;
    std::vector<double> sample_weights_;
    double expected_optimal_ = 0.0;
};

struct BoundConstants {
    double m1 = 0.0; ///< 2 S A H^3
    double m2 = 0.0; ///< 2 S^2 A H log(S L H)
    std::size_t states = 0, actions = 0, horizon = 0, episodes = 0;
};

struct LambdaSchedule {
    double lambda = 0.0;
    BoundConstants constants;
};

BoundConstants bound_constants(std::size_t states, std::size_t actions, std::size_t horizon, std::size_t episodes);

/// lambda = sqrt(L * M1 / M2). Throws ConfigError unless S,A,H >= 1, L >= 2
/// and S*L*H >= 3.
LambdaSchedule lambda_schedule(std::size_t states, std::size_t actions, std::size_t horizon, std::size_t episodes);

struct BoundOverlays {
    double vanilla = 0.0;     ///< sqrt(8 S^3 A^2 H^4 L log(SLH))
    double regularized = 0.0; ///< sqrt(3/2 M1 M2 L)
    double surrogate = 0.0;   ///< sqrt(2 S^2 A^2 H^4 L log(4HL))
    double log_cover = 0.0;   ///< S A H log(4 H^2 / epsilon)
};

BoundOverlays bound_overlays(std::size_t states, std::size_t actions, std::size_t horizon, std::size_t episodes,
                             double epsilon);

} // namespace ids
