#pragma once

// Tabular finite-horizon MDPs and the dynamic-programming primitives used by
// every agent: planning, policy evaluation, occupancy measures, simulation
// and the value-difference (Bellman residual) decomposition.
//
// Layers are 0-based throughout: h = 0 is the first decision layer and value
// tables carry one extra terminal layer h = H that is identically zero.

#include "ids/common.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ids {

struct MdpShape {
    std::size_t states = 0;
    std::size_t actions = 0;
    std::size_t horizon = 0;

    friend bool operator==(const MdpShape&, const MdpShape&) = default;

    std::size_t transition_size() const { return horizon * states * actions * states; }
    std::size_t reward_size() const { return horizon * states * actions; }

    std::size_t sa_index(std::size_t h, std::size_t s, std::size_t a) const {
        return (h * states + s) * actions + a;
    }
    std::size_t row_offset(std::size_t h, std::size_t s, std::size_t a) const {
        return sa_index(h, s, a) * states;
    }
};

/// Complete known environment: per-layer transition kernels, rewards in [0,1]
/// and a fixed initial state. Immutable after construction.
class TabularMdp {
public:
    /// Throws std::invalid_argument unless every kernel row is a probability
    /// vector (within kProbTolerance), rewards lie in [0,1] and the initial
    /// state is in range. Rows are never renormalized.
    TabularMdp(MdpShape shape, std::vector<double> transitions, std::vector<double> rewards,
               std::size_t initial_state);

    const MdpShape& shape() const { return shape_; }
    std::size_t states() const { return shape_.states; }
    std::size_t actions() const { return shape_.actions; }
    std::size_t horizon() const { return shape_.horizon; }
    std::size_t initial_state() const { return initial_state_; }

    std::span<const double> next_state_probs(std::size_t h, std::size_t s, std::size_t a) const {
        return {transitions_.data() + shape_.row_offset(h, s, a), shape_.states};
    }
    double transition(std::size_t h, std::size_t s, std::size_t a, std::size_t next) const {
        return transitions_[shape_.row_offset(h, s, a) + next];
    }
    double reward(std::size_t h, std::size_t s, std::size_t a) const {
        return rewards_[shape_.sa_index(h, s, a)];
    }

    std::span<const double> transitions() const { return transitions_; }
    std::span<const double> rewards() const { return rewards_; }

    /// True when both environments share shape, rewards and initial state.
    bool same_known_parts(const TabularMdp& other) const;

    friend bool operator==(const TabularMdp&, const TabularMdp&) = default;

private:
    MdpShape shape_;
    std::vector<double> transitions_;
    std::vector<double> rewards_;
    std::size_t initial_state_ = 0;
};

/// Per-layer state -> action distribution.
class StationaryPolicy {
public:
    StationaryPolicy(MdpShape shape, std::vector<double> probs);

    /// One-hot policy from an H*S table of actions.
    static StationaryPolicy deterministic(MdpShape shape, std::span<const std::size_t> actions);
    static StationaryPolicy uniform(MdpShape shape);

    const MdpShape& shape() const { return shape_; }
    bool is_deterministic() const { return deterministic_; }

    std::span<const double> action_probs(std::size_t h, std::size_t s) const {
        return {probs_.data() + shape_.sa_index(h, s, 0), shape_.actions};
    }
    double prob(std::size_t h, std::size_t s, std::size_t a) const {
        return probs_[shape_.sa_index(h, s, a)];
    }
    /// Greedy action; only meaningful for deterministic policies.
    std::size_t action(std::size_t h, std::size_t s) const;

    std::span<const double> probs() const { return probs_; }

    friend bool operator==(const StationaryPolicy&, const StationaryPolicy&) = default;

private:
    MdpShape shape_;
    std::vector<double> probs_;
    bool deterministic_ = false;
};

/// Finite mixture of stationary policies. The executing agent draws one base
/// policy per episode and follows it for the whole episode.
class PolicyMixture {
public:
    PolicyMixture(std::vector<StationaryPolicy> base, std::vector<double> weights);
    explicit PolicyMixture(StationaryPolicy single);

    std::span<const StationaryPolicy> base() const { return base_; }
    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return base_.size(); }

    friend bool operator==(const PolicyMixture&, const PolicyMixture&) = default;

private:
    std::vector<StationaryPolicy> base_;
    std::vector<double> weights_;
};

/// V has (H+1)*S entries with V[H] == 0; Q has H*S*A entries.
struct ValueTables {
    MdpShape shape;
    std::vector<double> v;
    std::vector<double> q;

    double value(std::size_t h, std::size_t s) const { return v[h * shape.states + s]; }
    double q_value(std::size_t h, std::size_t s, std::size_t a) const {
        return q[shape.sa_index(h, s, a)];
    }
    std::span<const double> layer(std::size_t h) const {
        return {v.data() + h * shape.states, shape.states};
    }
};

struct PlanResult {
    ValueTables values;
    StationaryPolicy greedy;
};

/// d[h][s][a] = P(s_h = s, a_h = a) under the policy.
struct OccupancyMeasure {
    MdpShape shape;
    std::vector<double> d;

    double at(std::size_t h, std::size_t s, std::size_t a) const { return d[shape.sa_index(h, s, a)]; }
};

struct Step {
    std::size_t state = 0;
    std::size_t action = 0;
    double reward = 0.0;

    friend bool operator==(const Step&, const Step&) = default;
};

/// One episode: H (state, action, reward) steps plus the state reached after
/// the last action, so that every layer's transition is observed.
struct Trajectory {
    std::vector<Step> steps;
    std::size_t final_state = 0;

    std::size_t next_state(std::size_t h) const {
        return h + 1 < steps.size() ? steps[h + 1].state : final_state;
    }
    double total_reward() const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Optimal values and the greedy policy; ties go to the lowest action index.
PlanResult backward_induction(const TabularMdp& mdp);

/// Same as above with the dynamics of `mdp` but an arbitrary (possibly
/// unbounded) H*S*A reward table.
PlanResult backward_induction(const TabularMdp& mdp, std::span<const double> rewards);

ValueTables evaluate_policy(const TabularMdp& mdp, const StationaryPolicy& policy);
ValueTables evaluate_policy(const TabularMdp& mdp, const StationaryPolicy& policy,
                            std::span<const double> rewards);

/// V_1(s_1) of the policy.
double initial_value(const TabularMdp& mdp, const StationaryPolicy& policy);
/// Weighted V_1(s_1) of a mixture.
double initial_value(const TabularMdp& mdp, const PolicyMixture& policy);

OccupancyMeasure occupancy_measure(const TabularMdp& mdp, const StationaryPolicy& policy);

Trajectory simulate_episode(const TabularMdp& mdp, const StationaryPolicy& policy, Rng& rng);
Trajectory simulate_episode(const TabularMdp& mdp, const PolicyMixture& policy, Rng& rng);

/// sum_h E^{B}_pi[ sum_s' (P_h^A - P_h^B)(s'|s_h,a_h) V^A_{h+1,pi}(s') ], which
/// equals V^A_{1,pi}(s_1) - V^B_{1,pi}(s_1). Throws std::invalid_argument when
/// the two environments differ in shape, rewards or initial state.
double bellman_residual_rhs(const TabularMdp& env_a, const TabularMdp& env_b,
                            const StationaryPolicy& policy);

/// Draws an index from a probability vector.
std::size_t sample_index(std::span<const double> probs, Rng& rng);

/// Checks that `v` is a probability vector within `tol`.
bool is_probability_vector(std::span<const double> v, double tol = kProbTolerance);

} // namespace ids
