#include "ids/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ids {

bool is_probability_vector(std::span<const double> v, double tol) {
    double total = 0.0;
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) { return false; }
        total += x;
    }
    return std::abs(total - 1.0) <= tol;
}

namespace {

void require_shape(const MdpShape& shape) {
    if (shape.states == 0 || shape.actions == 0 || shape.horizon == 0) {
        throw std::invalid_argument("MDP dimensions must be positive");
    }
}

} // namespace

TabularMdp::TabularMdp(MdpShape shape, std::vector<double> transitions, std::vector<double> rewards,
                       std::size_t initial_state)
    : shape_(shape), transitions_(std::move(transitions)), rewards_(std::move(rewards)),
      initial_state_(initial_state) {
    require_shape(shape_);
    if (transitions_.size() != shape_.transition_size()) {
        throw std::invalid_argument("transition tensor must have H*S*A*S entries");
    }
    if (rewards_.size() != shape_.reward_size()) {
        throw std::invalid_argument("reward tensor must have H*S*A entries");
    }
    if (initial_state_ >= shape_.states) { throw std::invalid_argument("initial state out of range"); }
    for (std::size_t h = 0; h < shape_.horizon; ++h) {
        for (std::size_t s = 0; s < shape_.states; ++s) {
            for (std::size_t a = 0; a < shape_.actions; ++a) {
                if (!is_probability_vector(next_state_probs(h, s, a))) {
                    throw std::invalid_argument("transition row (h=" + std::to_string(h) + ", s=" +
                                                std::to_string(s) + ", a=" + std::to_string(a) +
                                                ") is not a probability vector");
                }
            }
        }
    }
    for (double r : rewards_) {
        if (!(r >= 0.0 && r <= 1.0)) { throw std::invalid_argument("rewards must lie in [0,1]"); }
    }
}

bool TabularMdp::same_known_parts(const TabularMdp& other) const {
    return shape_ == other.shape_ && initial_state_ == other.initial_state_ &&
           rewards_ == other.rewards_;
}

StationaryPolicy::StationaryPolicy(MdpShape shape, std::vector<double> probs)
    : shape_(shape), probs_(std::move(probs)) {
    require_shape(shape_);
    if (probs_.size() != shape_.reward_size()) {
        throw std::invalid_argument("policy tensor must have H*S*A entries");
    }
    deterministic_ = true;
    for (std::size_t h = 0; h < shape_.horizon; ++h) {
        for (std::size_t s = 0; s < shape_.states; ++s) {
            auto row = action_probs(h, s);
            if (!is_probability_vector(row)) {
                throw std::invalid_argument("policy row is not a probability vector");
            }
            if (std::count(row.begin(), row.end(), 1.0) != 1) { deterministic_ = false; }
        }
    }
}

StationaryPolicy StationaryPolicy::deterministic(MdpShape shape, std::span<const std::size_t> actions) {
    if (actions.size() != shape.horizon * shape.states) {
        throw std::invalid_argument("deterministic policy needs H*S actions");
    }
    std::vector<double> probs(shape.reward_size(), 0.0);
    for (std::size_t h = 0; h < shape.horizon; ++h) {
        for (std::size_t s = 0; s < shape.states; ++s) {
            std::size_t a = actions[h * shape.states + s];
            if (a >= shape.actions) { throw std::invalid_argument("action index out of range"); }
            probs[shape.sa_index(h, s, a)] = 1.0;
        }
    }
    return StationaryPolicy(shape, std::move(probs));
}

StationaryPolicy StationaryPolicy::uniform(MdpShape shape) {
    return StationaryPolicy(shape, std::vector<double>(shape.reward_size(), 1.0 / double(shape.actions)));
}

std::size_t StationaryPolicy::action(std::size_t h, std::size_t s) const {
    auto row = action_probs(h, s);
    return std::size_t(std::max_element(row.begin(), row.end()) - row.begin());
}

PolicyMixture::PolicyMixture(std::vector<StationaryPolicy> base, std::vector<double> weights)
    : base_(std::move(base)), weights_(std::move(weights)) {
    if (base_.empty() || base_.size() != weights_.size()) {
        throw std::invalid_argument("mixture needs one weight per base policy");
    }
    if (!is_probability_vector(weights_)) {
        throw std::invalid_argument("mixture weights must form a probability vector");
    }
    for (const auto& p : base_) {
        if (!(p.shape() == base_.front().shape())) {
            throw std::invalid_argument("mixture base policies must share a shape");
        }
    }
}

PolicyMixture::PolicyMixture(StationaryPolicy single)
    : PolicyMixture(std::vector<StationaryPolicy>{std::move(single)}, std::vector<double>{1.0}) {}

double Trajectory::total_reward() const {
    double total = 0.0;
    for (const auto& step : steps) { total += step.reward; }
    return total;
}

namespace {

double expected_next_value(const TabularMdp& mdp, std::size_t h, std::size_t s, std::size_t a,
                           std::span<const double> next_values) {
    auto row = mdp.next_state_probs(h, s, a);
    double total = 0.0;
    for (std::size_t next = 0; next < row.size(); ++next) { total += row[next] * next_values[next]; }
    return total;
}

void require_reward_table(const TabularMdp& mdp, std::span<const double> rewards) {
    if (rewards.size() != mdp.shape().reward_size()) {
        throw std::invalid_argument("reward table must have H*S*A entries");
    }
}

} // namespace

PlanResult backward_induction(const TabularMdp& mdp) { return backward_induction(mdp, mdp.rewards()); }

PlanResult backward_induction(const TabularMdp& mdp, std::span<const double> rewards) {
    require_reward_table(mdp, rewards);
    const auto& shape = mdp.shape();
    ValueTables values{shape, std::vector<double>((shape.horizon + 1) * shape.states, 0.0),
                       std::vector<double>(shape.reward_size(), 0.0)};
    std::vector<std::size_t> actions(shape.horizon * shape.states, 0);

    for (std::size_t h = shape.horizon; h-- > 0;) {
        auto next = values.layer(h + 1);
        for (std::size_t s = 0; s < shape.states; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_action = 0;
            for (std::size_t a = 0; a < shape.actions; ++a) {
                const std::size_t idx = shape.sa_index(h, s, a);
                const double q = rewards[idx] + expected_next_value(mdp, h, s, a, next);
                values.q[idx] = q;
                // strict comparison keeps the lowest index on ties
                if (q > best) {
                    best = q;
                    best_action = a;
                }
            }
            values.v[h * shape.states + s] = best;
            actions[h * shape.states + s] = best_action;
        }
    }
    return {std::move(values), StationaryPolicy::deterministic(shape, actions)};
}

ValueTables evaluate_policy(const TabularMdp& mdp, const StationaryPolicy& policy) {
    return evaluate_policy(mdp, policy, mdp.rewards());
}

ValueTables evaluate_policy(const TabularMdp& mdp, const StationaryPolicy& policy,
                            std::span<const double> rewards) {
    require_reward_table(mdp, rewards);
    const auto& shape = mdp.shape();
    if (!(policy.shape() == shape)) { throw std::invalid_argument("policy shape does not match MDP"); }
    ValueTables values{shape, std::vector<double>((shape.horizon + 1) * shape.states, 0.0),
                       std::vector<double>(shape.reward_size(), 0.0)};
    for (std::size_t h = shape.horizon; h-- > 0;) {
        auto next = values.layer(h + 1);
        for (std::size_t s = 0; s < shape.states; ++s) {
            double v = 0.0;
            for (std::size_t a = 0; a < shape.actions; ++a) {
                const std::size_t idx = shape.sa_index(h, s, a);
                const double q = rewards[idx] + expected_next_value(mdp, h, s, a, next);
                values.q[idx] = q;
                v += policy.prob(h, s, a) * q;
            }
            values.v[h * shape.states + s] = v;
        }
    }
    return values;
}

double initial_value(const TabularMdp& mdp, const StationaryPolicy& policy) {
    return evaluate_policy(mdp, policy).value(0, mdp.initial_state());
}

double initial_value(const TabularMdp& mdp, const PolicyMixture& policy) {
    double total = 0.0;
    for (std::size_t i = 0; i < policy.size(); ++i) {
        if (policy.weights()[i] > 0.0) { total += policy.weights()[i] * initial_value(mdp, policy.base()[i]); }
    }
    return total;
}

OccupancyMeasure occupancy_measure(const TabularMdp& mdp, const StationaryPolicy& policy) {
    const auto& shape = mdp.shape();
    if (!(policy.shape() == shape)) { throw std::invalid_argument("policy shape does not match MDP"); }
    OccupancyMeasure occ{shape, std::vector<double>(shape.reward_size(), 0.0)};
    std::vector<double> state_dist(shape.states, 0.0);
    state_dist[mdp.initial_state()] = 1.0;
    for (std::size_t h = 0; h < shape.horizon; ++h) {
        std::vector<double> next_dist(shape.states, 0.0);
        for (std::size_t s = 0; s < shape.states; ++s) {
            if (state_dist[s] == 0.0) { continue; }
            for (std::size_t a = 0; a < shape.actions; ++a) {
                const double mass = state_dist[s] * policy.prob(h, s, a);
                occ.d[shape.sa_index(h, s, a)] = mass;
                if (mass == 0.0) { continue; }
                auto row = mdp.next_state_probs(h, s, a);
                for (std::size_t next = 0; next < shape.states; ++next) { next_dist[next] += mass * row[next]; }
            }
        }
        state_dist = std::move(next_dist);
    }
    return occ;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) { continue; }
        cumulative += probs[i];
        last_positive = i;
        if (u < cumulative) { return i; }
    }
    // rounding left u above the accumulated mass
    return last_positive;
}

Trajectory simulate_episode(const TabularMdp& mdp, const StationaryPolicy& policy, Rng& rng) {
    const auto& shape = mdp.shape();
    if (!(policy.shape() == shape)) { throw std::invalid_argument("policy shape does not match MDP"); }
    Trajectory traj;
    traj.steps.reserve(shape.horizon);
    std::size_t s = mdp.initial_state();
    for (std::size_t h = 0; h < shape.horizon; ++h) {
        const std::size_t a = sample_index(policy.action_probs(h, s), rng);
        traj.steps.push_back({s, a, mdp.reward(h, s, a)});
        s = sample_index(mdp.next_state_probs(h, s, a), rng);
    }
    traj.final_state = s;
    return traj;
}

Trajectory simulate_episode(const TabularMdp& mdp, const PolicyMixture& policy, Rng& rng) {
    const std::size_t which = sample_index(policy.weights(), rng);
    return simulate_episode(mdp, policy.base()[which], rng);
}

double bellman_residual_rhs(const TabularMdp& env_a, const TabularMdp& env_b, const StationaryPolicy& policy) {
    if (!env_a.same_known_parts(env_b)) {
        throw std::invalid_argument("environments must share shape, rewards and initial state");
    }
    const auto& shape = env_a.shape();
    const ValueTables values_a = evaluate_policy(env_a, policy);
    const OccupancyMeasure occ_b = occupancy_measure(env_b, policy);
    double total = 0.0;
    for (std::size_t h = 0; h < shape.horizon; ++h) {
        auto next = values_a.layer(h + 1);
        for (std::size_t s = 0; s < shape.states; ++s) {
            for (std::size_t a = 0; a < shape.actions; ++a) {
                const double weight = occ_b.at(h, s, a);
                if (weight == 0.0) { continue; }
                auto row_a = env_a.next_state_probs(h, s, a);
                auto row_b = env_b.next_state_probs(h, s, a);
                double diff = 0.0;
                for (std::size_t next_s = 0; next_s < shape.states; ++next_s) {
                    diff += (row_a[next_s] - row_b[next_s]) * next[next_s];
                }
                total += weight * diff;
            }
        }
    }
    return total;
}

} // namespace ids
