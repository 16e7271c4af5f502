#include "ids/info_metrics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ids {

InfoGainTable info_gain_table(const Posterior& posterior) {
    const MdpShape shape = shape_of(posterior);
    InfoGainTable table{shape, std::vector<double>(shape.reward_size(), 0.0), fingerprint(posterior)};
    for (std::size_t h = 0; h < shape.horizon; ++h) {
        for (std::size_t s = 0; s < shape.states; ++s) {
            for (std::size_t a = 0; a < shape.actions; ++a) {
                table.kappa[shape.sa_index(h, s, a)] = expected_kl(posterior, h, s, a);
            }
        }
    }
    return table;
}

double info_gain_policy(const InfoGainTable& table, const TabularMdp& mean, const StationaryPolicy& policy) {
    const OccupancyMeasure occ = occupancy_measure(mean, policy);
    double gain = 0.0;
    for (std::size_t k = 0; k < occ.d.size(); ++k) { gain += occ.d[k] * table.kappa[k]; }
    return gain;
}

double info_gain_policy(const InfoGainTable& table, const TabularMdp& mean, const PolicyMixture& policy) {
    double gain = 0.0;
    for (std::size_t i = 0; i < policy.size(); ++i) {
        if (policy.weights()[i] > 0.0) { gain += policy.weights()[i] * info_gain_policy(table, mean, policy.base()[i]); }
    }
    return gain;
}

double info_gain_policy(const Posterior& posterior, const StationaryPolicy& policy) {
    return info_gain_policy(info_gain_table(posterior), mean_env(posterior), policy);
}

InfoTarget::InfoTarget(std::vector<std::vector<double>> channel) : channel_(std::move(channel)) {
    if (channel_.empty()) { throw std::invalid_argument("information target needs at least one outcome"); }
    const std::size_t n = channel_.front().size();
    for (const auto& row : channel_) {
        if (row.size() != n) { throw std::invalid_argument("information target rows must have equal length"); }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (const auto& row : channel_) {
            if (!(row[i] >= 0.0)) { throw std::invalid_argument("information target probabilities must be >= 0"); }
            total += row[i];
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("information target column " + std::to_string(i) + " does not sum to 1");
        }
    }
}

InfoTarget InfoTarget::env_identity(std::size_t num_envs) {
    std::vector<std::vector<double>> channel(num_envs, std::vector<double>(num_envs, 0.0));
    for (std::size_t i = 0; i < num_envs; ++i) { channel[i][i] = 1.0; }
    return InfoTarget(std::move(channel));
}

InfoTarget InfoTarget::partition_cell(std::span<const std::size_t> cell_of, std::size_t num_cells) {
    std::vector<std::vector<double>> channel(num_cells, std::vector<double>(cell_of.size(), 0.0));
    for (std::size_t i = 0; i < cell_of.size(); ++i) {
        if (cell_of[i] >= num_cells) { throw std::invalid_argument("cell index out of range"); }
        channel[cell_of[i]][i] = 1.0;
    }
    return InfoTarget(std::move(channel));
}

double trajectory_count(const MdpShape& shape) {
    return std::pow(double(shape.states) * double(shape.actions), double(shape.horizon));
}

namespace {

// Depth-first enumeration of trajectories, carrying the per-environment
// likelihood of the prefix (policy factors included).
class TrajectoryEnumerator {
public:
    TrajectoryEnumerator(const FiniteSupportPrior& prior, const StationaryPolicy& policy, const InfoTarget& target)
        : prior_(prior), policy_(policy), target_(target), shape_(prior.shape()),
          buffers_(shape_.horizon + 1, std::vector<double>(prior.size())) {
        target_marginal_.assign(target_.outcomes(), 0.0);
        for (std::size_t x = 0; x < target_.outcomes(); ++x) {
            for (std::size_t i = 0; i < prior_.size(); ++i) {
                target_marginal_[x] += prior_.probs()[i] * target_.prob(x, i);
            }
        }
    }

    double run() {
        if (target_is_constant()) { return 0.0; }
        auto& root = buffers_[0];
        for (std::size_t i = 0; i < prior_.size(); ++i) { root[i] = prior_.probs()[i]; }
        descend(0, prior_.env(0).initial_state());
        return std::max(info_, 0.0);
    }

private:
    // buffers_[h][i] = p_i * P(prefix up to s_h | env i)
    void descend(std::size_t h, std::size_t s) {
        const auto& weighted = buffers_[h];
        auto& next = buffers_[h + 1];
        for (std::size_t a = 0; a < shape_.actions; ++a) {
            const double pa = policy_.prob(h, s, a);
            if (pa == 0.0) { continue; }
            for (std::size_t s_next = 0; s_next < shape_.states; ++s_next) {
                bool any = false;
                for (std::size_t i = 0; i < prior_.size(); ++i) {
                    next[i] = weighted[i] == 0.0 ? 0.0 : weighted[i] * pa * prior_.env(i).transition(h, s, a, s_next);
                    any = any || next[i] > 0.0;
                }
                if (!any) { continue; }
                if (h + 1 == shape_.horizon) {
                    leaf(next);
                } else {
                    descend(h + 1, s_next);
                }
            }
        }
    }

    // The target law is the same for every env with mass, so it is independent of the trajectory.
    bool target_is_constant() const {
        std::size_t ref = prior_.size();
        for (std::size_t i = 0; i < prior_.size(); ++i) {
            if (prior_.probs()[i] == 0.0) { continue; }
            if (ref == prior_.size()) {
                ref = i;
                continue;
            }
            for (std::size_t x = 0; x < target_.outcomes(); ++x) {
                if (target_.prob(x, i) != target_.prob(x, ref)) { return false; }
            }
        }
        return true;
    }

    void leaf(const std::vector<double>& joint) {
        const double p_traj = std::accumulate(joint.begin(), joint.end(), 0.0);
        for (std::size_t x = 0; x < target_.outcomes(); ++x) {
            if (target_marginal_[x] == 0.0) { continue; }
            double p_joint = 0.0;
            for (std::size_t i = 0; i < joint.size(); ++i) { p_joint += target_.prob(x, i) * joint[i]; }
            if (p_joint > 0.0) { info_ += p_joint * std::log(p_joint / (target_marginal_[x] * p_traj)); }
        }
    }

    const FiniteSupportPrior& prior_;
    const StationaryPolicy& policy_;
    const InfoTarget& target_;
    MdpShape shape_;
    std::vector<std::vector<double>> buffers_;
    std::vector<double> target_marginal_;
    double info_ = 0.0;
};

} // namespace

double mutual_info_exact(const FiniteSupportPrior& prior, const StationaryPolicy& policy, const InfoTarget& target) {
    if (!(policy.shape() == prior.shape())) { throw std::invalid_argument("policy shape does not match prior"); }
    if (target.envs() != prior.size()) { throw std::invalid_argument("information target does not match the support"); }
    if (trajectory_count(prior.shape()) > kTrajectoryBudget) {
        throw BudgetExceeded("exact mutual information needs (S*A)^H <= 1e6 trajectories; use a smaller instance");
    }
    return TrajectoryEnumerator(prior, policy, target).run();
}

double info_ratio(double regret_estimate, double info_gain, double offset) {
    if (info_gain < 0.0) { throw std::invalid_argument("information gain must be nonnegative"); }
    const double excess = std::max(regret_estimate - offset, 0.0);
    if (excess == 0.0) { return 0.0; }
    if (info_gain == 0.0) { return kInfiniteRatio; }
    return excess * excess / info_gain;
}

RegretModel RegretModel::build(const Posterior& posterior, std::size_t mc_samples, Rng& rng) {
    RegretModel model(mean_env(posterior));
    if (const auto* fs = std::get_if<FiniteSupportPrior>(&posterior)) {
        model.support_.assign(fs->envs().begin(), fs->envs().end());
        for (std::size_t i = 0; i < fs->size(); ++i) {
            auto plan = backward_induction(fs->env(i));
            model.expected_optimal_ += fs->probs()[i] * plan.values.value(0, fs->env(i).initial_state());
            model.sampled_policies_.push_back(std::move(plan.greedy));
            model.sample_weights_.push_back(fs->probs()[i]);
        }
        return model;
    }
    if (mc_samples == 0) { throw std::invalid_argument("Monte Carlo sample count must be positive"); }
    const double w = 1.0 / double(mc_samples);
    for (std::size_t j = 0; j < mc_samples; ++j) {
        const TabularMdp draw = sample_env(posterior, rng);
        auto plan = backward_induction(draw);
        model.expected_optimal_ += w * plan.values.value(0, draw.initial_state());
        model.sampled_policies_.push_back(std::move(plan.greedy));
        model.sample_weights_.push_back(w);
    }
    return model;
}

double RegretModel::expected_value(const StationaryPolicy& policy) const {
    if (support_.empty()) { return initial_value(mean_, policy); }
    double total = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (sample_weights_[i] > 0.0) { total += sample_weights_[i] * initial_value(support_[i], policy); }
    }
    return total;
}

double RegretModel::expected_value(const PolicyMixture& policy) const {
    double total = 0.0;
    for (std::size_t i = 0; i < policy.size(); ++i) {
        if (policy.weights()[i] > 0.0) { total += policy.weights()[i] * expected_value(policy.base()[i]); }
    }
    return total;
}

BoundConstants bound_constants(std::size_t states, std::size_t actions, std::size_t horizon, std::size_t episodes) {
    if (states == 0 || actions == 0 || horizon == 0) { throw ConfigError("S, A and H must be at least 1"); }
    if (episodes < 2) { throw ConfigError("the number of episodes L must be at least 2"); }
    if (states * episodes * horizon < 3) { throw ConfigError("S*L*H must be at least 3 so that log(SLH) > 0"); }
    const double S = double(states), A = double(actions), H = double(horizon), L = double(episodes);
    BoundConstants c;
    c.m1 = 2.0 * S * A * H * H * H;
    c.m2 = 2.0 * S * S * A * H * std::log(S * L * H);
    c.states = states;
    c.actions = actions;
    c.horizon = horizon;
    c.episodes = episodes;
    return c;
}

LambdaSchedule lambda_schedule(std::size_t states, std::size_t actions, std::size_t horizon, std::size_t episodes) {
    const BoundConstants c = bound_constants(states, actions, horizon, episodes);
    return {std::sqrt(double(episodes) * c.m1 / c.m2), c};
}

BoundOverlays bound_overlays(std::size_t states, std::size_t actions, std::size_t horizon, std::size_t episodes,
                             double epsilon) {
    const BoundConstants c = bound_constants(states, actions, horizon, episodes);
    const double S = double(states), A = double(actions), H = double(horizon), L = double(episodes);
    if (!(epsilon > 0.0 && epsilon <= 4.0 * H * H)) {
        throw ConfigError("distortion epsilon must lie in (0, 4H^2]");
    }
    BoundOverlays b;
    b.vanilla = std::sqrt(8.0 * S * S * S * A * A * H * H * H * H * L * std::log(S * L * H));
    b.regularized = std::sqrt(1.5 * c.m1 * c.m2 * L);
    b.surrogate = std::sqrt(2.0 * S * S * A * A * H * H * H * H * L * std::log(4.0 * H * L));
    b.log_cover = S * A * H * std::log(4.0 * H * H / epsilon);
    return b;
}

} // namespace ids
