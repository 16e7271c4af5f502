#include "ids/agents.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace ids {

AgentKind parse_agent_kind(std::string_view name) {
    if (name == "ts") { return AgentKind::thompson; }
    if (name == "vanilla-ids") { return AgentKind::vanilla_ids; }
    if (name == "regularized-ids") { return AgentKind::regularized_ids; }
    if (name == "surrogate-ids") { return AgentKind::surrogate_ids; }
    if (name == "uniform") { return AgentKind::uniform; }
    throw ConfigError("unknown agent '" + std::string(name) +
                      "' (expected ts, vanilla-ids, regularized-ids, surrogate-ids or uniform)");
}

std::string_view agent_name(AgentKind kind) {
    switch (kind) {
    case AgentKind::thompson: return "ts";
    case AgentKind::vanilla_ids: return "vanilla-ids";
    case AgentKind::regularized_ids: return "regularized-ids";
    case AgentKind::surrogate_ids: return "surrogate-ids";
    case AgentKind::uniform: return "uniform";
    }
    return "unknown";
}

void AgentConfig::validate() const {
    if (mc_samples == 0) { throw ConfigError("mc-samples must be at least 1"); }
    if (candidate_budget == 0) { throw ConfigError("candidates must be at least 1"); }
    if (fixed_lambda && !(*fixed_lambda >= 0.0 && std::isfinite(*fixed_lambda))) {
        throw ConfigError("lambda must be a finite nonnegative number or 'auto'");
    }
    if (kind == AgentKind::surrogate_ids && !(epsilon > 0.0 && std::isfinite(epsilon))) {
        throw ConfigError("epsilon must be positive for the surrogate agent");
    }
}

namespace {

double pair_ratio(double numerator, double gain) {
    if (numerator <= 0.0) { return 0.0; }
    if (gain <= 0.0) { return kInfiniteRatio; }
    return numerator * numerator / gain;
}

struct PairOptimum {
    double weight = 1.0;
    double ratio = kInfiniteRatio;
};

// Minimizes max(a + b q, 0)^2 / (c + d q) over q in [0,1]; q weighs the
// first policy of the pair.
PairOptimum minimize_pair(double a, double b, double c, double d) {
    std::array<double, 4> qs{1.0, 0.0, -1.0, -1.0};
    if (b != 0.0) {
        qs[2] = -a / b;
        if (d != 0.0) { qs[3] = a / b - 2.0 * c / d; }
    }
    PairOptimum best;
    for (double q : qs) {
        if (!(q >= 0.0 && q <= 1.0)) { continue; }
        const double value = pair_ratio(a + b * q, c + d * q);
        if (value < best.ratio) { best = {q, value}; }
    }
    return best;
}

double mixture_of(double q, double x, double y) { return q * x + (1.0 - q) * y; }

struct CandidateScores {
    std::vector<double> regrets;
    std::vector<double> gains;
};

template <class GainFn>
EpisodeDecision assemble_ids_decision(const std::vector<StationaryPolicy>& menu, const CandidateScores& scores,
                                      double offset, const RegretModel& model, GainFn gain_of) {
    const TwoPointSolution sol = minimize_two_point_ratio(scores.regrets, scores.gains, offset);
    Diagnostics diag;
    diag.candidate_count = menu.size();
    if (sol.degenerate) {
        StationaryPolicy greedy = backward_induction(model.mean()).greedy;
        diag.regret_estimate = std::max(model.regret(greedy), 0.0);
        const auto it = std::find(menu.begin(), menu.end(), greedy);
        diag.info_gain = it != menu.end() ? scores.gains[std::size_t(it - menu.begin())] : gain_of(greedy);
        diag.info_ratio = info_ratio(diag.regret_estimate, diag.info_gain, offset);
        return {PolicyMixture(std::move(greedy)), diag};
    }
    diag.regret_estimate = mixture_of(sol.weight, scores.regrets[sol.first], scores.regrets[sol.second]);
    diag.info_gain = mixture_of(sol.weight, scores.gains[sol.first], scores.gains[sol.second]);
    diag.info_ratio = sol.ratio;
    if (sol.first == sol.second) { return {PolicyMixture(menu[sol.first]), diag}; }
    return {PolicyMixture({menu[sol.first], menu[sol.second]}, {sol.weight, 1.0 - sol.weight}), diag};
}

// Diagnostics shared by the single-policy agents.
Diagnostics score_single(const StationaryPolicy& policy, const RegretModel& model, const InfoGainTable& table) {
    Diagnostics diag;
    diag.regret_estimate = std::max(model.regret(policy), 0.0);
    diag.info_gain = info_gain_policy(table, model.mean(), policy);
    diag.info_ratio = info_ratio(diag.regret_estimate, diag.info_gain);
    diag.candidate_count = 1;
    return diag;
}

} // namespace

TwoPointSolution minimize_two_point_ratio(std::span<const double> regrets, std::span<const double> gains,
                                          double offset) {
    const std::size_t n = regrets.size();
    if (n == 0 || gains.size() != n) {
        throw std::invalid_argument("ratio minimization needs equally sized, nonempty regret and gain lists");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(gains[i] >= 0.0)) { throw std::invalid_argument("information gains must be nonnegative"); }
    }

    bool all_infinite = true;
    bool all_zero = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = pair_ratio(regrets[i] - offset, gains[i]);
        all_infinite = all_infinite && r == kInfiniteRatio;
        all_zero = all_zero && r == 0.0;
    }
    if (all_infinite || all_zero) {
        return {0, 0, 1.0, all_zero ? 0.0 : kInfiniteRatio, true};
    }

    TwoPointSolution best{0, 0, 1.0, kInfiniteRatio, false};
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            PairOptimum opt;
            if (i == j) {
                opt = {1.0, pair_ratio(regrets[i] - offset, gains[i])};
            } else {
                opt = minimize_pair(regrets[j] - offset, regrets[i] - regrets[j], gains[j], gains[i] - gains[j]);
            }
            if (!found || opt.ratio < best.ratio) {
                found = true;
                if (opt.weight == 1.0) {
                    best = {i, i, 1.0, opt.ratio, false};
                } else if (opt.weight == 0.0) {
                    best = {j, j, 1.0, opt.ratio, false};
                } else {
                    best = {i, j, opt.weight, opt.ratio, false};
                }
            }
        }
    }
    return best;
}

double deterministic_policy_count(const MdpShape& shape) {
    return std::pow(double(shape.actions), double(shape.states * shape.horizon));
}

std::vector<StationaryPolicy> enumerate_deterministic_policies(const MdpShape& shape, double limit) {
    const double count = deterministic_policy_count(shape);
    if (count > limit) {
        throw BudgetExceeded("enumerating " + std::to_string(count) + " deterministic policies exceeds the limit");
    }
    const std::size_t digits = shape.states * shape.horizon;
    std::vector<std::size_t> actions(digits, 0);
    std::vector<StationaryPolicy> out;
    out.reserve(std::size_t(count));
    while (true) {
        out.push_back(StationaryPolicy::deterministic(shape, actions));
        // increment with the last digit fastest
        std::size_t pos = digits;
        while (pos > 0) {
            --pos;
            if (++actions[pos] < shape.actions) { break; }
            actions[pos] = 0;
            if (pos == 0) { return out; }
        }
        if (digits == 0) { return out; }
    }
}

std::vector<StationaryPolicy> candidate_menu(const Posterior& posterior, std::size_t budget, Rng& rng) {
    const MdpShape shape = shape_of(posterior);
    if (deterministic_policy_count(shape) <= double(budget)) { return enumerate_deterministic_policies(shape); }
    std::vector<StationaryPolicy> menu;
    menu.push_back(backward_induction(mean_env(posterior)).greedy);
    for (std::size_t k = 1; k < budget; ++k) {
        StationaryPolicy candidate = backward_induction(sample_env(posterior, rng)).greedy;
        if (std::find(menu.begin(), menu.end(), candidate) == menu.end()) { menu.push_back(std::move(candidate)); }
    }
    return menu;
}

EpisodeDecision ts_step(const Posterior& posterior, const AgentConfig& config, Rng& rng) {
    StationaryPolicy policy = backward_induction(sample_env(posterior, rng)).greedy;
    const RegretModel model = RegretModel::build(posterior, config.mc_samples, rng);
    const InfoGainTable table = info_gain_table(posterior);

    // the sampling distribution's regret and gain are the weighted averages
    // over the posterior draws (or support points)
    const auto policies = model.sampled_policies();
    const auto weights = model.sample_weights();
    double value = 0.0, gain = 0.0;
    for (std::size_t j = 0; j < policies.size(); ++j) {
        if (weights[j] == 0.0) { continue; }
        value += weights[j] * model.expected_value(policies[j]);
        gain += weights[j] * info_gain_policy(table, model.mean(), policies[j]);
    }
    Diagnostics diag;
    diag.regret_estimate = std::max(model.expected_optimal_value() - value, 0.0);
    diag.info_ratio = info_ratio(diag.regret_estimate, gain);
    diag.info_gain = info_gain_policy(table, model.mean(), policy);
    diag.candidate_count = 1;
    return {PolicyMixture(std::move(policy)), diag};
}

EpisodeDecision regularized_ids_step(const Posterior& posterior, std::size_t episodes, const AgentConfig& config,
                                     Rng& rng) {
    const MdpShape shape = shape_of(posterior);
    const double lambda = config.fixed_lambda
                              ? *config.fixed_lambda
                              : lambda_schedule(shape.states, shape.actions, shape.horizon, episodes).lambda;
    const InfoGainTable table = info_gain_table(posterior);
    const TabularMdp mean = mean_env(posterior);
    std::vector<double> augmented(mean.rewards().begin(), mean.rewards().end());
    for (std::size_t k = 0; k < augmented.size(); ++k) { augmented[k] += lambda * table.kappa[k]; }
    StationaryPolicy policy = backward_induction(mean, augmented).greedy;

    const RegretModel model = RegretModel::build(posterior, config.mc_samples, rng);
    Diagnostics diag = score_single(policy, model, table);
    diag.lambda_used = lambda;
    return {PolicyMixture(std::move(policy)), diag};
}

EpisodeDecision vanilla_ids_step(const Posterior& posterior, const AgentConfig& config, Rng& rng) {
    const std::vector<StationaryPolicy> menu = candidate_menu(posterior, config.candidate_budget, rng);
    const RegretModel model = RegretModel::build(posterior, config.mc_samples, rng);
    const InfoGainTable table = info_gain_table(posterior);
    CandidateScores scores;
    for (const auto& policy : menu) {
        scores.regrets.push_back(std::max(model.regret(policy), 0.0));
        scores.gains.push_back(info_gain_policy(table, model.mean(), policy));
    }
    return assemble_ids_decision(menu, scores, 0.0, model, [&](const StationaryPolicy& policy) {
        return info_gain_policy(table, model.mean(), policy);
    });
}

EpisodeDecision surrogate_ids_step(const FiniteSupportPrior& posterior, const Partition& partition,
                                   const AgentConfig& config, Rng& rng) {
    if (!(config.epsilon > 0.0)) { throw ConfigError("epsilon must be positive for the surrogate agent"); }
    if (trajectory_count(posterior.shape()) > kTrajectoryBudget) {
        throw BudgetExceeded("surrogate-IDS needs (S*A)^H <= 1e6 trajectories; use a smaller instance");
    }
    const Posterior wrapped = posterior;
    const std::vector<StationaryPolicy> menu = candidate_menu(wrapped, config.candidate_budget, rng);
    const RegretModel model = RegretModel::build(wrapped, config.mc_samples, rng);
    const InfoTarget target = surrogate_target(partition, build_surrogate(partition, posterior));
    CandidateScores scores;
    for (const auto& policy : menu) {
        scores.regrets.push_back(std::max(model.regret(policy), 0.0));
        scores.gains.push_back(mutual_info_exact(posterior, policy, target));
    }
    return assemble_ids_decision(menu, scores, config.epsilon, model, [&](const StationaryPolicy& policy) {
        return mutual_info_exact(posterior, policy, target);
    });
}

EpisodeDecision uniform_step(const Posterior& posterior, const AgentConfig& config, Rng& rng) {
    StationaryPolicy policy = StationaryPolicy::uniform(shape_of(posterior));
    const RegretModel model = RegretModel::build(posterior, config.mc_samples, rng);
    const Diagnostics diag = score_single(policy, model, info_gain_table(posterior));
    return {PolicyMixture(std::move(policy)), diag};
}

EpisodeDecision decide(const Posterior& posterior, std::size_t episodes, const AgentConfig& config,
                       const Partition* partition, Rng& rng) {
    switch (config.kind) {
    case AgentKind::thompson: return ts_step(posterior, config, rng);
    case AgentKind::vanilla_ids: return vanilla_ids_step(posterior, config, rng);
    case AgentKind::regularized_ids: return regularized_ids_step(posterior, episodes, config, rng);
    case AgentKind::uniform: return uniform_step(posterior, config, rng);
    case AgentKind::surrogate_ids: {
        const auto* finite = std::get_if<FiniteSupportPrior>(&posterior);
        if (finite == nullptr) { throw ConfigError("the surrogate agent requires a finite-support prior"); }
        if (partition == nullptr) { throw ConfigError("the surrogate agent requires a partition of the support"); }
        return surrogate_ids_step(*finite, *partition, config, rng);
    }
    }
    throw ConfigError("unknown agent kind");
}

} // namespace ids
