#include "ids/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ids {

namespace {

struct OptimalSolution {
    PlanResult plan;
    double value = 0.0; // V*_1(s1)
};

std::vector<OptimalSolution> solve_all(const FiniteSupportPrior& prior) {
    std::vector<OptimalSolution> out;
    out.reserve(prior.size());
    for (const auto& env : prior.envs()) {
        auto plan = backward_induction(env);
        const double v = plan.values.value(0, env.initial_state());
        out.push_back({std::move(plan), v});
    }
    return out;
}

// cross[i][t] = V^{env_i}_{1, pi*_t}(s1)
std::vector<std::vector<double>> cross_values(const FiniteSupportPrior& prior,
                                              const std::vector<OptimalSolution>& optimal) {
    std::vector<std::vector<double>> cross(prior.size(), std::vector<double>(prior.size()));
    for (std::size_t i = 0; i < prior.size(); ++i) {
        for (std::size_t t = 0; t < prior.size(); ++t) {
            cross[i][t] = i == t ? optimal[i].value : initial_value(prior.env(i), optimal[t].plan.greedy);
        }
    }
    return cross;
}

std::int64_t quantize(double value, double width) { return std::int64_t(std::floor(value / width)); }

} // namespace

double covering_budget(const MdpShape& shape, double epsilon) {
    const double S = double(shape.states), A = double(shape.actions), H = double(shape.horizon);
    return S * A * H * std::log(4.0 * H * H / epsilon) + S * std::log(2.0 * H * std::sqrt(S) / epsilon + 1.0);
}

Partition build_partition(const FiniteSupportPrior& prior, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("distortion tolerance epsilon must be positive");
    }
    const MdpShape& shape = prior.shape();
    const double H = double(shape.horizon);
    const double backup_width = epsilon / (2.0 * H);
    const double vector_width = epsilon / (2.0 * H * std::sqrt(double(shape.states)));

    const auto optimal = solve_all(prior);
    std::map<std::vector<std::int64_t>, std::vector<std::size_t>> groups;
    std::vector<const std::vector<std::size_t>*> group_order;

    for (std::size_t i = 0; i < prior.size(); ++i) {
        const auto& env = prior.env(i);
        const auto& values = optimal[i].plan.values;
        std::vector<std::int64_t> key;
        key.reserve(shape.reward_size() + shape.horizon * shape.states);
        for (std::size_t h = 0; h < shape.horizon; ++h) {
            for (std::size_t s = 0; s < shape.states; ++s) {
                for (std::size_t a = 0; a < shape.actions; ++a) {
                    // <P_h(.|s,a), V*_{h+1}> = Q*_h(s,a) - r_h(s,a)
                    key.push_back(quantize(values.q_value(h, s, a) - env.reward(h, s, a), backup_width));
                }
            }
        }
        for (std::size_t h = 1; h <= shape.horizon; ++h) {
            for (std::size_t s = 0; s < shape.states; ++s) {
                key.push_back(quantize(values.value(h, s) / H, vector_width));
            }
        }
        auto [it, inserted] = groups.try_emplace(std::move(key));
        if (inserted) { group_order.push_back(&it->second); }
        it->second.push_back(i);
    }

    // loss of running pi*_i in env j
    auto loss = [&](std::size_t i, std::size_t j) {
        return optimal[i].value - initial_value(prior.env(j), optimal[i].plan.greedy);
    };

    // The grid alone does not guarantee the tolerance, so each group is split
    // greedily into sub-cells whose members are pairwise within epsilon.
    Partition partition;
    partition.epsilon = epsilon;
    partition.cell_of.resize(prior.size());
    for (const auto* group : group_order) {
        const std::size_t first_cell = partition.cells.size();
        for (std::size_t i : *group) {
            std::size_t target = partition.cells.size();
            for (std::size_t k = first_cell; k < partition.cells.size() && target == partition.cells.size(); ++k) {
                const auto& members = partition.cells[k];
                const bool fits = std::all_of(members.begin(), members.end(), [&](std::size_t m) {
                    return loss(i, m) <= epsilon && loss(m, i) <= epsilon;
                });
                if (fits) { target = k; }
            }
            if (target == partition.cells.size()) { partition.cells.emplace_back(); }
            partition.cells[target].push_back(i);
            partition.cell_of[i] = target;
        }
    }
    return partition;
}

double max_within_cell_distortion(const FiniteSupportPrior& prior, const Partition& partition) {
    const auto optimal = solve_all(prior);
    double worst = 0.0;
    for (const auto& cell : partition.cells) {
        for (std::size_t i : cell) {
            for (std::size_t j : cell) {
                if (i == j) { continue; }
                const double loss = optimal[i].value - initial_value(prior.env(j), optimal[i].plan.greedy);
                worst = std::max(worst, loss);
            }
        }
    }
    return worst;
}

DominancePair two_point_dominate(std::span<const double> a, std::span<const double> b, std::span<const double> p) {
    const std::size_t n = a.size();
    if (n == 0 || b.size() != n || p.size() != n) {
        throw std::invalid_argument("two_point_dominate needs three nonempty sequences of equal length");
    }
    if (!is_probability_vector(p, 1e-9)) { throw std::invalid_argument("weights must form a probability vector"); }
    const double mean_a = std::inner_product(a.begin(), a.end(), p.begin(), 0.0);
    const double mean_b = std::inner_product(b.begin(), b.end(), p.begin(), 0.0);

    // feasible r for r x_j + (1-r) x_k <= target + tol, intersected into [lo, hi];
    // the slack absorbs rounding when the mean sits exactly on a segment
    auto restrict = [](double xj, double xk, double target, double& lo, double& hi) {
        const double tol = 1e-13 * (1.0 + std::abs(target));
        const double slope = xj - xk;
        const double room = target - xk + tol;
        if (slope > 0.0) {
            hi = std::min(hi, room / slope);
        } else if (slope < 0.0) {
            lo = std::max(lo, room / slope);
        } else if (room < 0.0) {
            hi = -1.0;
        }
    };

    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j; k < n; ++k) {
            double lo = 0.0, hi = 1.0;
            restrict(a[j], a[k], mean_a, lo, hi);
            restrict(b[j], b[k], mean_b, lo, hi);
            if (lo <= hi) { return {j, k, j == k ? 1.0 : hi}; }
        }
    }
    throw std::logic_error("no dominating pair found; the sequences or weights are malformed");
}

SurrogateLaw build_surrogate(const Partition& partition, const FiniteSupportPrior& posterior) {
    if (partition.cell_of.size() != posterior.size()) {
        throw std::invalid_argument("partition and posterior must share the same support");
    }
    const auto optimal = solve_all(posterior);
    const auto cross = cross_values(posterior, optimal);
    const auto probs = posterior.probs();

    SurrogateLaw law;
    law.cells.resize(partition.num_cells());
    for (std::size_t k = 0; k < partition.num_cells(); ++k) {
        const auto& members = partition.cells[k];
        double mass = 0.0;
        for (std::size_t i : members) { mass += probs[i]; }
        if (!(mass > 0.0)) { continue; }

        std::vector<double> a(members.size()), p(members.size());
        for (std::size_t m = 0; m < members.size(); ++m) {
            const std::size_t i = members[m];
            // E over the posterior of the value of pi*_E when run in env i
            double expected = 0.0;
            for (std::size_t t = 0; t < posterior.size(); ++t) { expected += probs[t] * cross[i][t]; }
            a[m] = expected;
            p[m] = probs[i] / mass;
        }
        const DominancePair pick = two_point_dominate(a, a, p);
        law.cells[k] = DominancePair{members[pick.first], members[pick.second], pick.weight};
    }
    return law;
}

double distortion_check(const Partition& partition, const SurrogateLaw& law, const FiniteSupportPrior& posterior) {
    const auto optimal = solve_all(posterior);
    const auto cross = cross_values(posterior, optimal);
    const auto probs = posterior.probs();
    const std::size_t n = posterior.size();

    // E[V^{X}_{pi_TS}] for a fixed environment X, pi_TS = pi*_t with t ~ posterior
    auto ts_value = [&](std::size_t x) {
        double total = 0.0;
        for (std::size_t t = 0; t < n; ++t) { total += probs[t] * cross[x][t]; }
        return total;
    };

    double true_gap = 0.0;
    double surrogate_gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (probs[i] == 0.0) { continue; }
        true_gap += probs[i] * (cross[i][i] - ts_value(i));
        const auto& pick = law.cells.at(partition.cell_of[i]);
        if (!pick) { throw std::logic_error("surrogate law missing for a cell with posterior mass"); }
        const double w = pick->weight;
        const double via_first = cross[pick->first][i] - ts_value(pick->first);
        const double via_second = cross[pick->second][i] - ts_value(pick->second);
        surrogate_gap += probs[i] * (w * via_first + (1.0 - w) * via_second);
    }
    return true_gap - surrogate_gap;
}

InfoTarget partition_target(const Partition& partition) {
    return InfoTarget::partition_cell(partition.cell_of, partition.num_cells());
}

InfoTarget surrogate_target(const Partition& partition, const SurrogateLaw& law) {
    const std::size_t n = partition.cell_of.size();
    std::vector<std::vector<double>> channel(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = partition.cell_of[i];
        const auto& pick = law.cells.at(k);
        if (!pick) {
            // no posterior mass in this cell, so the column never contributes
            channel[partition.cells[k].front()][i] = 1.0;
            continue;
        }
        channel[pick->first][i] += pick->weight;
        channel[pick->second][i] += 1.0 - pick->weight;
    }
    return InfoTarget(std::move(channel));
}

} // namespace ids
