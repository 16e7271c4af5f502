#include "ids/beliefs.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ids {

DirichletProduct::DirichletProduct(MdpShape shape, std::vector<double> counts, std::vector<double> rewards,
                                   std::size_t initial_state)
    : shape_(shape), counts_(std::move(counts)), rewards_(std::move(rewards)), initial_state_(initial_state) {
    if (shape_.states == 0 || shape_.actions == 0 || shape_.horizon == 0) {
        throw std::invalid_argument("Dirichlet posterior dimensions must be positive");
    }
    if (counts_.size() != shape_.transition_size()) {
        throw std::invalid_argument("Dirichlet counts must have H*S*A*S entries");
    }
    for (double c : counts_) {
        if (!(c > 0.0) || !std::isfinite(c)) { throw std::invalid_argument("Dirichlet counts must be positive"); }
    }
    if (rewards_.size() != shape_.reward_size()) {
        throw std::invalid_argument("reward tensor must have H*S*A entries");
    }
    for (double r : rewards_) {
        if (!(r >= 0.0 && r <= 1.0)) { throw std::invalid_argument("rewards must lie in [0,1]"); }
    }
    if (initial_state_ >= shape_.states) { throw std::invalid_argument("initial state out of range"); }
}

DirichletProduct DirichletProduct::symmetric(MdpShape shape, std::vector<double> rewards,
                                             std::size_t initial_state, double count) {
    return DirichletProduct(shape, std::vector<double>(shape.transition_size(), count), std::move(rewards),
                            initial_state);
}

namespace {

void require_trajectory(const MdpShape& shape, const Trajectory& trajectory) {
    if (trajectory.steps.size() != shape.horizon) {
        throw std::invalid_argument("trajectory length must equal the horizon");
    }
    for (const auto& step : trajectory.steps) {
        if (step.state >= shape.states || step.action >= shape.actions) {
            throw std::invalid_argument("trajectory state/action out of range");
        }
    }
    if (trajectory.final_state >= shape.states) {
        throw std::invalid_argument("trajectory final state out of range");
    }
}

} // namespace

DirichletProduct DirichletProduct::updated(const Trajectory& trajectory) const {
    require_trajectory(shape_, trajectory);
    DirichletProduct next = *this;
    for (std::size_t h = 0; h < shape_.horizon; ++h) {
        const auto& step = trajectory.steps[h];
        next.counts_[shape_.row_offset(h, step.state, step.action) + trajectory.next_state(h)] += 1.0;
    }
    return next;
}

FiniteSupportPrior::FiniteSupportPrior(std::vector<TabularMdp> envs, std::vector<double> probs)
    : envs_(std::move(envs)), probs_(std::move(probs)) {
    if (envs_.empty()) { throw std::invalid_argument("finite-support prior needs at least one environment"); }
    if (probs_.size() != envs_.size() || !is_probability_vector(probs_)) {
        throw std::invalid_argument("finite-support probabilities must form a probability vector");
    }
    for (const auto& env : envs_) {
        if (!env.same_known_parts(envs_.front())) {
            throw std::invalid_argument("finite-support environments must share shape, rewards and initial state");
        }
    }
}

FiniteSupportPrior FiniteSupportPrior::layer_product(MdpShape shape,
                                                     const std::vector<std::vector<LayerOption>>& layers,
                                                     std::vector<double> rewards, std::size_t initial_state) {
    if (layers.size() != shape.horizon) { throw std::invalid_argument("need kernel options for every layer"); }
    const std::size_t block = shape.states * shape.actions * shape.states;
    std::size_t total = 1;
    for (const auto& options : layers) {
        if (options.empty()) { throw std::invalid_argument("every layer needs at least one kernel option"); }
        for (const auto& option : options) {
            if (option.kernel.size() != block) { throw std::invalid_argument("layer kernel must have S*A*S entries"); }
        }
        total *= options.size();
    }

    std::vector<TabularMdp> envs;
    std::vector<double> probs;
    envs.reserve(total);
    probs.reserve(total);
    std::vector<std::size_t> choice(shape.horizon, 0);
    for (std::size_t n = 0; n < total; ++n) {
        std::vector<double> transitions;
        transitions.reserve(shape.transition_size());
        double p = 1.0;
        for (std::size_t h = 0; h < shape.horizon; ++h) {
            const auto& option = layers[h][choice[h]];
            transitions.insert(transitions.end(), option.kernel.begin(), option.kernel.end());
            p *= option.prob;
        }
        envs.emplace_back(shape, std::move(transitions), rewards, initial_state);
        probs.push_back(p);
        // odometer with the last layer fastest
        for (std::size_t h = shape.horizon; h-- > 0;) {
            if (++choice[h] < layers[h].size()) { break; }
            choice[h] = 0;
        }
    }
    const double mass = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& p : probs) { p /= mass; }
    return FiniteSupportPrior(std::move(envs), std::move(probs));
}

double trajectory_likelihood(const TabularMdp& env, const Trajectory& trajectory) {
    double likelihood = 1.0;
    for (std::size_t h = 0; h < trajectory.steps.size(); ++h) {
        const auto& step = trajectory.steps[h];
        likelihood *= env.transition(h, step.state, step.action, trajectory.next_state(h));
        if (likelihood == 0.0) { break; }
    }
    return likelihood;
}

FiniteSupportPrior FiniteSupportPrior::updated(const Trajectory& trajectory) const {
    require_trajectory(shape(), trajectory);
    std::vector<double> weights(envs_.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < envs_.size(); ++i) {
        weights[i] = probs_[i] == 0.0 ? 0.0 : probs_[i] * trajectory_likelihood(envs_[i], trajectory);
        mass += weights[i];
    }
    if (!(mass > 0.0)) {
        throw std::domain_error("trajectory has zero likelihood under every environment; prior is misspecified");
    }
    for (double& w : weights) { w /= mass; }
    return with_probs(std::move(weights));
}

FiniteSupportPrior FiniteSupportPrior::with_probs(std::vector<double> probs) const {
    return FiniteSupportPrior(envs_, std::move(probs));
}

MdpShape shape_of(const Posterior& posterior) {
    return std::visit([](const auto& p) { return p.shape(); }, posterior);
}

std::size_t initial_state_of(const Posterior& posterior) {
    if (const auto* d = std::get_if<DirichletProduct>(&posterior)) { return d->initial_state(); }
    return std::get<FiniteSupportPrior>(posterior).env(0).initial_state();
}

std::vector<double> rewards_of(const Posterior& posterior) {
    if (const auto* d = std::get_if<DirichletProduct>(&posterior)) {
        return {d->rewards().begin(), d->rewards().end()};
    }
    auto r = std::get<FiniteSupportPrior>(posterior).env(0).rewards();
    return {r.begin(), r.end()};
}

Posterior update(const Posterior& posterior, const Trajectory& trajectory) {
    return std::visit([&](const auto& p) -> Posterior { return p.updated(trajectory); }, posterior);
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng) {
    std::vector<double> draw(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        std::gamma_distribution<double> gamma(alpha[i], 1.0);
        draw[i] = gamma(rng);
        total += draw[i];
    }
    if (!(total > 0.0)) {
        // every gamma underflowed (tiny concentrations): the limit law is a
        // vertex chosen with probability alpha_i / alpha_0
        const double alpha0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
        std::vector<double> mean(alpha.size());
        for (std::size_t i = 0; i < alpha.size(); ++i) { mean[i] = alpha[i] / alpha0; }
        std::fill(draw.begin(), draw.end(), 0.0);
        draw[sample_index(mean, rng)] = 1.0;
        return draw;
    }
    for (double& x : draw) { x /= total; }
    return draw;
}

TabularMdp sample_env(const Posterior& posterior, Rng& rng) {
    if (const auto* fs = std::get_if<FiniteSupportPrior>(&posterior)) {
        return fs->env(sample_index(fs->probs(), rng));
    }
    const auto& dir = std::get<DirichletProduct>(posterior);
    const auto& shape = dir.shape();
    std::vector<double> transitions(shape.transition_size());
    for (std::size_t h = 0; h < shape.horizon; ++h) {
        for (std::size_t s = 0; s < shape.states; ++s) {
            for (std::size_t a = 0; a < shape.actions; ++a) {
                auto row = sample_dirichlet(dir.row(h, s, a), rng);
                std::copy(row.begin(), row.end(), transitions.begin() + std::ptrdiff_t(shape.row_offset(h, s, a)));
            }
        }
    }
    return TabularMdp(shape, std::move(transitions), {dir.rewards().begin(), dir.rewards().end()},
                      dir.initial_state());
}

TabularMdp mean_env(const Posterior& posterior) {
    const MdpShape shape = shape_of(posterior);
    std::vector<double> transitions(shape.transition_size(), 0.0);
    if (const auto* dir = std::get_if<DirichletProduct>(&posterior)) {
        for (std::size_t h = 0; h < shape.horizon; ++h) {
            for (std::size_t s = 0; s < shape.states; ++s) {
                for (std::size_t a = 0; a < shape.actions; ++a) {
                    auto row = dir->row(h, s, a);
                    const double total = std::accumulate(row.begin(), row.end(), 0.0);
                    const std::size_t offset = shape.row_offset(h, s, a);
                    for (std::size_t n = 0; n < shape.states; ++n) { transitions[offset + n] = row[n] / total; }
                }
            }
        }
        return TabularMdp(shape, std::move(transitions), {dir->rewards().begin(), dir->rewards().end()},
                          dir->initial_state());
    }
    const auto& fs = std::get<FiniteSupportPrior>(posterior);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const double w = fs.probs()[i];
        if (w == 0.0) { continue; }
        auto env = fs.env(i).transitions();
        for (std::size_t k = 0; k < transitions.size(); ++k) { transitions[k] += w * env[k]; }
    }
    // a convex combination of probability rows can drift by a few ulps; this
    // keeps rows inside the construction tolerance without changing the law
    for (std::size_t off = 0; off < transitions.size(); off += shape.states) {
        double total = 0.0;
        for (std::size_t n = 0; n < shape.states; ++n) { total += transitions[off + n]; }
        for (std::size_t n = 0; n < shape.states; ++n) { transitions[off + n] /= total; }
    }
    auto rewards = fs.env(0).rewards();
    return TabularMdp(shape, std::move(transitions), {rewards.begin(), rewards.end()}, fs.env(0).initial_state());
}

double digamma(double x) {
    if (!(x > 0.0)) { throw std::domain_error("digamma is only implemented for x > 0"); }
    double result = 0.0;
    // recurrence psi(x) = psi(x + 1) - 1/x until the asymptotic series is accurate
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Bernoulli-number series: 1/12, 1/120, 1/252, 1/240, 1/132, 691/32760
    const double series =
        inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * 691.0 / 32760)))));
    return result + std::log(x) - 0.5 * inv - series;
}

double dirichlet_expected_kl(std::span<const double> alpha) {
    const double alpha0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    const double psi0 = digamma(alpha0 + 1.0);
    double kappa = 0.0;
    for (double a : alpha) {
        if (!(a > 0.0)) { throw std::invalid_argument("Dirichlet parameters must be positive"); }
        const double mean = a / alpha0;
        kappa += mean * (digamma(a + 1.0) - psi0 - std::log(mean));
    }
    // the closed form is a difference of nearly equal terms for large counts
    return std::max(kappa, 0.0);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) { continue; }
        if (q[i] == 0.0) { return std::numeric_limits<double>::infinity(); }
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(kl, 0.0);
}

double expected_kl(const Posterior& posterior, std::size_t h, std::size_t s, std::size_t a) {
    const MdpShape shape = shape_of(posterior);
    if (h >= shape.horizon || s >= shape.states || a >= shape.actions) {
        throw std::out_of_range("expected_kl index out of range");
    }
    if (const auto* dir = std::get_if<DirichletProduct>(&posterior)) {
        return dirichlet_expected_kl(dir->row(h, s, a));
    }
    const auto& fs = std::get<FiniteSupportPrior>(posterior);
    std::vector<double> mean(shape.states, 0.0);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        auto row = fs.env(i).next_state_probs(h, s, a);
        for (std::size_t n = 0; n < shape.states; ++n) { mean[n] += fs.probs()[i] * row[n]; }
    }
    double kappa = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (fs.probs()[i] == 0.0) { continue; }
        kappa += fs.probs()[i] * kl_divergence(fs.env(i).next_state_probs(h, s, a), mean);
    }
    return kappa;
}

namespace {

struct Fnv1a {
    std::uint64_t state = 0xcbf29ce484222325ULL;

    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state ^= p[i];
            state *= 0x100000001b3ULL;
        }
    }
    void doubles(std::span<const double> values) { bytes(values.data(), values.size_bytes()); }
};

} // namespace

std::uint64_t fingerprint(const Posterior& posterior) {
    Fnv1a hash;
    if (const auto* dir = std::get_if<DirichletProduct>(&posterior)) {
        hash.doubles(dir->counts());
        hash.doubles(dir->rewards());
    } else {
        const auto& fs = std::get<FiniteSupportPrior>(posterior);
        hash.doubles(fs.probs());
        for (const auto& env : fs.envs()) { hash.doubles(env.transitions()); }
        hash.doubles(fs.env(0).rewards());
    }
    return hash.state;
}

} // namespace ids
