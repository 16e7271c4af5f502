#pragma once

// Priors and posteriors over transition kernels: independent Dirichlet rows
// and explicit finite-support priors. Rewards and the initial state are known
// and carried alongside the belief so that sampled and mean environments are
// complete MDPs.

#include "ids/mdp.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace ids {

/// Independent Dirichlet(counts[h][s][a][.]) per (layer, state, action) row.
class DirichletProduct {
public:
    /// Throws std::invalid_argument on non-positive counts or malformed tensors.
    DirichletProduct(MdpShape shape, std::vector<double> counts, std::vector<double> rewards,
                     std::size_t initial_state);

    /// Every row Dirichlet(count, ..., count).
    static DirichletProduct symmetric(MdpShape shape, std::vector<double> rewards, std::size_t initial_state,
                                      double count = 1.0);

    const MdpShape& shape() const { return shape_; }
    std::span<const double> counts() const { return counts_; }
    std::span<const double> row(std::size_t h, std::size_t s, std::size_t a) const {
        return {counts_.data() + shape_.row_offset(h, s, a), shape_.states};
    }
    std::span<const double> rewards() const { return rewards_; }
    std::size_t initial_state() const { return initial_state_; }

    DirichletProduct updated(const Trajectory& trajectory) const;

    friend bool operator==(const DirichletProduct&, const DirichletProduct&) = default;

private:
    MdpShape shape_;
    std::vector<double> counts_;
    std::vector<double> rewards_;
    std::size_t initial_state_ = 0;
};

/// Explicit list of candidate environments with their probabilities. Used both
/// as a prior and, with updated probabilities, as a posterior.
class FiniteSupportPrior {
public:
    /// Throws std::invalid_argument when `envs` is empty, the environments
    /// disagree on shape/rewards/initial state, or `probs` is not a
    /// probability vector of matching length.
    FiniteSupportPrior(std::vector<TabularMdp> envs, std::vector<double> probs);

    /// Kernel options for one layer: each option is an S*A*S block.
    struct LayerOption {
        std::vector<double> kernel;
        double prob = 0.0;
    };

    /// Prior that is independent across layers: the support is the Cartesian
    /// product of per-layer options (layer 0 varies slowest) and each
    /// environment's probability is the product of its option probabilities.
    static FiniteSupportPrior layer_product(MdpShape shape, const std::vector<std::vector<LayerOption>>& layers,
                                            std::vector<double> rewards, std::size_t initial_state);

    const MdpShape& shape() const { return envs_.front().shape(); }
    std::size_t size() const { return envs_.size(); }
    const TabularMdp& env(std::size_t i) const { return envs_[i]; }
    std::span<const TabularMdp> envs() const { return envs_; }
    std::span<const double> probs() const { return probs_; }

    /// Bayes update with the trajectory likelihood. Throws std::domain_error
    /// when every environment assigns the trajectory zero likelihood.
    FiniteSupportPrior updated(const Trajectory& trajectory) const;

    /// Same support, new probabilities.
    FiniteSupportPrior with_probs(std::vector<double> probs) const;

    friend bool operator==(const FiniteSupportPrior&, const FiniteSupportPrior&) = default;

private:
    std::vector<TabularMdp> envs_;
    std::vector<double> probs_;
};

using Posterior = std::variant<DirichletProduct, FiniteSupportPrior>;

MdpShape shape_of(const Posterior& posterior);
std::size_t initial_state_of(const Posterior& posterior);
std::vector<double> rewards_of(const Posterior& posterior);

/// Product of per-step transition likelihoods P_h(s_{h+1} | s_h, a_h).
double trajectory_likelihood(const TabularMdp& env, const Trajectory& trajectory);

Posterior update(const Posterior& posterior, const Trajectory& trajectory);

/// One independent posterior draw (the SAMP oracle).
TabularMdp sample_env(const Posterior& posterior, Rng& rng);

/// Environment whose kernels are the posterior means.
TabularMdp mean_env(const Posterior& posterior);

/// Posterior expectation of KL(P_h(.|s,a) || mean P_h(.|s,a)) in nats.
double expected_kl(const Posterior& posterior, std::size_t h, std::size_t s, std::size_t a);

/// Closed form of E[KL(p || alpha/alpha0)] for p ~ Dirichlet(alpha).
double dirichlet_expected_kl(std::span<const double> alpha);

/// KL(p || q) in nats with 0 log 0 = 0; +inf when p puts mass where q has none.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Digamma function for x > 0.
double digamma(double x);

/// Draws one Dirichlet(alpha) vector.
std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng);

/// FNV-1a fingerprint of the posterior parameters.
std::uint64_t fingerprint(const Posterior& posterior);

} // namespace ids
