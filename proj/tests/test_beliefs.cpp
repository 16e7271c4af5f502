#include "ids/beliefs.hpp"
#include "support/oracles.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <doctest.h>

#include <cmath>

using namespace ids;

TEST_SUITE("beliefs") {

TEST_CASE("digamma agrees with an independent implementation") {
    for (double x : {1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 9.99, 10.0, 42.0, 1e3, 1e6}) {
        CAPTURE(x);
        const double ref = boost::math::digamma(x);
        CHECK(std::abs(digamma(x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
    CHECK_THROWS(digamma(0.0));
}

TEST_CASE("Dirichlet update increments one count per layer") {
    const MdpShape shape{3, 2, 2};
    const auto prior = DirichletProduct::symmetric(shape, std::vector<double>(shape.reward_size(), 0.0), 0);
    Trajectory t;
    t.steps = {{0, 1, 0.0}, {2, 0, 0.0}};
    t.final_state = 1;
    const DirichletProduct post = prior.updated(t);
    std::size_t changed = 0;
    for (std::size_t k = 0; k < shape.transition_size(); ++k) {
        if (post.counts()[k] != prior.counts()[k]) {
            ++changed;
            CHECK(post.counts()[k] == prior.counts()[k] + 1.0);
        }
    }
    CHECK(changed == 2);
    CHECK(post.row(0, 0, 1)[2] == 2.0);
    CHECK(post.row(1, 2, 0)[1] == 2.0);
}

TEST_CASE("Dirichlet updates commute") {
    Rng rng(1);
    const MdpShape shape{3, 2, 3};
    const TabularMdp env = oracle::random_mdp(shape, rng);
    const auto prior = DirichletProduct::symmetric(shape, {env.rewards().begin(), env.rewards().end()},
                                                   env.initial_state());
    const StationaryPolicy pi = StationaryPolicy::uniform(shape);
    const Trajectory a = simulate_episode(env, pi, rng), b = simulate_episode(env, pi, rng);
    CHECK(prior.updated(a).updated(b) == prior.updated(b).updated(a));
}

TEST_CASE("finite-support update") {
    Rng rng(2);
    const MdpShape shape{3, 2, 3};
    SUBCASE("zero likelihood collapses the posterior") {
        const auto rewards = oracle::random_rewards(shape, rng);
        const TabularMdp truth = oracle::random_mdp(shape, rng, rewards);
        Trajectory t = simulate_episode(truth, StationaryPolicy::uniform(shape), rng);
        // the other env gives zero probability to the first observed transition
        std::vector<double> kernel(truth.transitions().begin(), truth.transitions().end());
        const std::size_t off = shape.row_offset(0, t.steps[0].state, t.steps[0].action);
        const std::size_t seen = t.next_state(0);
        for (std::size_t n = 0; n < 3; ++n) { kernel[off + n] = n == (seen + 1) % 3 ? 1.0 : 0.0; }
        const TabularMdp other(shape, kernel, rewards, truth.initial_state());
        const FiniteSupportPrior prior({truth, other}, {0.5, 0.5});
        const FiniteSupportPrior post = prior.updated(t);
        CHECK(post.probs()[0] == 1.0);
        CHECK(post.probs()[1] == 0.0);
    }
    SUBCASE("matches a direct Bayes computation") {
        const FiniteSupportPrior prior = oracle::random_finite_prior(shape, 3, rng);
        const Trajectory t = simulate_episode(prior.env(1), oracle::random_policy(shape, rng), rng);
        std::vector<double> w(3);
        double mass = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            double like = 1.0;
            for (std::size_t h = 0; h < 3; ++h) {
                const std::size_t next = h + 1 < 3 ? t.steps[h + 1].state : t.final_state;
                like *= prior.env(i).transition(h, t.steps[h].state, t.steps[h].action, next);
            }
            w[i] = prior.probs()[i] * like;
            mass += w[i];
        }
        const FiniteSupportPrior post = prior.updated(t);
        for (std::size_t i = 0; i < 3; ++i) { CHECK(std::abs(post.probs()[i] - w[i] / mass) <= 1e-12); }
    }
    SUBCASE("total mass zero is an error") {
        const auto rewards = oracle::random_rewards(shape, rng);
        std::vector<double> stay(shape.transition_size(), 0.0);
        for (std::size_t k = 0; k < shape.reward_size(); ++k) { stay[k * 3] = 1.0; }
        const TabularMdp always_zero(shape, stay, rewards, 0);
        Trajectory t;
        t.steps = {{0, 0, 0.0}, {1, 0, 0.0}, {1, 0, 0.0}};
        t.final_state = 1;
        CHECK_THROWS_AS(FiniteSupportPrior({always_zero}, {1.0}).updated(t), std::domain_error);
    }
}

TEST_CASE("posterior consistency on finite supports") {
    const MdpShape shape{3, 2, 3};
    int concentrated = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(1000 + seed);
        const FiniteSupportPrior prior = oracle::random_finite_prior(shape, 5, rng);
        const std::size_t truth = sample_index(prior.probs(), rng);
        Posterior post = prior;
        const StationaryPolicy pi = StationaryPolicy::uniform(shape);
        for (int ep = 0; ep < 200; ++ep) { post = update(post, simulate_episode(prior.env(truth), pi, rng)); }
        if (std::get<FiniteSupportPrior>(post).probs()[truth] > 0.95) { ++concentrated; }
    }
    CHECK(concentrated >= 90);
}

TEST_CASE("sample_env") {
    Rng rng(3);
    const MdpShape shape{2, 2, 2};
    SUBCASE("point mass") {
        const FiniteSupportPrior prior = oracle::random_finite_prior(shape, 3, rng).with_probs({0.0, 1.0, 0.0});
        for (int k = 0; k < 20; ++k) { CHECK(sample_env(Posterior(prior), rng) == prior.env(1)); }
    }
    SUBCASE("concentrated Dirichlet rows") {
        std::vector<double> counts(shape.transition_size(), 1.0);
        for (std::size_t k = 0; k < counts.size(); k += 2) { counts[k] = 1e6; }
        const Posterior post = DirichletProduct(shape, counts, std::vector<double>(shape.reward_size(), 0.0), 0);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const TabularMdp env = sample_env(post, rng);
            for (std::size_t j = 0; j < counts.size(); j += 2) { worst = std::max(worst, 1.0 - env.transitions()[j]); }
        }
        CHECK(worst < 0.01);
    }
    SUBCASE("independent streams give different samples") {
        const Posterior post = DirichletProduct::symmetric(shape, std::vector<double>(shape.reward_size(), 0.0), 0);
        Rng a = make_rng(7, 1), b = make_rng(7, 2);
        CHECK_FALSE(sample_env(post, a) == sample_env(post, b));
    }
}

TEST_CASE("mean_env") {
    Rng rng(4);
    SUBCASE("symmetric Dirichlet mean is uniform") {
        const MdpShape shape{3, 1, 1};
        const TabularMdp mean = mean_env(DirichletProduct::symmetric(shape, {0.0, 0.0, 0.0}, 0));
        for (double p : mean.transitions()) { CHECK(p == doctest::Approx(1.0 / 3.0)); }
    }
    SUBCASE("finite-support mixture mean") {
        const MdpShape shape{2, 1, 1};
        const TabularMdp left(shape, {1.0, 0.0, 1.0, 0.0}, {0.0, 0.0}, 0);
        const TabularMdp right(shape, {0.0, 1.0, 0.0, 1.0}, {0.0, 0.0}, 0);
        const TabularMdp mean = mean_env(FiniteSupportPrior({left, right}, {0.25, 0.75}));
        CHECK(mean.transition(0, 0, 0, 0) == doctest::Approx(0.25));
        CHECK(mean.transition(0, 1, 0, 1) == doctest::Approx(0.75));
    }
    SUBCASE("Dirichlet mean matches Monte Carlo") {
        const MdpShape shape{3, 2, 2};
        std::vector<double> counts(shape.transition_size());
        for (double& c : counts) { c = 0.5 + 4.0 * oracle::uniform01(rng); }
        const Posterior post = DirichletProduct(shape, counts, std::vector<double>(shape.reward_size(), 0.0), 0);
        const TabularMdp mean = mean_env(post);
        const std::size_t n = 100000;
        std::vector<double> sum(counts.size(), 0.0), sum_sq(counts.size(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const TabularMdp env = sample_env(post, rng);
            for (std::size_t j = 0; j < counts.size(); ++j) {
                sum[j] += env.transitions()[j];
                sum_sq[j] += env.transitions()[j] * env.transitions()[j];
            }
        }
        for (std::size_t j = 0; j < counts.size(); ++j) {
            const double m = sum[j] / double(n);
            const double se = std::sqrt((sum_sq[j] / double(n) - m * m) / double(n));
            CHECK(std::abs(m - mean.transitions()[j]) <= 3.0 * se);
        }
    }
}

TEST_CASE("expected KL") {
    Rng rng(5);
    SUBCASE("point-mass finite support gives zero") {
        const MdpShape shape{2, 2, 2};
        const FiniteSupportPrior prior = oracle::random_finite_prior(shape, 3, rng).with_probs({1.0, 0.0, 0.0});
        for (std::size_t h = 0; h < 2; ++h) {
            for (std::size_t s = 0; s < 2; ++s) {
                for (std::size_t a = 0; a < 2; ++a) { CHECK(expected_kl(prior, h, s, a) == 0.0); }
            }
        }
    }
    SUBCASE("concentration shrinks the expected KL") {
        CHECK(dirichlet_expected_kl(std::vector<double>{1000, 1000}) < dirichlet_expected_kl(std::vector<double>{1, 1}));
        double prev = dirichlet_expected_kl(std::vector<double>{0.3, 1.2, 2.0});
        for (double scale = 2.0; scale <= 1024.0; scale *= 2.0) {
            const double next = dirichlet_expected_kl(std::vector<double>{0.3 * scale, 1.2 * scale, 2.0 * scale});
            CHECK(next < prev);
            CHECK(next >= 0.0);
            prev = next;
        }
    }
    SUBCASE("closed form matches Monte Carlo for counts (1, 2)") {
        const std::vector<double> alpha{1.0, 2.0};
        const auto mc = oracle::dirichlet_kl_mc(alpha, 1000000, rng);
        CHECK(std::abs(dirichlet_expected_kl(alpha) - mc.mean) <= 3.0 * mc.se);
    }
    SUBCASE("finite support sums KL to the mean row") {
        const MdpShape shape{3, 1, 1};
        std::vector<double> pa, pb;
        for (int s = 0; s < 3; ++s) {
            pa.insert(pa.end(), {0.5, 0.5, 0.0});
            pb.insert(pb.end(), {0.0, 0.5, 0.5});
        }
        const TabularMdp a(shape, pa, {0.0, 0.0, 0.0}, 0), b(shape, pb, {0.0, 0.0, 0.0}, 0);
        const double kappa = expected_kl(FiniteSupportPrior({a, b}, {0.5, 0.5}), 0, 0, 0);
        // each row is at KL 0.5 log 2 from the mean (0.25, 0.5, 0.25)
        const double each = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.5);
        CHECK(kappa == doctest::Approx(each));
    }
    SUBCASE("kl_divergence support mismatch") {
        CHECK(std::isinf(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0})));
        CHECK(kl_divergence(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}) ==
              doctest::Approx(std::log(2.0)));
    }
    SUBCASE("non-positive counts are rejected") {
        const MdpShape shape{2, 1, 1};
        CHECK_THROWS_AS(DirichletProduct(shape, {1.0, 0.0}, {0.0}, 0), std::invalid_argument);
    }
}

TEST_CASE("fingerprint tracks parameters") {
    const MdpShape shape{2, 2, 1};
    const auto a = DirichletProduct::symmetric(shape, std::vector<double>(4, 0.0), 0);
    Trajectory t;
    t.steps = {{0, 0, 0.0}};
    t.final_state = 1;
    CHECK(fingerprint(a) == fingerprint(DirichletProduct::symmetric(shape, std::vector<double>(4, 0.0), 0)));
    CHECK(fingerprint(a) != fingerprint(a.updated(t)));
}

} // TEST_SUITE
