#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pbrs/envs/qbert.hpp"
#include "pbrs/evaluation.hpp"
#include "pbrs/random_mdp.hpp"
#include "pbrs/shaping.hpp"
#include "pbrs/value_iteration.hpp"

using namespace pbrs;

namespace {

// Smallest n with gamma^n * dist <= eps, found by stepping in long double.
std::size_t iterations_by_stepping(long double gamma, long double eps, long double dist) {
    std::size_t n = 0;
    long double x = dist;
    while (x > eps) {
        x *= gamma;
        ++n;
    }
    return n;
}

}  // namespace

TEST(ValueIteration, TwoStateChainIntoGoal) {
    for (double g : {0.1, 0.5, 0.9, 0.99}) {
        MdpBuilder b(2, 1, g);
        b.add(0, 0, 1, 1.0, 1.0).terminal(1).goals({1}).goal_oriented(true).start(0).reward_bound(1.0);
        const auto r = value_iteration(b.build(), 1e-9, {});
        EXPECT_NEAR(r.values[0], 1.0, 1e-9);
        EXPECT_EQ(r.values[1], 0.0);
    }
}

TEST(ValueIteration, ResultIsEpsOptimal) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mdp = random_models::general(seed, 10, 3, 3, 0.95);
        const auto ref = oracle::optimal_values(mdp);
        const auto r = value_iteration(mdp, 1e-6, {});
        EXPECT_LE(sup_norm_diff(r.values, ref), 1e-6);
        EXPECT_LT(r.final_residual, vi_stop_threshold(0.95, 1e-6));
    }
}

TEST(ValueIteration, ResidualsContract) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mdp = random_models::general(seed, 12, 3, 4, 0.9);
        const auto r = value_iteration(mdp, 1e-10, random_models::values(seed, 12, -5.0, 5.0));
        // Equality holds on self-loop dominated models, so allow round-off on
        // the value scale (|V| stays below 15 here).
        const double noise = 15.0 * 1e-14;
        for (std::size_t k = 1; k < r.residuals.size(); ++k)
            EXPECT_LE(r.residuals[k], 0.9 * r.residuals[k - 1] + noise);
    }
}

TEST(ValueIteration, ShapedSolutionPlusPotentialRecoversOptimum) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mdp = random_models::general(seed, 10, 3, 3, 0.9);
        const auto phi = random_models::potential(seed + 3, 10, 4.0);
        const auto vs = value_iteration(reshape_mdp(mdp, phi).mdp, 1e-8, {}).values;
        const auto ref = oracle::optimal_values(mdp);
        for (StateId s = 0; s < 10; ++s) EXPECT_NEAR(vs[s] + phi[s], ref[s], 2e-8);
    }
}

TEST(ValueIteration, OptimalPotentialShapedIsNearZero) {
    const auto mdp = random_models::general(42, 15, 4, 3, 0.95);
    const auto shaped = reshape_mdp(mdp, Potential::from_values(oracle::optimal_values(mdp))).mdp;
    for (double v : value_iteration(shaped, 1e-7, {}).values) EXPECT_NEAR(v, 0.0, 1e-7);
}

TEST(ValueIteration, RejectsBadArguments) {
    const auto mdp = random_models::general(1, 3, 2, 2, 0.9);
    EXPECT_THROW(value_iteration(mdp, 0.0, {}), UsageError);
    EXPECT_THROW(value_iteration(mdp, 1e-3, {1.0}), UsageError);
}

TEST(MinIterations, Examples) {
    EXPECT_EQ(min_iterations_to_eps(0.9, 0.01, 1.0), 44u);
    EXPECT_EQ(iterations_by_stepping(0.9L, 0.01L, 1.0L), 44u);
    EXPECT_EQ(min_iterations_to_eps(0.5, 0.25, 1.0), 2u);
    EXPECT_EQ(min_iterations_to_eps(0.9, 0.5, 0.5), 0u);
    EXPECT_EQ(min_iterations_to_eps(0.9, 1.0, 0.2), 0u);
}

TEST(MinIterations, AgreesWithStepping) {
    Rng rng(8);
    for (int i = 0; i < 2000; ++i) {
        const double g = rng.uniform(0.05, 0.999);
        const double eps = std::pow(10.0, -rng.uniform(1.0, 9.0));
        const double dist = rng.uniform(1e-3, 100.0);
        EXPECT_EQ(min_iterations_to_eps(g, eps, dist), iterations_by_stepping(g, eps, dist))
            << g << " " << eps << " " << dist;
    }
}

TEST(MinIterations, InvalidInputsAreUsageErrors) {
    EXPECT_THROW(min_iterations_to_eps(1.0, 0.1, 1.0), UsageError);
    EXPECT_THROW(min_iterations_to_eps(0.0, 0.1, 1.0), UsageError);
    EXPECT_THROW(min_iterations_to_eps(0.9, 0.0, 1.0), UsageError);
    EXPECT_THROW(min_iterations_to_eps(0.9, 0.1, -1.0), UsageError);
}

TEST(IterationBound, OptimalPotentialNeedsNoIterationsByTheBound) {
    const auto mdp = random_models::general(5, 10, 3, 3, 0.9);
    const auto phi = Potential::from_values(oracle::optimal_values(mdp));
    const auto r = prop1_experiment(mdp, phi, std::vector<double>(10, 0.0), 1e-6);
    EXPECT_TRUE(r.hypothesis_holds);
    EXPECT_EQ(r.bound_dst, 0u);
    EXPECT_LE(r.bound_dst, r.bound_src);
}

TEST(IterationBound, ZeroPotentialIsTheSameProblem) {
    const auto mdp = random_models::general(6, 10, 3, 3, 0.9);
    const auto r = prop1_experiment(mdp, Potential::zero(10), std::vector<double>(10, 0.0), 1e-6);
    EXPECT_EQ(r.n_src, r.n_dst);
    EXPECT_EQ(r.bound_src, r.bound_dst);
}

TEST(IterationBound, NoisyOptimalPotentialsSatisfyTheBound) {
    int holds = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto mdp = random_models::general(seed, 20, 3, 4, 0.9);
        const auto vstar = oracle::optimal_values(mdp);
        const std::vector<double> v0(20, 0.0);
        const double dist = sup_norm_diff(vstar, v0);
        const double delta = 0.45 * dist;
        auto noise = random_models::values(seed + 1000, 20, -delta, delta);
        std::vector<double> phi(20);
        for (int s = 0; s < 20; ++s) phi[s] = vstar[s] + noise[s];
        const auto r = prop1_experiment(mdp, Potential(phi, 0.0).with_bound(std::max(0.0, *std::max_element(phi.begin(), phi.end()))),
                                        v0, 1e-6);
        EXPECT_TRUE(r.hypothesis_holds);
        holds += r.hypothesis_holds && r.bound_dst <= r.bound_src;
    }
    EXPECT_EQ(holds, 100);
}

TEST(QbertAbstractionVi, GreedyRolloutColorsEveryTile) {
    const auto qa = build_qbert_abstraction(0.99);
    const auto& mdp = qa.mdp();
    const auto vi = value_iteration(mdp, 1e-7, {});
    const auto greedy = greedy_actions(mdp, vi.values);
    StateId s = qa.start();
    std::size_t steps = 0;
    while (!mdp.is_terminal(s) && steps < 1000) {
        const auto span = mdp.outcomes(s, greedy[s]);
        ASSERT_EQ(span.size(), 1u);
        if (span[0].reward == 1.0) {
            const auto st = qbert::AbstractState::from_key(qa.model.keys[s]);
            EXPECT_TRUE(st.complete());
        }
        s = span[0].next;
        ++steps;
    }
    EXPECT_TRUE(mdp.is_terminal(s));
    EXPECT_LT(steps, 100u);
}
