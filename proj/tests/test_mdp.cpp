#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "pbrs/envs/eight_rooms.hpp"
#include "pbrs/evaluation.hpp"
#include "pbrs/mdp.hpp"
#include "pbrs/random_mdp.hpp"

using namespace pbrs;

namespace {

TabularMdp chain_to_goal(std::size_t steps, double gamma) {
    MdpBuilder b(steps + 1, 1, gamma);
    for (StateId s = 0; s < steps; ++s) b.add(s, 0, s + 1, 1.0, s + 1 == steps ? 1.0 : 0.0);
    b.terminal(static_cast<StateId>(steps)).goals({static_cast<StateId>(steps)}).goal_oriented(true).start(0).reward_bound(1.0);
    return b.build();
}

bool has_violation(const ValidationReport& r, const std::string& needle) {
    for (const auto& v : r.violations)
        if (v.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(Validation, EightRoomsEnvIsValid) { EXPECT_TRUE(validate_mdp(build_eight_rooms_env()).ok()); }

TEST(Validation, MissingProbabilityMassIsReported) {
    MdpBuilder b(2, 1, 0.9);
    b.add(0, 0, 1, 0.9, 0.0).add(1, 0, 1, 1.0, 0.0).start(0);
    const auto rep = validate_mdp(b.build());
    EXPECT_FALSE(rep.ok());
    EXPECT_TRUE(has_violation(rep, "probability mass != 1"));
}

TEST(Validation, GammaOneIsRejected) {
    MdpBuilder b(1, 1, 1.0);
    b.add(0, 0, 0, 1.0, 0.0).start(0);
    EXPECT_TRUE(has_violation(validate_mdp(b.build()), "gamma must lie in [0,1)"));
}

TEST(Validation, GoalOrientedRewardStructureIsChecked) {
    MdpBuilder b(2, 1, 0.9);
    b.add(0, 0, 1, 1.0, 0.5).terminal(1).goals({1}).goal_oriented(true).start(0).reward_bound(1.0);
    EXPECT_TRUE(has_violation(validate_mdp(b.build()), "goal-oriented reward"));
}

TEST(Validation, RewardAboveBoundAndBadRho) {
    MdpBuilder b(2, 1, 0.5);
    b.add(0, 0, 1, 1.0, 3.0).add(1, 0, 0, 1.0, 0.0).rho({0.5, 0.4}).reward_bound(1.0);
    const auto rep = validate_mdp(b.build());
    EXPECT_TRUE(has_violation(rep, "outside [0, 1]"));
    EXPECT_TRUE(has_violation(rep, "rho does not sum to 1"));
}

TEST(Validation, NonTerminalWithoutActionsAndNonTerminalGoal) {
    MdpBuilder b(3, 1, 0.5);
    b.add(0, 0, 1, 1.0, 0.0).goals({2}).start(0);
    const auto rep = validate_mdp(b.build());
    EXPECT_TRUE(has_violation(rep, "no available action"));
    EXPECT_TRUE(has_violation(rep, "goal state is not terminal"));
}

TEST(Sampling, DeterministicEdgeReturnsItsSuccessor) {
    const auto mdp = chain_to_goal(3, 0.9);
    Rng rng(7);
    for (int i = 0; i < 10; ++i) {
        auto [n, r] = sample_transition(mdp, 1, 0, rng);
        EXPECT_EQ(n, 2u);
        EXPECT_EQ(r, 0.0);
    }
}

TEST(Sampling, SameSeedSameOutcome) {
    const auto env = build_eight_rooms_env();
    const StateId start = static_cast<StateId>(std::max_element(env.rho().begin(), env.rho().end()) - env.rho().begin());
    std::vector<StateId> first, second;
    Rng a(123), b(123);
    for (int i = 0; i < 200; ++i) {
        first.push_back(sample_transition(env, start, i % 4, a).first);
        second.push_back(sample_transition(env, start, i % 4, b).first);
    }
    EXPECT_EQ(first, second);
}

TEST(Sampling, EmpiricalFrequencyMatchesProbability) {
    MdpBuilder b(3, 1, 0.9);
    b.add(0, 0, 1, 0.9, 0.0).add(0, 0, 2, 0.1, 0.0).add(1, 0, 1, 1.0, 0.0).add(2, 0, 2, 1.0, 0.0).start(0);
    const auto mdp = b.build();
    Rng rng(99);
    std::size_t hits = 0;
    const std::size_t n = 1'000'000;
    for (std::size_t i = 0; i < n; ++i) hits += sample_transition(mdp, 0, 0, rng).first == 1;
    EXPECT_NEAR(static_cast<double>(hits) / n, 0.9, 0.002);
}

TEST(Sampling, InvalidPairsAreUsageErrors) {
    const auto mdp = chain_to_goal(2, 0.9);
    Rng rng(1);
    EXPECT_THROW(sample_transition(mdp, 2, 0, rng), UsageError);  // terminal
    EXPECT_THROW(sample_transition(mdp, 0, 3, rng), UsageError);  // no such action
}

TEST(DiscountedReturn, SmallExamples) {
    Trajectory t1{{0, 1}, {0}, {1.0}};
    EXPECT_DOUBLE_EQ(discounted_return(t1, 0.98), 1.0);
    Trajectory t2{{0, 1, 2}, {0, 0}, {0.0, 1.0}};
    EXPECT_DOUBLE_EQ(discounted_return(t2, 0.9), 0.9);
    EXPECT_EQ(discounted_return(Trajectory{{0}, {}, {}}, 0.9), 0.0);
}

TEST(DiscountedReturn, MatchesHighPrecisionSum) {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        Trajectory t;
        t.states.push_back(0);
        for (int i = 0; i < 20; ++i) {
            t.actions.push_back(0);
            t.rewards.push_back(rng.uniform(0.0, 10.0));
            t.states.push_back(0);
        }
        const double g = rng.uniform(0.5, 0.999);
        EXPECT_NEAR(discounted_return(t, g), static_cast<double>(oracle::discounted_sum(t.rewards, g)), 1e-12);
    }
}

TEST(PolicyEvaluation, AbsorbingZeroRewardState) {
    MdpBuilder b(1, 1, 0.9);
    b.add(0, 0, 0, 1.0, 0.0).start(0);
    const auto mdp = b.build();
    EXPECT_EQ(policy_evaluation_exact(mdp, Policy::deterministic({0}, 1))[0], 0.0);
}

TEST(PolicyEvaluation, ChainIntoGoalIsWorthOne) {
    for (double g : {0.0, 0.5, 0.9, 0.99}) {
        const auto mdp = chain_to_goal(1, g);
        const auto v = policy_evaluation_exact(mdp, Policy::deterministic({0, 0}, 1));
        EXPECT_NEAR(v[0], 1.0, 1e-12);
        EXPECT_EQ(v[1], 0.0);
    }
}

TEST(PolicyEvaluation, MatchesIterativeOracleOnRandomMdps) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mdp = random_models::general(seed, 5, 3, 3, 0.95);
        const auto pi = random_models::softmax_policy(seed + 100, 5, 3);
        const auto v = policy_evaluation_exact(mdp, pi);
        const auto ref = oracle::gauss_seidel_values(mdp, pi);
        EXPECT_LE(sup_norm_diff(v, ref), 1e-9) << "seed " << seed;
    }
}

TEST(PolicyEvaluation, LargeModelsUseTheIterativePath) {
    const auto mdp = random_models::general(3, 2100, 2, 3, 0.9);
    const auto pi = random_models::softmax_policy(4, 2100, 2);
    const auto v = policy_evaluation_exact(mdp, pi);
    const auto ref = oracle::gauss_seidel_values(mdp, pi);
    EXPECT_LE(sup_norm_diff(v, ref), 1e-9);
}

TEST(FiniteHorizon, ZeroHorizonAndShortChain) {
    const auto mdp = chain_to_goal(3, 0.9);
    const auto pi = Policy::deterministic({0, 0, 0, 0}, 1);
    EXPECT_EQ(finite_horizon_return_exact(mdp, pi, 0), 0.0);
    EXPECT_NEAR(finite_horizon_return_exact(mdp, pi, 3), 0.81, 1e-15);
    EXPECT_NEAR(finite_horizon_return_exact(mdp, pi, 2), 0.0, 1e-15);
}

TEST(FiniteHorizon, EightRoomsMatchesMonteCarlo) {
    const auto env = build_eight_rooms_env();
    const auto pi = Policy::deterministic(solve_optimal(env).policy, env.num_actions());
    const double exact = finite_horizon_return_exact(env, pi, 70);
    Rng rng(2024);
    const std::size_t n = 100'000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = discounted_return(simulate_episode(env, pi, 70, rng), env.gamma());
        sum += r;
        sumsq += r * r;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1));
    EXPECT_LE(std::abs(mean - exact), 3.0 * se + 1e-12);
}

TEST(FiniteHorizon, ProbabilityMassIsConserved) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mdp = random_models::goal_oriented(seed, 6, 3, 2, 0.9);
        const auto st = forward_horizon(mdp, random_models::softmax_policy(seed, 6, 3), 40);
        EXPECT_LE(st.max_mass_error, 1e-10);
    }
}

TEST(FiniteHorizon, ConvergesToInfiniteHorizonValue) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mdp = random_models::general(seed, 6, 2, 3, 0.8, true);
        const auto pi = random_models::softmax_policy(seed + 7, 6, 2);
        const double vrho = start_value(mdp, policy_evaluation_exact(mdp, pi));
        for (std::size_t H : {1u, 5u, 20u, 60u}) {
            const double jh = finite_horizon_return_exact(mdp, pi, H);
            EXPECT_LE(std::abs(vrho - jh), std::pow(0.8, H) * mdp.reward_bound() / 0.2 + 1e-12);
        }
    }
}

TEST(PolicyEnumeration, CountsAndUniqueness) {
    EXPECT_EQ(enumerate_deterministic_policies(random_models::general(1, 2, 2, 2, 0.9)).size(), 4u);
    EXPECT_EQ(enumerate_deterministic_policies(random_models::general(1, 3, 3, 2, 0.9)).size(), 27u);
    const auto space = enumerate_deterministic_policies(random_models::general(1, 4, 4, 2, 0.9));
    std::set<std::vector<ActionId>> seen;
    std::size_t n = 0;
    for (const auto& p : space) {
        seen.insert(p.actions());
        ++n;
    }
    EXPECT_EQ(n, 256u);
    EXPECT_EQ(seen.size(), 256u);
}

TEST(PolicyEnumeration, LexicographicOrder) {
    const auto space = enumerate_deterministic_policies(random_models::general(1, 2, 3, 2, 0.9));
    EXPECT_EQ(space.at(0).actions(), (std::vector<ActionId>{0, 0}));
    EXPECT_EQ(space.at(1).actions(), (std::vector<ActionId>{0, 1}));
    EXPECT_EQ(space.at(3).actions(), (std::vector<ActionId>{1, 0}));
    EXPECT_EQ(space.at(8).actions(), (std::vector<ActionId>{2, 2}));
}

TEST(PolicyEnumeration, CapIsEnforcedWithCount) {
    const auto mdp = random_models::general(1, 8, 4, 2, 0.9);
    try {
        enumerate_deterministic_policies(mdp, 1000);
        FAIL() << "expected a refusal";
    } catch (const CapacityError& e) {
        EXPECT_EQ(e.count(), 65536u);
        EXPECT_NE(std::string(e.what()).find("65536"), std::string::npos);
    }
}

TEST(PolicyEnumeration, TerminalStatesDoNotMultiplyTheCount) {
    const auto mdp = chain_to_goal(3, 0.9);
    EXPECT_EQ(enumerate_deterministic_policies(mdp).size(), 1u);
}

TEST(Sampling, EpisodesAreBitReproducible) {
    const auto env = build_eight_rooms_env();
    const auto pi = random_models::softmax_policy(3, env.num_states(), 4, 0.0);
    Rng a(77), b(77);
    for (int i = 0; i < 20; ++i) {
        const auto t1 = simulate_episode(env, pi, 70, a);
        const auto t2 = simulate_episode(env, pi, 70, b);
        EXPECT_EQ(t1.states, t2.states);
        EXPECT_EQ(t1.actions, t2.actions);
    }
}
