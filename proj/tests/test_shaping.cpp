#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pbrs/abstraction.hpp"
#include "pbrs/envs/eight_rooms.hpp"
#include "pbrs/evaluation.hpp"
#include "pbrs/random_mdp.hpp"
#include "pbrs/shaping.hpp"
#include "pbrs/value_iteration.hpp"

using namespace pbrs;

namespace {

Trajectory random_trajectory(Rng& rng, std::size_t H, std::size_t S) {
    Trajectory t;
    t.states.push_back(static_cast<StateId>(rng.below(S)));
    for (std::size_t i = 0; i < H; ++i) {
        t.actions.push_back(0);
        t.rewards.push_back(rng.uniform());
        t.states.push_back(static_cast<StateId>(rng.below(S)));
    }
    return t;
}

std::vector<double> eight_rooms_abstract_values() {
    auto [abs, alpha] = build_eight_rooms_abstraction();
    (void)alpha;
    return value_iteration(abs, 1e-7, {}).values;
}

}  // namespace

TEST(ShapingTerm, ConstantPotential) {
    const auto phi = Potential::from_values({3.0, 3.0});
    EXPECT_NEAR(shaping_term(phi, 0.9, 0, 1), -3.0 * 0.1, 1e-15);
}

TEST(ShapingTerm, ZeroToOne) {
    const auto phi = Potential::from_values({0.0, 1.0});
    EXPECT_DOUBLE_EQ(shaping_term(phi, 0.99, 0, 1), 0.99);
}

TEST(ShapingTerm, OutOfDomainIsUsageError) {
    const auto phi = Potential::zero(2);
    EXPECT_THROW(shaping_term(phi, 0.9, 0, 5), UsageError);
}

TEST(ShapingTerm, MovingFromOrangeRoomTowardGoalIsPositive) {
    const auto v = eight_rooms_abstract_values();
    const auto phi = Potential::from_values(v);
    EXPECT_GT(shaping_term(phi, 0.9, 6, eight_rooms::kG), 0.0);
}

TEST(Potential, RejectsNonFiniteValuesAndNegativeBound) {
    EXPECT_THROW(Potential({std::nan("")}, 1.0), UsageError);
    EXPECT_THROW(Potential({0.0}, -1.0), UsageError);
}

TEST(Potential, ScalingUpdatesTheBound) {
    const auto phi = Potential::from_values({0.25, 0.5});
    EXPECT_DOUBLE_EQ(phi.bound_phi(), 0.5);
    const auto k = phi.scaled(4.0);
    EXPECT_DOUBLE_EQ(k.bound_phi(), 2.0);
    EXPECT_DOUBLE_EQ(k[0], 1.0);
    const auto r = phi.rescaled_to(1.0);
    EXPECT_DOUBLE_EQ(r[1], 1.0);
    EXPECT_DOUBLE_EQ(r[0], 0.5);
    EXPECT_TRUE(r.bounded());
    EXPECT_FALSE(Potential({2.0}, 1.0).bounded());
}

TEST(ReshapeMdp, ZeroPotentialIsIdentity) {
    const auto mdp = random_models::general(4, 6, 3, 3, 0.9);
    const auto shaped = reshape_mdp(mdp, Potential::zero(6)).mdp;
    for (StateId s = 0; s < 6; ++s)
        for (ActionId a = 0; a < 3; ++a) {
            auto x = mdp.outcomes(s, a);
            auto y = shaped.outcomes(s, a);
            ASSERT_EQ(x.size(), y.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                EXPECT_EQ(x[i].next, y[i].next);
                EXPECT_EQ(x[i].prob, y[i].prob);
                EXPECT_EQ(x[i].reward, y[i].reward);
            }
        }
}

TEST(ReshapeMdp, RewardsFollowThePotentialDifference) {
    const auto mdp = random_models::general(8, 6, 3, 3, 0.9);
    const auto phi = random_models::potential(9, 6, 2.0);
    const auto shaped = reshape_mdp(mdp, phi).mdp;
    for (StateId s = 0; s < 6; ++s)
        for (ActionId a = 0; a < 3; ++a) {
            auto x = mdp.outcomes(s, a);
            auto y = shaped.outcomes(s, a);
            for (std::size_t i = 0; i < x.size(); ++i)
                EXPECT_EQ(y[i].reward, x[i].reward + 0.9 * phi[x[i].next] - phi[s]);
        }
}

TEST(ReshapeMdp, DomainMismatchIsUsageError) {
    EXPECT_THROW(reshape_mdp(random_models::general(1, 4, 2, 2, 0.9), Potential::zero(3)), UsageError);
}

TEST(ReshapeMdp, OptimalPotentialGivesZeroOptimalValue) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto mdp = random_models::general(seed, 8, 3, 3, 0.9);
        const auto vstar = oracle::optimal_values(mdp);
        const auto shaped = reshape_mdp(mdp, Potential::from_values(vstar)).mdp;
        for (double v : value_iteration(shaped, 1e-10, {}).values) EXPECT_NEAR(v, 0.0, 1e-8);
    }
}

// V'^pi = V^pi - phi and Q'^pi = Q^pi - phi(s), both evaluated exactly.
TEST(ReshapeMdp, ValueAndActionValueOffsets) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto mdp = random_models::general(seed, 6, 3, 3, 0.9);
        const auto phi = random_models::potential(seed + 1, 6, 5.0);
        const auto shaped = reshape_mdp(mdp, phi).mdp;
        const auto pi = random_models::softmax_policy(seed + 2, 6, 3);
        const auto v = oracle::gauss_seidel_values(mdp, pi);
        const auto vs = oracle::gauss_seidel_values(shaped, pi);
        const auto v_lib = policy_evaluation_exact(shaped, pi);
        for (StateId s = 0; s < 6; ++s) {
            EXPECT_NEAR(vs[s], v[s] - phi[s], 1e-9);
            EXPECT_NEAR(v_lib[s], v[s] - phi[s], 1e-9);
        }
        const auto q = action_values(mdp, v);
        const auto qs = action_values(shaped, vs);
        for (StateId s = 0; s < 6; ++s)
            for (ActionId a = 0; a < 3; ++a) EXPECT_NEAR(qs[s * 3 + a], q[s * 3 + a] - phi[s], 1e-9);
    }
}

TEST(ReshapeMdp, GreedyPolicyIsPreserved) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto mdp = random_models::general(seed, 7, 3, 3, 0.9);
        const auto phi = random_models::potential(seed + 50, 7, 3.0);
        const auto shaped = reshape_mdp(mdp, phi).mdp;
        EXPECT_EQ(solve_optimal(mdp).policy, solve_optimal(shaped).policy) << "seed " << seed;
    }
}

TEST(GrzesShaping, ZeroPotentialLeavesRewards) {
    Rng rng(3);
    const auto t = random_trajectory(rng, 10, 4);
    EXPECT_EQ(grzes_episode_shaping(t, Potential::zero(4), 0.9), t.rewards);
}

TEST(GrzesShaping, SingleStepUsesZeroAtTheEnd) {
    Trajectory t{{0, 1}, {0}, {0.5}};
    const auto phi = Potential::from_values({2.0, 7.0});
    const auto out = grzes_episode_shaping(t, phi, 0.9);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_DOUBLE_EQ(out[0], 0.5 - 2.0);
}

TEST(GrzesShaping, TelescopesToReturnMinusInitialPotential) {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const auto t = random_trajectory(rng, 15, 6);
        const auto phi = random_models::potential(rep, 6, 4.0);
        const double g = 0.95;
        const auto shaped = grzes_episode_shaping(t, phi, g);
        const double lhs = static_cast<double>(oracle::discounted_sum(shaped, g));
        const double rhs = static_cast<double>(oracle::discounted_sum(t.rewards, g)) - phi[t.states.front()];
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(ReshapedReturn, ClosedFormExample) {
    // R = 2 from a single reward at t=1 (0 + 0.9 * 2/0.9), H = 2.
    Trajectory t{{0, 1, 2}, {0, 0}, {0.0, 2.0 / 0.9}};
    const auto phi = Potential::from_values({1.0, 0.0, 5.0});
    EXPECT_NEAR(reshaped_return_closed_form(t, phi, 0.9), 5.05, 1e-12);
    EXPECT_NEAR(reshaped_trajectory_return(t, phi, 0.9), 5.05, 1e-12);
}

TEST(ReshapedReturn, ZeroPotentialIsRawReturn) {
    Rng rng(4);
    const auto t = random_trajectory(rng, 12, 3);
    EXPECT_NEAR(reshaped_trajectory_return(t, Potential::zero(3), 0.9), discounted_return(t, 0.9), 1e-15);
}

TEST(ReshapedReturn, PerStepSumMatchesClosedForm) {
    Rng rng(21);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t H = 1 + rng.below(30);
        const auto t = random_trajectory(rng, H, 8);
        const auto phi = random_models::potential(rep, 8, 3.0);
        const double g = rng.uniform(0.5, 0.99);
        long double closed = oracle::discounted_sum(t.rewards, g) + std::pow(static_cast<long double>(g), H) * phi[t.states.back()] -
                             phi[t.states.front()];
        EXPECT_NEAR(reshaped_trajectory_return(t, phi, g), static_cast<double>(closed), 1e-12);
        EXPECT_NEAR(reshaped_return_closed_form(t, phi, g), static_cast<double>(closed), 1e-12);
    }
}

TEST(PotentialFromAbstraction, AbsorbingZeroAbstractionGivesZero) {
    MdpBuilder b(1, 1, 0.9);
    b.add(0, 0, 0, 1.0, 0.0).start(0);
    const auto abs = b.build();
    const auto alpha = AggregationFn::by_cell({StateId{0}, StateId{0}, StateId{0}}, 1);
    const auto phi = potential_from_abstraction(abs, alpha, 1e-7);
    for (double v : phi.values()) EXPECT_EQ(v, 0.0);
}

TEST(PotentialFromAbstraction, UnmappedOrMismatchedIsConstructionError) {
    MdpBuilder b(2, 1, 0.9);
    b.add(0, 0, 1, 1.0, 0.0).add(1, 0, 1, 1.0, 0.0).start(0);
    const auto abs = b.build();
    EXPECT_THROW(potential_from_abstraction(abs, AggregationFn::by_cell({StateId{0}, std::nullopt}, 2), 1e-7),
                 ConstructionError);
    EXPECT_THROW(potential_from_abstraction(abs, AggregationFn::by_cell({StateId{0}}, 3), 1e-7), ConstructionError);
}

TEST(PotentialFromAbstraction, EightRoomsGoalIsMaximal) {
    const auto world = eight_rooms_world();
    auto [abs, alpha] = build_eight_rooms_abstraction(world, 0.9, 0.9);
    const auto phi = potential_from_abstraction(abs, alpha, 1e-7);
    const auto absv = value_iteration(abs, 1e-7, {}).values;
    double best_goal = 0.0, best_other = 0.0;
    for (StateId s = 0; s < phi.size(); ++s) {
        if (alpha(s) == eight_rooms::kG) best_goal = std::max(best_goal, phi[s]);
        else best_other = std::max(best_other, phi[s]);
    }
    EXPECT_GT(best_goal, best_other);
    EXPECT_DOUBLE_EQ(phi.bound_phi(), *std::max_element(absv.begin(), absv.end()));
}

TEST(PotentialFromAbstraction, IncreasesAlongTheRoomPath) {
    const auto v = eight_rooms_abstract_values();
    // Shortest room path from S to G: R1 (violet) is a dead end off S, so the
    // route goes S -> R2 -> R3 -> R4 -> R6 -> G.
    const std::vector<StateId> path{eight_rooms::kS, 2, 3, 4, 6, eight_rooms::kG};
    for (std::size_t i = 0; i + 1 < path.size(); ++i) EXPECT_LT(v[path[i]], v[path[i + 1]]);
}
