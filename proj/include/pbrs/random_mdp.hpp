#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "pbrs/common.hpp"
#include "pbrs/mdp.hpp"
#include "pbrs/policy_gradient.hpp"
#include "pbrs/shaping.hpp"

// Seeded generators for the property suites. A given seed always yields the
// same model, so failing cases can be replayed by seed.
namespace pbrs::random_models {

inline std::vector<double> random_simplex(Rng& rng, std::size_t n) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
        x = 0.05 + rng.uniform();
        total += x;
    }
    for (auto& x : w) x /= total;
    // Push rounding residue onto the largest entry so the sum is 1 to the last bit we can get.
    double s = 0.0;
    for (double x : w) s += x;
    *std::max_element(w.begin(), w.end()) += 1.0 - s;
    return w;
}

inline std::vector<StateId> pick_distinct(Rng& rng, std::size_t from, std::size_t count) {
    std::vector<StateId> all(from);
    for (std::size_t i = 0; i < from; ++i) all[i] = static_cast<StateId>(i);
    for (std::size_t i = 0; i < count && i < from; ++i) std::swap(all[i], all[i + rng.below(from - i)]);
    all.resize(std::min(count, from));
    std::sort(all.begin(), all.end());
    return all;
}

// No terminal states, every action available, rewards in [0, 1].
inline TabularMdp general(std::uint64_t seed, std::size_t S, std::size_t A, std::size_t branching, double gamma,
                          bool random_rho = true) {
    Rng rng(seed);
    MdpBuilder b(S, A, gamma);
    for (StateId s = 0; s < S; ++s)
        for (ActionId a = 0; a < A; ++a) {
            const auto next = pick_distinct(rng, S, std::max<std::size_t>(1, std::min(branching, S)));
            const auto p = random_simplex(rng, next.size());
            for (std::size_t i = 0; i < next.size(); ++i) b.add(s, a, next[i], p[i], rng.uniform());
        }
    if (random_rho)
        b.rho(random_simplex(rng, S));
    else
        b.start(0);
    b.reward_bound(1.0);
    return b.build();
}

// Goal-oriented MDP whose last state is the single goal. Deterministic when
// branching == 1. State 0 is the start.
inline TabularMdp goal_oriented(std::uint64_t seed, std::size_t S, std::size_t A, std::size_t branching, double gamma) {
    if (S < 2) throw UsageError("goal-oriented generator needs at least two states");
    Rng rng(seed);
    const StateId goal = static_cast<StateId>(S - 1);
    MdpBuilder b(S, A, gamma);
    for (StateId s = 0; s < goal; ++s)
        for (ActionId a = 0; a < A; ++a) {
            const auto next = pick_distinct(rng, S, std::max<std::size_t>(1, std::min(branching, S)));
            const auto p = next.size() == 1 ? std::vector<double>{1.0} : random_simplex(rng, next.size());
            for (std::size_t i = 0; i < next.size(); ++i) b.add(s, a, next[i], p[i], next[i] == goal ? 1.0 : 0.0);
        }
    b.terminal(goal).goals({goal}).goal_oriented(true).start(0).reward_bound(1.0);
    return b.build();
}

inline Potential potential(std::uint64_t seed, std::size_t S, double phi_max) {
    Rng rng(seed);
    std::vector<double> v(S);
    for (auto& x : v) x = rng.uniform(0.0, phi_max);
    return Potential(std::move(v), phi_max);
}

inline std::vector<double> values(std::uint64_t seed, std::size_t n, double lo, double hi) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline Policy softmax_policy(std::uint64_t seed, std::size_t S, std::size_t A, double scale = 2.0) {
    return Policy::softmax(S, A, values(seed, S * A, -scale, scale));
}

inline SoftmaxPolicyParams softmax_params(std::uint64_t seed, std::size_t S, std::size_t A, double scale = 1.0) {
    return SoftmaxPolicyParams(S, A, values(seed, S * A, -scale, scale));
}

}  // namespace pbrs::random_models
