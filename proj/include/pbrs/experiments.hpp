#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pbrs/abstraction.hpp"
#include "pbrs/envs/eight_rooms.hpp"
#include "pbrs/evaluation.hpp"
#include "pbrs/learners.hpp"
#include "pbrs/policy_gradient.hpp"
#include "pbrs/random_mdp.hpp"
#include "pbrs/value_iteration.hpp"

// Seeded experiment drivers shared by the command-line runner and the
// acceptance harness. Each case is a pure function of its seed.
namespace pbrs::experiments {

// Runs fn(0..n-1) on up to `jobs` threads. Results must be written to
// per-index slots by the caller; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------- 8-rooms

enum class Algo { Vanilla, Apbrs, Opa };

inline std::optional<Algo> parse_algo(const std::string& name) {
    if (name == "vanilla") return Algo::Vanilla;
    if (name == "apbrs") return Algo::Apbrs;
    if (name == "opa") return Algo::Opa;
    return std::nullopt;
}

inline std::string algo_name(Algo a) {
    switch (a) {
        case Algo::Vanilla: return "vanilla";
        case Algo::Apbrs: return "apbrs";
        case Algo::Opa: return "opa";
    }
    return "?";
}

inline double default_lr_start(Algo a) {
    switch (a) {
        case Algo::Vanilla: return 0.85;
        case Algo::Apbrs: return 0.7;
        case Algo::Opa: return 1.0;
    }
    return 0.85;
}

inline constexpr double kAbstractionViEps = 1e-7;
inline constexpr double kEightRoomsAbstractionGamma = 0.9;

// phi(s) = abs_phi(alpha(s)) for every cell of a cell aggregation.
inline Potential lift_potential(const Potential& abs_phi, const AggregationFn& alpha) {
    if (alpha.num_abstract() != abs_phi.size())
        throw ConstructionError("potential size does not match the aggregation image");
    std::vector<double> v(alpha.domain_size());
    for (StateId s = 0; s < v.size(); ++s) {
        const auto a = alpha(s);
        if (!a) throw ConstructionError("aggregation is not total");
        v[s] = abs_phi[*a];
    }
    return Potential(std::move(v), abs_phi.bound_phi());
}

// Abstract-room potential of the 8-rooms grid, rescaled to [0, 1].
inline Potential eight_rooms_potential(double abs_gamma = kEightRoomsAbstractionGamma,
                                       double eps = kAbstractionViEps) {
    const auto world = eight_rooms_world();
    const auto [abs, alpha] = build_eight_rooms_abstraction(world, abs_gamma);
    return potential_from_abstraction(abs, alpha, eps).rescaled_to(1.0);
}

inline RunConfig gridworld_config(Algo a, std::uint64_t seed) {
    RunConfig c;
    c.seed = seed;
    c.lr.start = default_lr_start(a);
    return c;
}

inline LearningCurve run_algo(const TabularMdp& env, const Potential& phi, Algo a, const RunConfig& cfg) {
    switch (a) {
        case Algo::Vanilla: return q_learning_run(env, cfg);
        case Algo::Apbrs: return q_learning_run(env, cfg, stationary_shaping(phi, cfg.gamma));
        case Algo::Opa: return opa_pbrs_run(env, phi, cfg);
    }
    throw UsageError("unknown algorithm");
}

// Mean metric across curves at a given interaction count.
inline double mean_at(const std::vector<LearningCurve>& curves, std::size_t interactions) {
    double total = 0.0;
    for (const auto& c : curves) {
        const auto it = std::find_if(c.points.begin(), c.points.end(),
                                     [&](const CurvePoint& p) { return p.interactions == interactions; });
        if (it == c.points.end()) throw UsageError("no evaluation at " + std::to_string(interactions) + " interactions");
        total += it->metric;
    }
    return total / static_cast<double>(curves.size());
}

// Area under the mean curve (trapezoid rule over the evaluation points).
inline double mean_curve_area(const std::vector<LearningCurve>& curves) {
    double area = 0.0;
    const auto& pts = curves.front().points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double lo = 0.0, hi = 0.0;
        for (const auto& c : curves) {
            lo += c.points.at(i - 1).metric;
            hi += c.points.at(i).metric;
        }
        lo /= static_cast<double>(curves.size());
        hi /= static_cast<double>(curves.size());
        area += 0.5 * (lo + hi) * static_cast<double>(pts[i].interactions - pts[i - 1].interactions);
    }
    return area;
}

// ---------------------------------------------------------------- property cases

// phi = V* + uniform noise of half-width 0.45 ||V* - V0||, V0 = 0.
inline Prop1Result prop1_case(std::uint64_t seed, double eps = 1e-6) {
    const std::size_t S = 20;
    const auto mdp = random_models::general(seed, S, 3, 4, 0.9);
    const auto vstar = solve_optimal(mdp).values;
    const std::vector<double> v0(S, 0.0);
    const double delta = 0.45 * sup_norm_diff(vstar, v0);
    const auto noise = random_models::values(seed + 1000, S, -delta, delta);
    std::vector<double> phi(S);
    for (std::size_t s = 0; s < S; ++s) phi[s] = vstar[s] + noise[s];
    const double top = std::max(0.0, *std::max_element(phi.begin(), phi.end()));
    return prop1_experiment(mdp, Potential(std::move(phi), top), v0, eps);
}

inline EquivalenceResult wiewiora_case(std::uint64_t seed, std::size_t steps = 10'000) {
    const auto env = seed % 2 ? random_models::general(seed, 6, 3, 3, 0.9) : random_models::goal_oriented(seed, 6, 3, 3, 0.95);
    const auto phi = random_models::potential(seed + 11, 6, 5.0);
    const auto stream = random_experience_stream(env, steps, seed + 22);
    return wiewiora_equivalence_check(env, phi, stream, Schedule{0.9, 0.05, steps});
}

struct PgFixture {
    TabularMdp mdp;
    SoftmaxPolicyParams theta;
    Potential phi;
    std::size_t horizon;
};

inline PgFixture pg_fixture(std::uint64_t seed) {
    auto mdp = seed % 2 ? random_models::general(seed, 4, 2, 3, 0.9) : random_models::goal_oriented(seed, 4, 2, 2, 0.9);
    return {std::move(mdp), random_models::softmax_params(seed + 1, 4, 2), random_models::potential(seed + 2, 4, 3.0), 5};
}

inline std::vector<double> central_difference_gradient(const TabularMdp& mdp, const SoftmaxPolicyParams& th,
                                                       std::size_t H, double h = 1e-6) {
    std::vector<double> g(th.theta.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto plus = th, minus = th;
        plus.theta[i] += h;
        minus.theta[i] -= h;
        g[i] = (pg_objective(mdp, plus, H) - pg_objective(mdp, minus, H)) / (2.0 * h);
    }
    return g;
}

struct PgRow {
    double prop2 = 0.0;
    double stationary = 0.0;
    double finite_difference = 0.0;
};

inline PgRow pg_row(std::uint64_t seed) {
    const auto f = pg_fixture(seed);
    PgRow r;
    r.prop2 = std::max(prop2_check(f.mdp, f.theta, f.phi, f.horizon),
                       prop2_check(f.mdp, f.theta, f.phi, f.horizon, GradientPath::TrajectoryEnumeration));
    r.stationary = stationary_shaping_deviation(f.mdp, f.theta, f.phi, f.horizon);
    r.finite_difference =
        sup_norm_diff(exact_policy_gradient(f.mdp, f.theta, f.horizon), central_difference_gradient(f.mdp, f.theta, f.horizon));
    return r;
}

// Paired raw vs. baseline(V^pi) estimator on one repetition. The baseline is
// the infinite-horizon value, so the horizon is long enough for gamma^H to be small.
struct VarianceRow {
    double raw_trace = 0.0;
    double baseline_trace = 0.0;
};

inline constexpr std::size_t kVarianceHorizon = 40;
inline constexpr std::size_t kVarianceSamples = 20'000;

inline VarianceRow variance_row(std::uint64_t rep) {
    const auto mdp = random_models::general(100 + rep, 4, 2, 3, 0.9);
    const auto th = random_models::softmax_params(200 + rep, 4, 2);
    const auto v = policy_evaluation_exact(mdp, th.policy());
    return {estimator_variance(mdp, th, kVarianceHorizon, {}, kVarianceSamples, 300 + rep).trace,
            estimator_variance(mdp, th, kVarianceHorizon, v, kVarianceSamples, 300 + rep).trace};
}

}  // namespace pbrs::experiments
