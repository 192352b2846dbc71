#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "pbrs/evaluation.hpp"
#include "pbrs/mdp.hpp"
#include "pbrs/shaping.hpp"

namespace pbrs {

struct SoftmaxPolicyParams {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> theta;  // row-major (state, action)

    SoftmaxPolicyParams() = default;
    SoftmaxPolicyParams(std::size_t S, std::size_t A, std::vector<double> th)
        : num_states(S), num_actions(A), theta(std::move(th)) {
        if (theta.size() != S * A) throw UsageError("theta has wrong size");
        for (double v : theta)
            if (!std::isfinite(v)) throw UsageError("theta must be finite");
    }
    Policy policy() const { return Policy::softmax(num_states, num_actions, theta); }
};

enum class RewardMode { Raw, ShapedGrzes, ShapedStationary, Baseline };

// Reward mode plus its state table: the potential for the shaped modes, b(s)
// for the baseline mode.
struct GradientMode {
    RewardMode kind = RewardMode::Raw;
    std::vector<double> table;

    static GradientMode raw() { return {}; }
    static GradientMode grzes(const Potential& phi) { return {RewardMode::ShapedGrzes, phi.values()}; }
    static GradientMode stationary(const Potential& phi) { return {RewardMode::ShapedStationary, phi.values()}; }
    static GradientMode baseline(std::vector<double> b) { return {RewardMode::Baseline, std::move(b)}; }
};

enum class GradientPath { DynamicProgramming, TrajectoryEnumeration };

namespace detail {

// Reward of one step under the mode; `final` marks the episode's last state.
inline double mode_reward(const GradientMode& m, double gamma, StateId s, StateId next, double r, bool final) {
    switch (m.kind) {
        case RewardMode::ShapedGrzes: return r + gamma * (final ? 0.0 : m.table[next]) - m.table[s];
        case RewardMode::ShapedStationary: return r + gamma * m.table[next] - m.table[s];
        default: return r;
    }
}

inline void check_mode(const TabularMdp& mdp, const SoftmaxPolicyParams& th, const GradientMode& m) {
    if (th.num_states != mdp.num_states() || th.num_actions != mdp.num_actions())
        throw UsageError("policy parameters do not match the MDP");
    if (m.kind != RewardMode::Raw && m.table.size() != mdp.num_states())
        throw UsageError("mode table does not match the MDP");
}

}  // namespace detail

// Steps-to-go action values under the mode's rewards: q[k][s*A+a] for k = 1..H.
inline std::vector<std::vector<double>> steps_to_go_q(const TabularMdp& mdp, const Policy& pi, std::size_t H,
                                                      const GradientMode& mode) {
    const std::size_t S = mdp.num_states(), A = mdp.num_actions();
    const double g = mdp.gamma();
    std::vector<std::vector<double>> q(H + 1, std::vector<double>(S * A, 0.0));
    std::vector<double> v(S, 0.0), nv(S, 0.0);
    for (std::size_t k = 1; k <= H; ++k) {
        for (StateId s = 0; s < S; ++s) {
            nv[s] = 0.0;
            if (mdp.is_terminal(s)) continue;
            for (ActionId a = 0; a < A; ++a) {
                double acc = 0.0;
                for (const auto& t : mdp.outcomes(s, a)) {
                    const bool final = (k == 1) || mdp.is_terminal(t.next);
                    acc += t.prob * (detail::mode_reward(mode, g, s, t.next, t.reward, final) + g * v[t.next]);
                }
                q[k][s * A + a] = acc;
                nv[s] += pi.prob(s, a) * acc;
            }
        }
        v.swap(nv);
    }
    return q;
}

// Exact H-step objective E_rho[V_H] under the mode's rewards (baseline = raw).
inline double pg_objective(const TabularMdp& mdp, const SoftmaxPolicyParams& theta, std::size_t H,
                           const GradientMode& mode = GradientMode::raw()) {
    detail::check_mode(mdp, theta, mode);
    const Policy pi = theta.policy();
    check_policy(mdp, pi);
    if (H == 0) return 0.0;
    const auto q = steps_to_go_q(mdp, pi, H, mode);
    const std::size_t A = mdp.num_actions();
    double j = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (mdp.rho()[s] == 0.0 || mdp.is_terminal(s)) continue;
        double vs = 0.0;
        for (ActionId a = 0; a < A; ++a) vs += pi.prob(s, a) * q[H][s * A + a];
        j += mdp.rho()[s] * vs;
    }
    return j;
}

namespace detail {

inline std::vector<double> gradient_dp(const TabularMdp& mdp, const Policy& pi, std::size_t H, const GradientMode& mode) {
    const std::size_t S = mdp.num_states(), A = mdp.num_actions();
    const double g = mdp.gamma();
    const auto q = steps_to_go_q(mdp, pi, H, mode);
    std::vector<double> grad(S * A, 0.0);
    std::vector<double> d(S, 0.0), nd(S, 0.0);
    for (StateId s = 0; s < S; ++s)
        if (!mdp.is_terminal(s)) d[s] = mdp.rho()[s];
    double disc = 1.0;
    for (std::size_t t = 0; t < H; ++t) {
        const auto& qk = q[H - t];
        for (StateId s = 0; s < S; ++s) {
            if (d[s] == 0.0) continue;
            const double base = mode.kind == RewardMode::Baseline ? mode.table[s] : 0.0;
            // sum_a pi(a) (1{a=b} - pi(b)) (Q(a) - base) = pi(b) (Q(b) - base - sum_a pi(a)(Q(a) - base))
            double mean = 0.0;
            for (ActionId a = 0; a < A; ++a) mean += pi.prob(s, a) * (qk[s * A + a] - base);
            for (ActionId b = 0; b < A; ++b)
                grad[s * A + b] += disc * d[s] * pi.prob(s, b) * (qk[s * A + b] - base - mean);
        }
        std::fill(nd.begin(), nd.end(), 0.0);
        for (StateId s = 0; s < S; ++s) {
            if (d[s] == 0.0) continue;
            for (ActionId a = 0; a < A; ++a)
                for (const auto& tr : mdp.outcomes(s, a))
                    if (!mdp.is_terminal(tr.next)) nd[tr.next] += d[s] * pi.prob(s, a) * tr.prob;
        }
        d.swap(nd);
        disc *= g;
    }
    return grad;
}

struct Enumerator {
    const TabularMdp& mdp;
    const Policy& pi;
    std::size_t H;
    const GradientMode& mode;
    std::uint64_t guard;
    std::vector<double>& grad;
    std::uint64_t leaves = 0;
    std::vector<StateId> states;
    std::vector<ActionId> actions;
    std::vector<double> rewards;

    void leaf(double weight) {
        if (++leaves > guard) throw CapacityError("trajectory enumeration exceeds the guard", leaves);
        const std::size_t A = mdp.num_actions();
        const double g = mdp.gamma();
        const std::size_t n = actions.size();
        // Discounted reward-to-go from time 0: G_t = sum_{k>=t} gamma^k r_k.
        std::vector<double> disc(n + 1, 1.0), go(n + 1, 0.0);
        for (std::size_t k = 1; k <= n; ++k) disc[k] = disc[k - 1] * g;
        for (std::size_t k = n; k-- > 0;) go[k] = go[k + 1] + disc[k] * rewards[k];
        for (std::size_t t = 0; t < n; ++t) {
            const StateId s = states[t];
            const double base = mode.kind == RewardMode::Baseline ? disc[t] * mode.table[s] : 0.0;
            const double coeff = weight * (go[t] - base);
            for (ActionId b = 0; b < A; ++b)
                grad[s * A + b] += coeff * ((b == actions[t] ? 1.0 : 0.0) - pi.prob(s, b));
        }
    }

    void walk(double weight) {
        const StateId s = states.back();
        if (actions.size() == H || mdp.is_terminal(s)) {
            leaf(weight);
            return;
        }
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const double pa = pi.prob(s, a);
            if (pa == 0.0) continue;
            for (const auto& t : mdp.outcomes(s, a)) {
                const bool final = actions.size() + 1 == H || mdp.is_terminal(t.next);
                states.push_back(t.next);
                actions.push_back(a);
                rewards.push_back(mode_reward(mode, mdp.gamma(), s, t.next, t.reward, final));
                walk(weight * pa * t.prob);
                states.pop_back();
                actions.pop_back();
                rewards.pop_back();
            }
        }
    }
};

}  // namespace detail

// Exact gradient of the H-step objective with respect to the logits.
inline std::vector<double> exact_policy_gradient(const TabularMdp& mdp, const SoftmaxPolicyParams& theta, std::size_t H,
                                                 const GradientMode& mode = GradientMode::raw(),
                                                 GradientPath path = GradientPath::DynamicProgramming,
                                                 std::uint64_t guard = 1'000'000) {
    detail::check_mode(mdp, theta, mode);
    const Policy pi = theta.policy();
    check_policy(mdp, pi);
    if (path == GradientPath::DynamicProgramming) return detail::gradient_dp(mdp, pi, H, mode);
    std::vector<double> grad(mdp.num_states() * mdp.num_actions(), 0.0);
    detail::Enumerator en{mdp, pi, H, mode, guard, grad, 0, {}, {}, {}};
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (mdp.rho()[s] == 0.0) continue;
        en.states = {s};
        en.walk(mdp.rho()[s]);
    }
    return grad;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) { return sup_norm_diff(a, b); }

// Max-norm gap between the terminal-zeroed shaped gradient and the gradient
// with baseline b(s) = phi(s).
inline double prop2_check(const TabularMdp& mdp, const SoftmaxPolicyParams& theta, const Potential& phi, std::size_t H,
                          GradientPath path = GradientPath::DynamicProgramming) {
    const auto shaped = exact_policy_gradient(mdp, theta, H, GradientMode::grzes(phi), path);
    const auto based = exact_policy_gradient(mdp, theta, H, GradientMode::baseline(phi.values()), path);
    return max_abs_diff(shaped, based);
}

// Same comparison with stationary shaping (phi kept at the final state).
inline double stationary_shaping_deviation(const TabularMdp& mdp, const SoftmaxPolicyParams& theta, const Potential& phi,
                                           std::size_t H) {
    const auto shaped = exact_policy_gradient(mdp, theta, H, GradientMode::stationary(phi));
    const auto based = exact_policy_gradient(mdp, theta, H, GradientMode::baseline(phi.values()));
    return max_abs_diff(shaped, based);
}

struct VarianceEstimate {
    std::vector<double> mean;
    std::vector<double> variance;  // per component, unbiased
    double trace = 0.0;
    std::size_t samples = 0;
};

// Single-trajectory REINFORCE estimates; an empty baseline means the raw
// estimator. Trajectories depend only on (seed, theta), so two calls with the
// same seed see the same episodes.
inline VarianceEstimate estimator_variance(const TabularMdp& mdp, const SoftmaxPolicyParams& theta, std::size_t H,
                                           const std::vector<double>& baseline, std::size_t samples,
                                           std::uint64_t seed) {
    if (samples < 2) throw UsageError("estimator_variance needs at least two samples");
    const GradientMode mode = baseline.empty() ? GradientMode::raw() : GradientMode::baseline(baseline);
    detail::check_mode(mdp, theta, mode);
    const Policy pi = theta.policy();
    check_policy(mdp, pi);
    const std::size_t S = mdp.num_states(), A = mdp.num_actions();
    const double g = mdp.gamma();
    Rng rng(seed);
    std::vector<double> sum(S * A, 0.0), sumsq(S * A, 0.0), est(S * A);
    for (std::size_t n = 0; n < samples; ++n) {
        const Trajectory tr = simulate_episode(mdp, pi, H, rng);
        std::fill(est.begin(), est.end(), 0.0);
        const std::size_t T = tr.horizon();
        std::vector<double> go(T + 1, 0.0);
        std::vector<double> disc(T + 1, 1.0);
        for (std::size_t k = 1; k <= T; ++k) disc[k] = disc[k - 1] * g;
        for (std::size_t k = T; k-- > 0;) go[k] = go[k + 1] + disc[k] * tr.rewards[k];
        for (std::size_t t = 0; t < T; ++t) {
            const StateId s = tr.states[t];
            const double c = go[t] - (baseline.empty() ? 0.0 : disc[t] * baseline[s]);
            for (ActionId b = 0; b < A; ++b) est[s * A + b] += c * ((b == tr.actions[t] ? 1.0 : 0.0) - pi.prob(s, b));
        }
        for (std::size_t i = 0; i < est.size(); ++i) {
            sum[i] += est[i];
            sumsq[i] += est[i] * est[i];
        }
    }
    VarianceEstimate out;
    out.samples = samples;
    out.mean.resize(S * A);
    out.variance.resize(S * A);
    const double n = static_cast<double>(samples);
    for (std::size_t i = 0; i < S * A; ++i) {
        out.mean[i] = sum[i] / n;
        out.variance[i] = std::max(0.0, (sumsq[i] - n * out.mean[i] * out.mean[i]) / (n - 1.0));
        out.trace += out.variance[i];
    }
    return out;
}

}  // namespace pbrs
