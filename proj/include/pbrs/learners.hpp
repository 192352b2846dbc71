#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pbrs/common.hpp"
#include "pbrs/mdp.hpp"
#include "pbrs/shaping.hpp"

namespace pbrs {

struct Schedule {
    double start = 1.0;
    double end = 1.0;
    std::size_t steps = 1;

    double value(std::size_t t) const {
        if (t >= steps) return end;
        const double frac = static_cast<double>(std::min(t, steps)) / static_cast<double>(steps);
        return start + (end - start) * frac;
    }
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::size_t total_interactions = 300'000;
    std::size_t horizon = 70;
    double gamma = 0.98;
    Schedule lr{0.85, 0.01, 300'000};
    Schedule epsilon{1.0, 0.1, 300'000};
    std::size_t eval_every = 5'000;
    std::size_t eval_episodes = 30;

    void validate() const {
        if (total_interactions == 0 || horizon == 0 || eval_every == 0 || eval_episodes == 0)
            throw UsageError("run config counts must be positive");
        if (lr.steps == 0 || epsilon.steps == 0) throw UsageError("schedule length must be positive");
        if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("gamma must lie in [0,1)");
    }
};

struct CurvePoint {
    std::size_t interactions;
    double metric;
};

struct LearningCurve {
    std::uint64_t seed = 0;
    std::vector<CurvePoint> points;
};

enum class QInit { Zero, FromPotential };

class QTable {
public:
    QTable(std::size_t S, std::size_t A) : S_(S), A_(A), q_(S * A, 0.0) {}
    QTable(const Potential& phi, std::size_t A) : S_(phi.size()), A_(A), q_(phi.size() * A), init_(QInit::FromPotential) {
        for (std::size_t s = 0; s < S_; ++s)
            for (std::size_t a = 0; a < A_; ++a) q_[s * A_ + a] = phi[static_cast<StateId>(s)];
    }

    double& operator()(StateId s, ActionId a) { return q_[static_cast<std::size_t>(s) * A_ + a]; }
    double operator()(StateId s, ActionId a) const { return q_[static_cast<std::size_t>(s) * A_ + a]; }
    std::size_t num_states() const { return S_; }
    std::size_t num_actions() const { return A_; }
    QInit init_mode() const { return init_; }
    const std::vector<double>& values() const { return q_; }

    // Max over available actions; rows of terminal states (no available
    // action) keep their initial values and are maximised over all actions.
    double max_value(const TabularMdp& mdp, StateId s) const {
        double best = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (ActionId a = 0; a < A_; ++a)
            if (mdp.available(s, a)) {
                best = std::max(best, (*this)(s, a));
                any = true;
            }
        if (!any)
            for (ActionId a = 0; a < A_; ++a) best = std::max(best, (*this)(s, a));
        return best;
    }

    ActionId greedy(const TabularMdp& mdp, StateId s, Rng& rng) const {
        double best = -std::numeric_limits<double>::infinity();
        ActionId ties[64];
        std::size_t n = 0;
        for (ActionId a = 0; a < A_; ++a) {
            if (!mdp.available(s, a)) continue;
            const double v = (*this)(s, a);
            if (v > best) {
                best = v;
                n = 0;
            }
            if (v == best && n < 64) ties[n++] = a;
        }
        if (n == 0) throw UsageError("no available action");
        return n == 1 ? ties[0] : ties[rng.below(n)];
    }

private:
    std::size_t S_, A_;
    std::vector<double> q_;
    QInit init_ = QInit::Zero;
};

using ShapingFn = std::function<double(StateId, ActionId, StateId)>;

inline ShapingFn stationary_shaping(const Potential& phi, double gamma) {
    return [phi, gamma](StateId s, ActionId, StateId n) { return gamma * phi[n] - phi[s]; };
}

// Mean length of greedy episodes (truncated episodes count as the horizon).
inline double greedy_episode_length(const TabularMdp& env, const QTable& q, std::size_t horizon,
                                    std::size_t episodes, std::uint64_t seed) {
    Rng rng(seed);
    double total = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
        StateId s = sample_start(env, rng);
        std::size_t steps = 0;
        while (steps < horizon && !env.is_terminal(s)) {
            const ActionId a = q.greedy(env, s, rng);
            s = sample_transition(env, s, a, rng).first;
            ++steps;
        }
        total += static_cast<double>(steps);
    }
    return total / static_cast<double>(episodes);
}

namespace detail {

inline ActionId epsilon_greedy(const TabularMdp& env, const QTable& q, StateId s, double eps, Rng& rng) {
    if (rng.uniform() < eps) {
        const auto acts = env.available_actions(s);
        return acts[rng.below(acts.size())];
    }
    return q.greedy(env, s, rng);
}

inline void q_update(QTable& q, const TabularMdp& env, StateId s, ActionId a, StateId next, double reward,
                     double gamma, double lr) {
    const double boot = env.is_terminal(next) ? 0.0 : gamma * q.max_value(env, next);
    q(s, a) += lr * (reward + boot - q(s, a));
}

// Shared online loop. When `target` is given it is trained on the raw reward
// and used for evaluation, while `behavior` (trained on shaped rewards) acts.
inline LearningCurve run_loop(const TabularMdp& env, const RunConfig& cfg, const ShapingFn& shaping,
                              QTable& behavior, QTable* target) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0));
    LearningCurve curve;
    curve.seed = cfg.seed;
    std::size_t eval_index = 0;
    auto evaluate = [&](std::size_t t) {
        const QTable& scored = target ? *target : behavior;
        curve.points.push_back(
            {t, greedy_episode_length(env, scored, cfg.horizon, cfg.eval_episodes, derive_seed(cfg.seed, 1000 + eval_index++))});
    };
    evaluate(0);
    std::size_t t = 0;
    while (t < cfg.total_interactions) {
        StateId s = sample_start(env, rng);
        std::size_t steps = 0;
        while (!env.is_terminal(s) && steps < cfg.horizon && t < cfg.total_interactions) {
            const ActionId a = epsilon_greedy(env, behavior, s, cfg.epsilon.value(t), rng);
            const auto [next, r] = sample_transition(env, s, a, rng);
            const double lr = cfg.lr.value(t);
            const double f = shaping ? shaping(s, a, next) : 0.0;
            q_update(behavior, env, s, a, next, r + f, cfg.gamma, lr);
            if (target) q_update(*target, env, s, a, next, r, cfg.gamma, lr);
            s = next;
            ++steps;
            ++t;
            if (t % cfg.eval_every == 0) evaluate(t);
        }
    }
    return curve;
}

}  // namespace detail

// Tabular Q-learning with optional shaping F(s, a, s') added to the reward.
inline LearningCurve q_learning_run(const TabularMdp& env, const RunConfig& cfg, const ShapingFn& shaping = {},
                                    QTable* final_q = nullptr) {
    QTable q(env.num_states(), env.num_actions());
    auto curve = detail::run_loop(env, cfg, shaping, q, nullptr);
    if (final_q) *final_q = q;
    return curve;
}

// Two-learner scheme: a shaped behaviour table explores, an unshaped target
// table learns off-policy from the same transitions and is the one evaluated.
// This is our reconstruction of the scheme from its two-agent description.
inline LearningCurve opa_pbrs_run(const TabularMdp& env, const Potential& phi, const RunConfig& cfg,
                                  QTable* final_behavior = nullptr, QTable* final_target = nullptr) {
    if (phi.size() != env.num_states()) throw UsageError("potential domain does not match the environment");
    QTable behavior(env.num_states(), env.num_actions());
    QTable target(env.num_states(), env.num_actions());
    auto curve = detail::run_loop(env, cfg, stationary_shaping(phi, cfg.gamma), behavior, &target);
    if (final_behavior) *final_behavior = behavior;
    if (final_target) *final_target = target;
    return curve;
}

struct Experience {
    StateId s;
    ActionId a;
    StateId next;
    double reward;
};

// Random recorded stream: uniformly chosen non-terminal state and available
// action, successor sampled from the dynamics.
inline std::vector<Experience> random_experience_stream(const TabularMdp& env, std::size_t length, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<StateId> live;
    for (StateId s = 0; s < env.num_states(); ++s)
        if (!env.is_terminal(s)) live.push_back(s);
    if (live.empty()) throw UsageError("environment has no non-terminal state");
    std::vector<Experience> out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        const StateId s = live[rng.below(live.size())];
        const auto acts = env.available_actions(s);
        const ActionId a = acts[rng.below(acts.size())];
        auto [n, r] = sample_transition(env, s, a, rng);
        out.push_back({s, a, n, r});
    }
    return out;
}

struct EquivalenceResult {
    bool equal = true;
    double max_deviation = 0.0;
    std::size_t first_violation = std::numeric_limits<std::size_t>::max();  // update index
};

// Learner (a): shaped rewards, zero init, fed stream_a. Learner (b): raw
// rewards, Q0(s,a) = phi(s), fed stream_b. Both use lr.value(t) at update t.
// After every update all entries are compared: Q_a + phi(s) vs Q_b.
inline EquivalenceResult wiewiora_equivalence_check(const TabularMdp& env, const Potential& phi,
                                                    const std::vector<Experience>& stream_a,
                                                    const std::vector<Experience>& stream_b, const Schedule& lr,
                                                    double tol = 1e-10) {
    if (phi.size() != env.num_states()) throw UsageError("potential domain does not match the environment");
    if (stream_a.size() != stream_b.size()) throw UsageError("experience streams differ in length");
    auto check = [&](const Experience& e) {
        if (e.s >= env.num_states() || env.is_terminal(e.s) || !env.available(e.s, e.a))
            throw UsageError("experience stream references an invalid (s,a) pair");
        bool found = false;
        for (const auto& t : env.outcomes(e.s, e.a)) found = found || t.next == e.next;
        if (!found) throw UsageError("experience stream references an impossible transition");
    };
    for (const auto& e : stream_a) check(e);
    for (const auto& e : stream_b) check(e);

    const double g = env.gamma();
    const std::size_t A = env.num_actions();
    QTable qa(env.num_states(), A);
    QTable qb(phi, A);
    EquivalenceResult res;
    for (std::size_t i = 0; i < stream_a.size(); ++i) {
        const double step = lr.value(i);
        const auto& ea = stream_a[i];
        const double fa = g * phi[ea.next] - phi[ea.s];
        qa(ea.s, ea.a) += step * (ea.reward + fa + g * qa.max_value(env, ea.next) - qa(ea.s, ea.a));
        const auto& eb = stream_b[i];
        qb(eb.s, eb.a) += step * (eb.reward + g * qb.max_value(env, eb.next) - qb(eb.s, eb.a));
        for (StateId s = 0; s < env.num_states(); ++s)
            for (ActionId a = 0; a < A; ++a) {
                const double d = std::abs(qa(s, a) + phi[s] - qb(s, a));
                res.max_deviation = std::max(res.max_deviation, d);
                if (d > tol && res.equal) {
                    res.equal = false;
                    res.first_violation = i;
                }
            }
    }
    return res;
}

inline EquivalenceResult wiewiora_equivalence_check(const TabularMdp& env, const Potential& phi,
                                                    const std::vector<Experience>& stream, const Schedule& lr,
                                                    double tol = 1e-10) {
    return wiewiora_equivalence_check(env, phi, stream, stream, lr, tol);
}

}  // namespace pbrs
