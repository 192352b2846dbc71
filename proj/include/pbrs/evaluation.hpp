#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pbrs/common.hpp"
#include "pbrs/mdp.hpp"

namespace pbrs {

inline constexpr std::size_t kDirectSolveLimit = 2000;

// Sweep-based evaluation; used above the direct-solve size limit.
inline std::vector<double> iterative_policy_evaluation(const TabularMdp& mdp, const Policy& pi,
                                                       double tol = 1e-12,
                                                       std::size_t max_sweeps = 10'000'000) {
    const std::size_t S = mdp.num_states(), A = mdp.num_actions();
    const double g = mdp.gamma();
    std::vector<double> v(S, 0.0), next(S, 0.0);
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double resid = 0.0;
        for (StateId s = 0; s < S; ++s) {
            if (mdp.is_terminal(s)) {
                next[s] = 0.0;
                continue;
            }
            double acc = 0.0;
            for (ActionId a = 0; a < A; ++a) {
                const double p = pi.prob(s, a);
                if (p == 0.0) continue;
                double q = 0.0;
                for (const auto& t : mdp.outcomes(s, a)) q += t.prob * (t.reward + g * v[t.next]);
                acc += p * q;
            }
            next[s] = acc;
            resid = std::max(resid, std::abs(acc - v[s]));
        }
        v.swap(next);
        if (resid <= tol) break;
    }
    return v;
}

// V^pi from the linear Bellman system; terminal states are pinned to 0.
inline std::vector<double> policy_evaluation_exact(const TabularMdp& mdp, const Policy& pi) {
    check_policy(mdp, pi);
    const std::size_t S = mdp.num_states(), A = mdp.num_actions();
    if (S > kDirectSolveLimit) return iterative_policy_evaluation(mdp, pi);
    const double g = mdp.gamma();
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
    for (StateId s = 0; s < S; ++s) {
        if (mdp.is_terminal(s)) continue;
        for (ActionId a = 0; a < A; ++a) {
            const double p = pi.prob(s, a);
            if (p == 0.0) continue;
            for (const auto& t : mdp.outcomes(s, a)) {
                b(s) += p * t.prob * t.reward;
                M(s, t.next) -= g * p * t.prob;
            }
        }
    }
    Eigen::VectorXd v = M.partialPivLu().solve(b);
    // One step of iterative refinement tightens the residual for ill-conditioned gamma near 1.
    Eigen::VectorXd r = b - M * v;
    v += M.partialPivLu().solve(r);
    std::vector<double> out(v.data(), v.data() + S);
    for (StateId s = 0; s < S; ++s)
        if (mdp.is_terminal(s)) out[s] = 0.0;
    return out;
}

// Q(s,a) = sum_s' p (r + gamma V(s')); unavailable pairs get -infinity.
inline std::vector<double> action_values(const TabularMdp& mdp, const std::vector<double>& v) {
    const std::size_t S = mdp.num_states(), A = mdp.num_actions();
    std::vector<double> q(S * A, -std::numeric_limits<double>::infinity());
    for (StateId s = 0; s < S; ++s)
        for (ActionId a = 0; a < A; ++a) {
            if (!mdp.available(s, a)) continue;
            double acc = 0.0;
            for (const auto& t : mdp.outcomes(s, a)) acc += t.prob * (t.reward + mdp.gamma() * v[t.next]);
            q[s * A + a] = acc;
        }
    return q;
}

// Lowest-index action whose value is within tol of the state maximum.
inline std::vector<ActionId> greedy_actions(const TabularMdp& mdp, const std::vector<double>& v,
                                            double tol = 1e-9) {
    const std::size_t S = mdp.num_states(), A = mdp.num_actions();
    const auto q = action_values(mdp, v);
    std::vector<ActionId> act(S, 0);
    for (StateId s = 0; s < S; ++s) {
        if (mdp.is_terminal(s)) continue;
        double best = -std::numeric_limits<double>::infinity();
        for (ActionId a = 0; a < A; ++a) best = std::max(best, q[s * A + a]);
        for (ActionId a = 0; a < A; ++a)
            if (mdp.available(s, a) && q[s * A + a] >= best - tol) {
                act[s] = a;
                break;
            }
    }
    return act;
}

struct OptimalSolution {
    std::vector<double> values;
    std::vector<ActionId> policy;
};

// Exact V* by policy iteration. Meant for the small MDPs used in property tests.
inline OptimalSolution solve_optimal(const TabularMdp& mdp, std::size_t max_rounds = 1000) {
    std::vector<double> v(mdp.num_states(), 0.0);
    std::vector<ActionId> act = greedy_actions(mdp, v);
    for (StateId s = 0; s < mdp.num_states(); ++s)
        if (!mdp.is_terminal(s) && !mdp.available(s, act[s])) act[s] = mdp.available_actions(s).front();
    for (std::size_t round = 0; round < max_rounds; ++round) {
        v = policy_evaluation_exact(mdp, Policy::deterministic(act, mdp.num_actions()));
        const auto q = action_values(mdp, v);
        bool changed = false;
        const std::size_t A = mdp.num_actions();
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            if (mdp.is_terminal(s)) continue;
            ActionId best = act[s];
            for (ActionId a = 0; a < A; ++a)
                if (q[s * A + a] > q[s * A + best] + 1e-12) best = a;
            if (best != act[s]) {
                act[s] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return {v, greedy_actions(mdp, v)};
}

// Summary of the H-step trajectory distribution of a policy. Potential terms
// are zero when no potential table is supplied.
struct HorizonStats {
    double expected_return = 0.0;   // E[sum_{t<H} gamma^t r_t]
    double hit_potential = 0.0;     // E[gamma^h phi(s_h); absorbed at h <= H]
    double survivor_potential = 0.0;  // E[phi(s_H) 1{s_H not absorbed}], undiscounted
    double absorbed_mass = 0.0;
    std::vector<double> live;       // non-absorbed state distribution at step H
    double max_mass_error = 0.0;    // worst |live + absorbed - 1| over the steps
};

inline HorizonStats forward_horizon(const TabularMdp& mdp, const Policy& pi, std::size_t H,
                                    const std::vector<double>* phi = nullptr) {
    check_policy(mdp, pi);
    const std::size_t S = mdp.num_states(), A = mdp.num_actions();
    const double g = mdp.gamma();
    HorizonStats st;
    std::vector<double> d(S, 0.0), nd(S, 0.0);
    for (StateId s = 0; s < S; ++s) {
        const double m = mdp.rho()[s];
        if (m == 0.0) continue;
        if (mdp.is_terminal(s)) {
            st.absorbed_mass += m;
            if (phi) st.hit_potential += m * (*phi)[s];
        } else {
            d[s] = m;
        }
    }
    double disc = 1.0;
    for (std::size_t t = 0; t < H; ++t) {
        std::fill(nd.begin(), nd.end(), 0.0);
        double step_reward = 0.0;
        double step_hit = 0.0;
        for (StateId s = 0; s < S; ++s) {
            const double ms = d[s];
            if (ms == 0.0) continue;
            for (ActionId a = 0; a < A; ++a) {
                const double pa = pi.prob(s, a);
                if (pa == 0.0) continue;
                for (const auto& tr : mdp.outcomes(s, a)) {
                    const double m = ms * pa * tr.prob;
                    step_reward += m * tr.reward;
                    if (mdp.is_terminal(tr.next)) {
                        st.absorbed_mass += m;
                        if (phi) step_hit += m * (*phi)[tr.next];
                    } else {
                        nd[tr.next] += m;
                    }
                }
            }
        }
        st.expected_return += disc * step_reward;
        disc *= g;
        st.hit_potential += disc * step_hit;
        d.swap(nd);
        double live = 0.0;
        for (double m : d) live += m;
        st.max_mass_error = std::max(st.max_mass_error, std::abs(live + st.absorbed_mass - 1.0));
    }
    if (phi)
        for (StateId s = 0; s < S; ++s) st.survivor_potential += d[s] * (*phi)[s];
    st.live = std::move(d);
    return st;
}

inline double finite_horizon_return_exact(const TabularMdp& mdp, const Policy& pi, std::size_t H) {
    if (H == 0) return 0.0;
    return forward_horizon(mdp, pi, H).expected_return;
}

// Random-access view of all deterministic policies in lexicographic order
// (state 0 is the most significant digit). Terminal states always take action 0.
class DeterministicPolicySpace {
public:
    DeterministicPolicySpace(const TabularMdp& mdp, std::uint64_t cap = 10'000'000)
        : num_states_(mdp.num_states()), num_actions_(mdp.num_actions()), choices_(mdp.num_states()) {
        long double count = 1.0L;
        for (StateId s = 0; s < num_states_; ++s) {
            if (mdp.is_terminal(s)) {
                choices_[s] = {0};
            } else {
                choices_[s] = mdp.available_actions(s);
                count *= static_cast<long double>(choices_[s].size());
            }
        }
        if (count > static_cast<long double>(cap))
            throw CapacityError("deterministic policy space has " + std::to_string(static_cast<double>(count)) +
                                    " policies, above the cap of " + std::to_string(cap),
                                static_cast<std::uint64_t>(std::min<long double>(count, 1.8e19L)));
        size_ = static_cast<std::uint64_t>(count);
    }

    std::uint64_t size() const { return size_; }

    std::vector<ActionId> actions_at(std::uint64_t index) const {
        if (index >= size_) throw UsageError("policy index out of range");
        std::vector<ActionId> act(num_states_, 0);
        for (std::size_t s = num_states_; s-- > 0;) {
            const std::uint64_t base = choices_[s].size();
            act[s] = choices_[s][index % base];
            index /= base;
        }
        return act;
    }

    Policy at(std::uint64_t index) const { return Policy::deterministic(actions_at(index), num_actions_); }

    class iterator {
    public:
        using value_type = Policy;
        using difference_type = std::ptrdiff_t;
        iterator(const DeterministicPolicySpace* sp, std::uint64_t i) : sp_(sp), i_(i) {}
        Policy operator*() const { return sp_->at(i_); }
        iterator& operator++() {
            ++i_;
            return *this;
        }
        bool operator==(const iterator& o) const { return i_ == o.i_; }
        bool operator!=(const iterator& o) const { return i_ != o.i_; }

    private:
        const DeterministicPolicySpace* sp_;
        std::uint64_t i_;
    };

    iterator begin() const { return {this, 0}; }
    iterator end() const { return {this, size_}; }

private:
    std::size_t num_states_, num_actions_;
    std::vector<std::vector<ActionId>> choices_;
    std::uint64_t size_ = 0;
};

inline DeterministicPolicySpace enumerate_deterministic_policies(const TabularMdp& mdp,
                                                                 std::uint64_t cap = 10'000'000) {
    return DeterministicPolicySpace(mdp, cap);
}

// Expected start-state value E_rho[V^pi].
inline double start_value(const TabularMdp& mdp, const std::vector<double>& v) {
    double j = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s) j += mdp.rho()[s] * v[s];
    return j;
}

}  // namespace pbrs
