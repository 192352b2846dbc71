#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "pbrs/evaluation.hpp"
#include "pbrs/mdp.hpp"
#include "pbrs/shaping.hpp"

namespace pbrs {

inline constexpr double kOrderTol = 1e-10;

// E[R(tau)] + E[gamma^h phi(s_h)], h = goal-hit time if within H, else H.
// The policy-independent -E_rho[phi(s_0)] term is not included.
inline double expected_reshaped_return_H(const TabularMdp& mdp, const Policy& pi, const Potential& phi, std::size_t H) {
    if (phi.size() != mdp.num_states()) throw UsageError("potential domain does not match the MDP");
    const auto st = forward_horizon(mdp, pi, H, &phi.values());
    return st.expected_return + st.hit_potential + std::pow(mdp.gamma(), static_cast<double>(H)) * st.survivor_potential;
}

inline bool pi_H_membership(const TabularMdp& mdp, const Policy& pi, std::size_t H) {
    if (H == 0) return false;
    return finite_horizon_return_exact(mdp, pi, H) > 1e-12;
}

enum class OrderingScope { All, PiH, GoalReaching };

// Per-policy quantities shared by the ordering verifiers.
struct PolicyRecord {
    std::uint64_t index;
    double J;            // H-step expected return
    double J_reshaped;   // expected_reshaped_return_H
    double survivor;     // E[phi(s_H) 1{s_H not absorbed}]
    double reach_prob;   // probability of having been absorbed by step H
};

inline std::vector<PolicyRecord> policy_records(const TabularMdp& mdp, const Potential& phi, std::size_t H,
                                                std::uint64_t cap = 10'000'000) {
    if (phi.size() != mdp.num_states()) throw UsageError("potential domain does not match the MDP");
    const DeterministicPolicySpace space(mdp, cap);
    std::vector<PolicyRecord> recs;
    recs.reserve(space.size());
    const double gH = std::pow(mdp.gamma(), static_cast<double>(H));
    for (std::uint64_t i = 0; i < space.size(); ++i) {
        const auto st = forward_horizon(mdp, space.at(i), H, &phi.values());
        recs.push_back({i, st.expected_return, st.expected_return + st.hit_potential + gH * st.survivor_potential,
                        st.survivor_potential, st.absorbed_mass});
    }
    return recs;
}

struct Inversion {
    std::uint64_t policy_a, policy_b;
    double J_a, J_b, J_reshaped_a, J_reshaped_b;
};

struct OrderingReport {
    std::uint64_t policy_count = 0;
    std::uint64_t pairs_checked = 0;
    std::uint64_t inversion_count = 0;
    std::vector<Inversion> inversions;  // first max_listed, in (A, B) index order
    bool preserved = true;
};

inline bool in_scope(const PolicyRecord& r, OrderingScope scope) {
    switch (scope) {
        case OrderingScope::All: return true;
        case OrderingScope::PiH: return r.J > 1e-12;
        case OrderingScope::GoalReaching: return r.reach_prob >= 1.0 - 1e-12;
    }
    return false;
}

// Checks every pair (A, B) with A in the scope set, B any deterministic
// policy and J_A > J_B; an inversion is a strict reversal of the reshaped values.
inline OrderingReport verify_ordering(const TabularMdp& mdp, const Potential& phi, std::size_t H, OrderingScope scope,
                                      std::uint64_t cap = 10'000'000, std::size_t max_listed = 1000) {
    const auto recs = policy_records(mdp, phi, H, cap);
    OrderingReport rep;
    rep.policy_count = recs.size();
    for (const auto& a : recs) {
        if (!in_scope(a, scope)) continue;
        for (const auto& b : recs) {
            if (!(a.J - b.J > kOrderTol)) continue;
            ++rep.pairs_checked;
            if (b.J_reshaped - a.J_reshaped > kOrderTol) {
                ++rep.inversion_count;
                if (rep.inversions.size() < max_listed)
                    rep.inversions.push_back({a.index, b.index, a.J, b.J, a.J_reshaped, b.J_reshaped});
            }
        }
    }
    rep.preserved = rep.inversion_count == 0;
    return rep;
}

struct CResult {
    bool has_pairs = false;
    double C = 0.0;
    double gap_epsilon = 0.0;  // smallest J_A - J_B over the pair set
    std::uint64_t pairs = 0;
};

// sup over (A in Pi_H, B) with J_A > J_B of
//   gamma^{H-1} (E_B[phi(s_H) 1_E] - E_A[phi(s_H) 1_E]) / (J_A - J_B).
inline CResult compute_C(const TabularMdp& mdp, const Potential& phi, std::size_t H, std::uint64_t cap = 10'000'000) {
    if (H == 0) throw UsageError("compute_C requires H >= 1");
    const auto recs = policy_records(mdp, phi, H, cap);
    const double scale = std::pow(mdp.gamma(), static_cast<double>(H) - 1.0);
    CResult res;
    for (const auto& a : recs) {
        if (!(a.J > 1e-12)) continue;
        for (const auto& b : recs) {
            const double gap = a.J - b.J;
            if (!(gap > kOrderTol)) continue;
            const double c = scale * (b.survivor - a.survivor) / gap;
            if (!res.has_pairs || c > res.C) res.C = c;
            if (!res.has_pairs || gap < res.gap_epsilon) res.gap_epsilon = gap;
            res.has_pairs = true;
            ++res.pairs;
        }
    }
    return res;
}

enum class HorizonMode { TotalOrder, OptimalOnly };

struct HorizonBound {
    enum class Status { Ok, Degenerate, Unbounded } status = Status::Degenerate;
    double h_min = 0.0;
    double gap = 0.0;
};

// log_gamma(gap / (Phi + Rbar / (1 - gamma))) where the gap is the smallest
// positive difference of infinite-horizon values (total order) or J* - J**.
inline HorizonBound horizon_bound(const TabularMdp& mdp, double Phi, HorizonMode mode,
                                  std::uint64_t cap = 10'000'000) {
    const double g = mdp.gamma();
    if (!(g > 0.0 && g < 1.0)) throw UsageError("horizon_bound requires 0 < gamma < 1");
    const DeterministicPolicySpace space(mdp, cap);
    std::vector<double> J;
    J.reserve(space.size());
    for (std::uint64_t i = 0; i < space.size(); ++i)
        J.push_back(start_value(mdp, policy_evaluation_exact(mdp, space.at(i))));
    std::sort(J.begin(), J.end());
    std::optional<double> gap;
    if (mode == HorizonMode::TotalOrder) {
        for (std::size_t i = 1; i < J.size(); ++i) {
            const double d = J[i] - J[i - 1];
            if (d > kOrderTol && (!gap || d < *gap)) gap = d;
        }
    } else {
        const double best = J.back();
        for (std::size_t i = J.size(); i-- > 0;)
            if (best - J[i] > kOrderTol) {
                gap = best - J[i];
                break;
            }
    }
    HorizonBound hb;
    const double rbar = mdp.has_reward_bound() ? mdp.reward_bound() : 0.0;
    const double denom = Phi + rbar / (1.0 - g);
    if (!gap || !(denom > 0.0)) {
        hb.status = HorizonBound::Status::Degenerate;
        return hb;
    }
    hb.gap = *gap;
    if (*gap <= 0.0) {
        hb.status = HorizonBound::Status::Unbounded;
        hb.h_min = std::numeric_limits<double>::infinity();
        return hb;
    }
    hb.status = HorizonBound::Status::Ok;
    hb.h_min = std::log(*gap / denom) / std::log(g);
    return hb;
}

}  // namespace pbrs
