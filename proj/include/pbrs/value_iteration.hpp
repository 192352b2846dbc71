#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "pbrs/common.hpp"
#include "pbrs/evaluation.hpp"
#include "pbrs/mdp.hpp"
#include "pbrs/shaping.hpp"

namespace pbrs {

struct ViResult {
    std::vector<double> values;
    std::size_t iterations = 0;
    double final_residual = 0.0;
    std::vector<double> residuals;  // sup-norm update of every sweep
};

// Stop threshold on the sweep residual that makes the returned values
// eps-close to V* in sup norm.
inline double vi_stop_threshold(double gamma, double eps) {
    if (gamma <= 0.0) return std::numeric_limits<double>::infinity();
    return eps * (1.0 - gamma) / gamma;
}

// Synchronous Bellman-optimality sweeps from v0. Unavailable actions are
// skipped and terminal states stay at 0.
inline ViResult value_iteration(const TabularMdp& mdp, double eps, std::vector<double> v0,
                                std::size_t max_iterations = 100'000'000) {
    if (!(eps > 0.0)) throw UsageError("value_iteration requires eps > 0");
    if (!(mdp.gamma() < 1.0)) throw UsageError("value_iteration requires gamma < 1");
    const std::size_t S = mdp.num_states(), A = mdp.num_actions();
    if (v0.empty()) v0.assign(S, 0.0);
    if (v0.size() != S) throw UsageError("initial value table has wrong size");
    const double g = mdp.gamma();
    const double threshold = vi_stop_threshold(g, eps);
    for (StateId s = 0; s < S; ++s)
        if (mdp.is_terminal(s)) v0[s] = 0.0;

    ViResult res;
    std::vector<double> v = std::move(v0), next(S, 0.0);
    while (res.iterations < max_iterations) {
        double resid = 0.0;
        for (StateId s = 0; s < S; ++s) {
            if (mdp.is_terminal(s)) {
                next[s] = 0.0;
                continue;
            }
            double best = -std::numeric_limits<double>::infinity();
            for (ActionId a = 0; a < A; ++a) {
                auto span = mdp.outcomes(s, a);
                if (span.empty()) continue;
                double q = 0.0;
                for (const auto& t : span) q += t.prob * (t.reward + g * v[t.next]);
                best = std::max(best, q);
            }
            next[s] = best;
            resid = std::max(resid, std::abs(best - v[s]));
        }
        v.swap(next);
        ++res.iterations;
        res.residuals.push_back(resid);
        res.final_residual = resid;
        if (resid < threshold) break;
    }
    res.values = std::move(v);
    return res;
}

// Smallest n with gamma^n * dist <= eps, i.e. ceil(log_gamma(eps / dist)).
inline std::size_t min_iterations_to_eps(double gamma, double eps, double dist) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("min_iterations_to_eps requires 0 < gamma < 1");
    if (!(eps > 0.0)) throw UsageError("min_iterations_to_eps requires eps > 0");
    if (dist < 0.0 || std::isnan(dist)) throw UsageError("min_iterations_to_eps requires dist >= 0");
    if (dist <= eps) return 0;
    const double x = std::log(eps / dist) / std::log(gamma);
    auto n = static_cast<long long>(std::ceil(x));
    if (n < 0) n = 0;
    // Correct the floating-point estimate against the defining inequality.
    while (n > 0 && std::pow(gamma, static_cast<double>(n - 1)) * dist <= eps) --n;
    while (std::pow(gamma, static_cast<double>(n)) * dist > eps) ++n;
    return static_cast<std::size_t>(n);
}

struct Prop1Result {
    std::size_t n_src = 0;
    std::size_t n_dst = 0;
    std::size_t bound_src = 0;
    std::size_t bound_dst = 0;
    double dist_src = 0.0;  // ||V*_M - V0||
    double dist_dst = 0.0;  // ||V*_M - phi - V0||
    bool hypothesis_holds = false;
};

// Runs VI on M and on the reshaped M' from the same V0 and compares measured
// sweep counts with the analytic ones. Distances are taken over non-terminal
// states, the only ones VI updates.
inline Prop1Result prop1_experiment(const TabularMdp& mdp, const Potential& phi, const std::vector<double>& v0,
                                    double eps) {
    const std::size_t S = mdp.num_states();
    if (v0.size() != S || phi.size() != S) throw UsageError("prop1_experiment: size mismatch");
    const auto vstar = solve_optimal(mdp).values;
    Prop1Result r;
    for (StateId s = 0; s < S; ++s) {
        if (mdp.is_terminal(s)) continue;
        r.dist_src = std::max(r.dist_src, std::abs(vstar[s] - v0[s]));
        r.dist_dst = std::max(r.dist_dst, std::abs(vstar[s] - phi[s] - v0[s]));
    }
    r.hypothesis_holds = r.dist_dst <= r.dist_src;
    const double g = mdp.gamma();
    r.bound_src = min_iterations_to_eps(g, eps, r.dist_src);
    r.bound_dst = min_iterations_to_eps(g, eps, r.dist_dst);
    r.n_src = value_iteration(mdp, eps, v0).iterations;
    r.n_dst = value_iteration(reshape_mdp(mdp, phi).mdp, eps, v0).iterations;
    return r;
}

}  // namespace pbrs
