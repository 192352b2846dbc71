#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pbrs/common.hpp"
#include "pbrs/mdp.hpp"

namespace pbrs {

// State-indexed potential table with a declared upper bound Phi. The bound is
// stored, not recomputed, so callers control it when rescaling.
class Potential {
public:
    Potential() = default;
    Potential(std::vector<double> values, double bound_phi) : values_(std::move(values)), bound_(bound_phi) {
        for (double v : values_)
            if (!std::isfinite(v)) throw UsageError("potential values must be finite");
        if (!(std::isfinite(bound_) && bound_ >= 0.0)) throw UsageError("potential bound must be finite and >= 0");
    }

    static Potential zero(std::size_t n) { return Potential(std::vector<double>(n, 0.0), 0.0); }

    // Bound taken as the largest value (at least 0).
    static Potential from_values(std::vector<double> values) {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return Potential(std::move(values), m);
    }

    std::size_t size() const { return values_.size(); }
    double bound_phi() const { return bound_; }
    const std::vector<double>& values() const { return values_; }

    double at(StateId s) const {
        if (s >= values_.size()) throw UsageError("state outside the potential's domain");
        return values_[s];
    }
    double operator[](StateId s) const { return values_[s]; }

    bool bounded(double tol = 1e-12) const {
        for (double v : values_)
            if (v < -tol || v > bound_ + tol) return false;
        return true;
    }

    Potential scaled(double k) const {
        if (!(k >= 0.0)) throw UsageError("potential scale must be non-negative");
        std::vector<double> v = values_;
        for (double& x : v) x *= k;
        return Potential(std::move(v), bound_ * k);
    }

    // Multiplicative rescale so that the largest value equals phi_max.
    Potential rescaled_to(double phi_max) const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, v);
        if (m <= 0.0) return Potential(values_, phi_max);
        std::vector<double> v = values_;
        for (double& x : v) x *= phi_max / m;
        return Potential(std::move(v), phi_max);
    }

    Potential with_value(StateId s, double value) const {
        std::vector<double> v = values_;
        v.at(s) = value;
        return Potential(std::move(v), bound_);
    }

    Potential with_bound(double phi_max) const { return Potential(values_, phi_max); }

private:
    std::vector<double> values_;
    double bound_ = 0.0;
};

inline double shaping_term(const Potential& phi, double gamma, StateId s, StateId s_next) {
    return gamma * phi.at(s_next) - phi.at(s);
}

// The reshaped MDP keeps the base dynamics; its reward bound is left undeclared.
struct ShapedMdp {
    TabularMdp mdp;
    Potential potential;
};

inline ShapedMdp reshape_mdp(const TabularMdp& mdp, const Potential& phi) {
    if (phi.size() != mdp.num_states()) throw UsageError("potential domain does not match the MDP");
    const double g = mdp.gamma();
    const auto& v = phi.values();
    auto shaped = mdp.with_rewards(
        [&](StateId s, ActionId, const Transition& t) { return t.reward + g * v[t.next] - v[s]; },
        std::numeric_limits<double>::quiet_NaN(), false);
    return {std::move(shaped), phi};
}

// Per-step PBRS rewards where the episode's final state is given potential 0.
inline std::vector<double> grzes_episode_shaping(const Trajectory& traj, const Potential& phi, double gamma) {
    if (!traj.consistent()) throw UsageError("inconsistent trajectory");
    const std::size_t H = traj.horizon();
    std::vector<double> out(H);
    for (std::size_t t = 0; t < H; ++t) {
        const double next = (t + 1 == H) ? 0.0 : phi.at(traj.states[t + 1]);
        out[t] = traj.rewards[t] + gamma * next - phi.at(traj.states[t]);
    }
    return out;
}

// Discounted sum of stationary PBRS rewards along the trajectory.
inline double reshaped_trajectory_return(const Trajectory& traj, const Potential& phi, double gamma) {
    if (!traj.consistent()) throw UsageError("inconsistent trajectory");
    double total = 0.0, disc = 1.0;
    for (std::size_t t = 0; t < traj.horizon(); ++t) {
        total += disc * (traj.rewards[t] + gamma * phi.at(traj.states[t + 1]) - phi.at(traj.states[t]));
        disc *= gamma;
    }
    return total;
}

// R(tau) + gamma^H phi(s_H) - phi(s_0).
inline double reshaped_return_closed_form(const Trajectory& traj, const Potential& phi, double gamma) {
    if (!traj.consistent()) throw UsageError("inconsistent trajectory");
    const double R = discounted_return(traj, gamma);
    return R + std::pow(gamma, static_cast<double>(traj.horizon())) * phi.at(traj.states.back()) -
           phi.at(traj.states.front());
}

}  // namespace pbrs
