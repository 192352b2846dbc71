#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pbrs/common.hpp"

namespace pbrs {

struct Transition {
    StateId next;
    double prob;
    double reward;
};

// Finite MDP with sparse (state, action) -> successor lists stored in CSR form.
// An action with an empty successor list is unavailable in that state.
// Terminal states carry no transitions at all: they absorb with zero reward.
class TabularMdp {
public:
    TabularMdp() = default;

    TabularMdp(std::size_t num_states, std::size_t num_actions, double gamma,
               std::vector<std::size_t> offsets, std::vector<Transition> transitions,
               std::vector<double> rho, std::vector<StateId> terminal_states,
               std::optional<std::vector<StateId>> goal_states, double reward_bound,
               bool goal_oriented)
        : num_states_(num_states),
          num_actions_(num_actions),
          gamma_(gamma),
          offsets_(std::move(offsets)),
          transitions_(std::move(transitions)),
          rho_(std::move(rho)),
          terminal_(num_states, 0),
          goal_flag_(num_states, 0),
          reward_bound_(reward_bound),
          goal_oriented_(goal_oriented) {
        if (num_states_ == 0 || num_actions_ == 0)
            throw ConstructionError("MDP needs at least one state and one action");
        if (offsets_.size() != num_states_ * num_actions_ + 1)
            throw ConstructionError("offset table has wrong length");
        if (offsets_.front() != 0 || offsets_.back() != transitions_.size())
            throw ConstructionError("offset table inconsistent with transition list");
        for (std::size_t i = 1; i < offsets_.size(); ++i)
            if (offsets_[i] < offsets_[i - 1])
                throw ConstructionError("offset table is not monotone");
        for (const auto& t : transitions_)
            if (t.next >= num_states_) throw ConstructionError("successor out of range");
        if (rho_.size() != num_states_) throw ConstructionError("rho has wrong length");
        for (StateId s : terminal_states) {
            if (s >= num_states_) throw ConstructionError("terminal state out of range");
            terminal_[s] = 1;
        }
        if (goal_states) {
            goals_ = std::move(*goal_states);
            for (StateId g : *goals_) {
                if (g >= num_states_) throw ConstructionError("goal state out of range");
                goal_flag_[g] = 1;
            }
        }
    }

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    double gamma() const { return gamma_; }
    const std::vector<double>& rho() const { return rho_; }
    // NaN means no bound is declared (shaped MDPs may carry negative rewards).
    double reward_bound() const { return reward_bound_; }
    bool has_reward_bound() const { return !std::isnan(reward_bound_); }
    bool goal_oriented() const { return goal_oriented_; }
    bool has_goals() const { return goals_.has_value(); }
    const std::vector<StateId>& goal_states() const {
        static const std::vector<StateId> empty;
        return goals_ ? *goals_ : empty;
    }
    bool is_goal(StateId s) const { return goal_flag_[s] != 0; }
    bool is_terminal(StateId s) const { return terminal_[s] != 0; }
    std::vector<StateId> terminal_states() const {
        std::vector<StateId> out;
        for (std::size_t s = 0; s < num_states_; ++s)
            if (terminal_[s]) out.push_back(static_cast<StateId>(s));
        return out;
    }

    struct Span {
        const Transition* first;
        const Transition* last;
        const Transition* begin() const { return first; }
        const Transition* end() const { return last; }
        std::size_t size() const { return static_cast<std::size_t>(last - first); }
        bool empty() const { return first == last; }
        const Transition& operator[](std::size_t i) const { return first[i]; }
    };

    Span outcomes(StateId s, ActionId a) const {
        const std::size_t k = static_cast<std::size_t>(s) * num_actions_ + a;
        return {transitions_.data() + offsets_[k], transitions_.data() + offsets_[k + 1]};
    }

    bool available(StateId s, ActionId a) const {
        if (s >= num_states_ || a >= num_actions_) return false;
        const std::size_t k = static_cast<std::size_t>(s) * num_actions_ + a;
        return offsets_[k + 1] > offsets_[k];
    }

    std::vector<ActionId> available_actions(StateId s) const {
        std::vector<ActionId> out;
        for (ActionId a = 0; a < num_actions_; ++a)
            if (available(s, a)) out.push_back(a);
        return out;
    }

    // Expected immediate reward of (s, a).
    double expected_reward(StateId s, ActionId a) const {
        double r = 0.0;
        for (const auto& t : outcomes(s, a)) r += t.prob * t.reward;
        return r;
    }

    const std::vector<std::size_t>& offsets() const { return offsets_; }
    const std::vector<Transition>& transitions() const { return transitions_; }

    // Same dynamics, rewards rewritten by f(s, a, transition).
    template <class F>
    TabularMdp with_rewards(F&& f, double reward_bound, bool goal_oriented) const {
        TabularMdp out = *this;
        for (std::size_t s = 0; s < num_states_; ++s)
            for (std::size_t a = 0; a < num_actions_; ++a) {
                const std::size_t k = s * num_actions_ + a;
                for (std::size_t i = offsets_[k]; i < offsets_[k + 1]; ++i)
                    out.transitions_[i].reward = f(static_cast<StateId>(s),
                                                   static_cast<ActionId>(a), transitions_[i]);
            }
        out.reward_bound_ = reward_bound;
        out.goal_oriented_ = goal_oriented;
        return out;
    }

private:
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    double gamma_ = 0.0;
    std::vector<std::size_t> offsets_;
    std::vector<Transition> transitions_;
    std::vector<double> rho_;
    std::vector<char> terminal_;
    std::vector<char> goal_flag_;
    std::optional<std::vector<StateId>> goals_;
    double reward_bound_ = 0.0;
    bool goal_oriented_ = false;
};

// Convenience builder for small and medium MDPs. Large generated models build
// the CSR arrays directly.
class MdpBuilder {
public:
    MdpBuilder(std::size_t num_states, std::size_t num_actions, double gamma)
        : num_states_(num_states), num_actions_(num_actions), gamma_(gamma),
          rows_(num_states * num_actions), rho_(num_states, 0.0) {}

    MdpBuilder& add(StateId s, ActionId a, StateId next, double p, double r) {
        if (s >= num_states_ || a >= num_actions_ || next >= num_states_)
            throw UsageError("MdpBuilder::add index out of range");
        auto& row = rows_[static_cast<std::size_t>(s) * num_actions_ + a];
        for (auto& t : row)
            if (t.next == next) {
                if (t.reward != r)
                    throw ConstructionError("conflicting rewards for one (s,a,s') triple");
                t.prob += p;
                return *this;
            }
        row.push_back({next, p, r});
        return *this;
    }

    MdpBuilder& rho(std::vector<double> rho) {
        rho_ = std::move(rho);
        return *this;
    }
    MdpBuilder& start(StateId s) {
        std::fill(rho_.begin(), rho_.end(), 0.0);
        rho_.at(s) = 1.0;
        return *this;
    }
    MdpBuilder& terminal(StateId s) {
        terminals_.push_back(s);
        return *this;
    }
    MdpBuilder& goals(std::vector<StateId> g) {
        goals_ = std::move(g);
        return *this;
    }
    MdpBuilder& goal_oriented(bool flag = true) {
        goal_oriented_ = flag;
        return *this;
    }
    MdpBuilder& reward_bound(double r) {
        reward_bound_ = r;
        return *this;
    }

    TabularMdp build() const {
        std::vector<std::size_t> offsets(rows_.size() + 1, 0);
        std::vector<Transition> flat;
        double max_r = 0.0;
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            for (const auto& t : rows_[k]) {
                flat.push_back(t);
                max_r = std::max(max_r, t.reward);
            }
            offsets[k + 1] = flat.size();
        }
        std::vector<StateId> terms = terminals_;
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        return TabularMdp(num_states_, num_actions_, gamma_, std::move(offsets), std::move(flat),
                          rho_, terms, goals_, reward_bound_.value_or(max_r), goal_oriented_);
    }

private:
    std::size_t num_states_, num_actions_;
    double gamma_;
    std::vector<std::vector<Transition>> rows_;
    std::vector<double> rho_;
    std::vector<StateId> terminals_;
    std::optional<std::vector<StateId>> goals_;
    std::optional<double> reward_bound_;
    bool goal_oriented_ = false;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_mdp(const TabularMdp& mdp) {
    ValidationReport rep;
    auto add = [&](std::string msg) {
        if (rep.violations.size() < 64) rep.violations.push_back(std::move(msg));
    };
    const double g = mdp.gamma();
    if (!(g >= 0.0 && g < 1.0)) add("gamma must lie in [0,1)");
    const double rbar = mdp.reward_bound();
    const bool check_bound = mdp.has_reward_bound();
    if (check_bound && !(std::isfinite(rbar) && rbar >= 0.0)) add("reward bound must be finite and >= 0");

    double rho_sum = 0.0;
    for (double p : mdp.rho()) {
        if (!(p >= 0.0)) add("rho has a negative or NaN entry");
        rho_sum += p;
    }
    if (std::abs(rho_sum - 1.0) > 1e-12) add("rho does not sum to 1");

    for (StateId s = 0; s < mdp.num_states(); ++s) {
        bool any = false;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            auto span = mdp.outcomes(s, a);
            if (span.empty()) continue;
            any = true;
            if (mdp.is_terminal(s)) {
                std::ostringstream os;
                os << "terminal state " << s << " has outgoing transitions";
                add(os.str());
            }
            double mass = 0.0;
            for (const auto& t : span) {
                if (!(t.prob > 0.0)) add("non-positive transition probability stored");
                mass += t.prob;
                if (!std::isfinite(t.reward)) add("non-finite reward");
                if (check_bound && !(t.reward >= 0.0 && t.reward <= rbar)) {
                    std::ostringstream os;
                    os << "reward " << t.reward << " outside [0, " << rbar << "]";
                    add(os.str());
                }
                if (mdp.goal_oriented()) {
                    const bool should = !mdp.is_goal(s) && mdp.is_goal(t.next);
                    if (t.reward != (should ? 1.0 : 0.0))
                        add("goal-oriented reward must be 1 exactly on goal entry");
                }
            }
            if (std::abs(mass - 1.0) > 1e-12) {
                std::ostringstream os;
                os << "probability mass != 1 at (" << s << "," << a << "): " << mass;
                add(os.str());
            }
        }
        if (!any && !mdp.is_terminal(s)) {
            std::ostringstream os;
            os << "non-terminal state " << s << " has no available action";
            add(os.str());
        }
    }
    for (StateId gs : mdp.goal_states())
        if (!mdp.is_terminal(gs)) add("goal state is not terminal");
    if (mdp.goal_oriented() && !mdp.has_goals()) add("goal-oriented MDP without goal set");
    return rep;
}

enum class PolicyKind { Deterministic, Softmax };

// Tabular policy. Both kinds keep a dense |S| x |A| probability table so that
// evaluators can treat them uniformly.
class Policy {
public:
    static Policy deterministic(std::vector<ActionId> actions, std::size_t num_actions) {
        Policy p;
        p.kind_ = PolicyKind::Deterministic;
        p.num_states_ = actions.size();
        p.num_actions_ = num_actions;
        p.probs_.assign(p.num_states_ * num_actions, 0.0);
        for (std::size_t s = 0; s < actions.size(); ++s) {
            if (actions[s] >= num_actions) throw UsageError("deterministic policy action out of range");
            p.probs_[s * num_actions + actions[s]] = 1.0;
        }
        p.actions_ = std::move(actions);
        return p;
    }

    static Policy softmax(std::size_t num_states, std::size_t num_actions, std::vector<double> theta) {
        if (theta.size() != num_states * num_actions) throw UsageError("softmax logits have wrong size");
        Policy p;
        p.kind_ = PolicyKind::Softmax;
        p.num_states_ = num_states;
        p.num_actions_ = num_actions;
        p.probs_.assign(theta.size(), 0.0);
        for (std::size_t s = 0; s < num_states; ++s) {
            const double* th = theta.data() + s * num_actions;
            double m = *std::max_element(th, th + num_actions);
            double z = 0.0;
            for (std::size_t a = 0; a < num_actions; ++a) z += std::exp(th[a] - m);
            for (std::size_t a = 0; a < num_actions; ++a)
                p.probs_[s * num_actions + a] = std::exp(th[a] - m) / z;
        }
        p.theta_ = std::move(theta);
        return p;
    }

    PolicyKind kind() const { return kind_; }
    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    double prob(StateId s, ActionId a) const { return probs_[static_cast<std::size_t>(s) * num_actions_ + a]; }
    const double* row(StateId s) const { return probs_.data() + static_cast<std::size_t>(s) * num_actions_; }
    const std::vector<ActionId>& actions() const { return actions_; }
    const std::vector<double>& theta() const { return theta_; }
    ActionId action(StateId s) const { return actions_.at(s); }

    ActionId sample(StateId s, Rng& rng) const {
        if (kind_ == PolicyKind::Deterministic) return actions_[s];
        double u = rng.uniform();
        const double* r = row(s);
        for (std::size_t a = 0; a < num_actions_; ++a) {
            if (u < r[a]) return static_cast<ActionId>(a);
            u -= r[a];
        }
        for (std::size_t a = num_actions_; a-- > 0;)
            if (r[a] > 0.0) return static_cast<ActionId>(a);
        return 0;
    }

private:
    PolicyKind kind_ = PolicyKind::Deterministic;
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    std::vector<double> probs_;
    std::vector<ActionId> actions_;
    std::vector<double> theta_;
};

// Throws unless the policy only puts mass on available actions of non-terminal states.
inline void check_policy(const TabularMdp& mdp, const Policy& pi) {
    if (pi.num_states() != mdp.num_states() || pi.num_actions() != mdp.num_actions())
        throw UsageError("policy shape does not match MDP");
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (mdp.is_terminal(s)) continue;
        for (ActionId a = 0; a < mdp.num_actions(); ++a)
            if (pi.prob(s, a) > 0.0 && !mdp.available(s, a))
                throw UsageError("policy puts mass on an unavailable action");
    }
}

struct Trajectory {
    std::vector<StateId> states;
    std::vector<ActionId> actions;
    std::vector<double> rewards;

    std::size_t horizon() const { return actions.size(); }
    bool consistent() const {
        return states.size() == actions.size() + 1 && rewards.size() == actions.size();
    }
};

inline std::pair<StateId, double> sample_transition(const TabularMdp& mdp, StateId s, ActionId a, Rng& rng) {
    if (s >= mdp.num_states() || mdp.is_terminal(s)) throw UsageError("sample_transition from terminal or invalid state");
    if (!mdp.available(s, a)) throw UsageError("sample_transition with unavailable action");
    auto span = mdp.outcomes(s, a);
    double u = rng.uniform();
    for (const auto& t : span) {
        if (u < t.prob) return {t.next, t.reward};
        u -= t.prob;
    }
    const auto& last = *(span.end() - 1);
    return {last.next, last.reward};
}

inline StateId sample_start(const TabularMdp& mdp, Rng& rng) {
    return static_cast<StateId>(rng.categorical(mdp.rho()));
}

// Rolls out pi for at most H steps, stopping early on terminal states.
inline Trajectory simulate_episode(const TabularMdp& mdp, const Policy& pi, std::size_t H, Rng& rng) {
    Trajectory tr;
    StateId s = sample_start(mdp, rng);
    tr.states.push_back(s);
    for (std::size_t t = 0; t < H && !mdp.is_terminal(s); ++t) {
        const ActionId a = pi.sample(s, rng);
        auto [next, r] = sample_transition(mdp, s, a, rng);
        tr.actions.push_back(a);
        tr.rewards.push_back(r);
        tr.states.push_back(next);
        s = next;
    }
    return tr;
}

inline double discounted_return(const Trajectory& traj, double gamma) {
    double total = 0.0;
    double disc = 1.0;
    for (double r : traj.rewards) {
        total += disc * r;
        disc *= gamma;
    }
    return total;
}

}  // namespace pbrs
