#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

#include "pbrs/common.hpp"
#include "pbrs/mdp.hpp"

namespace pbrs {

enum class TraversalOrder { BreadthFirst, DepthFirst };

// Implicit models expose 64-bit state keys and a successor enumerator:
//   std::uint64_t start_key() const;
//   template <class F> void for_each_successor(std::uint64_t key, F&& emit) const;
template <class M>
concept ImplicitModel = requires(const M& m, std::uint64_t k) {
    { m.start_key() } -> std::convertible_to<std::uint64_t>;
    m.for_each_successor(k, [](std::uint64_t) {});
};

struct Reachable {
    std::vector<std::uint64_t> keys;  // in discovery order
};

// Visits every key reachable from start. Throws CapacityError carrying the
// partial count once the visited set would exceed cap.
template <ImplicitModel M>
Reachable explore(const M& model, std::uint64_t start, TraversalOrder order = TraversalOrder::BreadthFirst,
                  std::uint64_t cap = 50'000'000) {
    Reachable out;
    std::unordered_set<std::uint64_t> seen;
    std::deque<std::uint64_t> frontier;
    seen.insert(start);
    out.keys.push_back(start);
    frontier.push_back(start);
    while (!frontier.empty()) {
        std::uint64_t k;
        if (order == TraversalOrder::BreadthFirst) {
            k = frontier.front();
            frontier.pop_front();
        } else {
            k = frontier.back();
            frontier.pop_back();
        }
        model.for_each_successor(k, [&](std::uint64_t n) {
            if (seen.insert(n).second) {
                if (seen.size() > cap)
                    throw CapacityError("reachable set exceeds cap of " + std::to_string(cap) + " states",
                                        static_cast<std::uint64_t>(seen.size()));
                out.keys.push_back(n);
                frontier.push_back(n);
            }
        });
    }
    return out;
}

template <ImplicitModel M>
std::uint64_t count_reachable_states(const M& model, std::uint64_t start,
                                     TraversalOrder order = TraversalOrder::BreadthFirst,
                                     std::uint64_t cap = 50'000'000) {
    return explore(model, start, order, cap).keys.size();
}

template <ImplicitModel M>
std::uint64_t count_reachable_states(const M& model) {
    return count_reachable_states(model, model.start_key());
}

// Adapter so explicit MDPs can be traversed with the same routine.
class MdpGraph {
public:
    explicit MdpGraph(const TabularMdp& mdp, StateId start) : mdp_(&mdp), start_(start) {}
    std::uint64_t start_key() const { return start_; }
    template <class F>
    void for_each_successor(std::uint64_t key, F&& emit) const {
        const auto s = static_cast<StateId>(key);
        for (ActionId a = 0; a < mdp_->num_actions(); ++a)
            for (const auto& t : mdp_->outcomes(s, a)) emit(static_cast<std::uint64_t>(t.next));
    }

private:
    const TabularMdp* mdp_;
    StateId start_;
};

inline std::uint64_t count_reachable_states(const TabularMdp& mdp, StateId start,
                                            TraversalOrder order = TraversalOrder::BreadthFirst,
                                            std::uint64_t cap = 50'000'000) {
    if (start >= mdp.num_states()) throw UsageError("start state out of range");
    return count_reachable_states(MdpGraph(mdp, start), start, order, cap);
}

// Turns an implicit model into a TabularMdp whose states are the reachable
// keys in ascending key order. `expand(key, emit)` must call
// emit(action, next_key, prob, reward) for every outcome; `is_terminal(key)`
// marks absorbing states (expand is not called for them).
struct IndexedModel {
    TabularMdp mdp;
    std::vector<std::uint64_t> keys;  // sorted; index = state id

    StateId index_of(std::uint64_t key) const {
        auto it = std::lower_bound(keys.begin(), keys.end(), key);
        if (it == keys.end() || *it != key) return kNoState;
        return static_cast<StateId>(it - keys.begin());
    }
};

template <class Expand, class IsTerminal, class IsGoal>
IndexedModel build_indexed_model(std::vector<std::uint64_t> keys, std::uint64_t start_key, std::size_t num_actions,
                                 double gamma, Expand&& expand, IsTerminal&& is_terminal, IsGoal&& is_goal,
                                 bool goal_oriented) {
    std::sort(keys.begin(), keys.end());
    IndexedModel out;
    const std::size_t S = keys.size();
    auto idx = [&](std::uint64_t k) {
        auto it = std::lower_bound(keys.begin(), keys.end(), k);
        if (it == keys.end() || *it != k) throw ConstructionError("successor key not in the reachable set");
        return static_cast<StateId>(it - keys.begin());
    };
    std::vector<std::size_t> offsets(S * num_actions + 1, 0);
    std::vector<Transition> flat;
    flat.reserve(S * num_actions);
    std::vector<StateId> terminals, goals;
    std::vector<std::vector<Transition>> row(num_actions);
    double max_r = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        const std::uint64_t k = keys[s];
        if (is_goal(k)) goals.push_back(static_cast<StateId>(s));
        if (is_terminal(k)) {
            terminals.push_back(static_cast<StateId>(s));
            for (std::size_t a = 0; a < num_actions; ++a) offsets[s * num_actions + a + 1] = flat.size();
            continue;
        }
        for (auto& r : row) r.clear();
        expand(k, [&](std::size_t a, std::uint64_t next, double p, double r) {
            const StateId n = idx(next);
            for (auto& t : row[a])
                if (t.next == n) {
                    t.prob += p;
                    return;
                }
            row[a].push_back({n, p, r});
        });
        for (std::size_t a = 0; a < num_actions; ++a) {
            for (const auto& t : row[a]) {
                flat.push_back(t);
                max_r = std::max(max_r, t.reward);
            }
            offsets[s * num_actions + a + 1] = flat.size();
        }
    }
    std::vector<double> rho(S, 0.0);
    rho[idx(start_key)] = 1.0;
    std::optional<std::vector<StateId>> goal_set;
    if (goal_oriented) goal_set = goals;
    out.mdp = TabularMdp(S, num_actions, gamma, std::move(offsets), std::move(flat), std::move(rho), terminals,
                         goal_set, max_r, goal_oriented);
    out.keys = std::move(keys);
    return out;
}

}  // namespace pbrs
