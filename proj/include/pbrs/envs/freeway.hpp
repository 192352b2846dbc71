#pragma once

#include <cstdint>
#include <optional>

#include "pbrs/abstraction.hpp"
#include "pbrs/reachability.hpp"
#include "pbrs/ram.hpp"

namespace pbrs {

// Chicken position corridor. Positions run from the start row 6 up to 180;
// stepping up from 180 crosses the road. The crossed state is followed by a
// done transition into a fictitious terminal that pays reward 1.
class FreewayModel {
public:
    static constexpr int kMinY = 6;
    static constexpr int kMaxY = 180;
    static constexpr std::uint64_t kCrossed = 1000;
    static constexpr std::uint64_t kTerminal = 1001;
    static constexpr std::size_t kNumActions = 3;  // 0 noop, 1 up, 2 down
    static constexpr std::size_t kRamY = 14;
    static constexpr std::size_t kRamScore = 103;

    std::uint64_t start_key() const { return kMinY; }
    bool is_terminal(std::uint64_t k) const { return k == kTerminal; }

    template <class Emit>
    void expand(std::uint64_t k, Emit&& emit) const {
        if (k == kCrossed) {
            for (std::size_t a = 0; a < kNumActions; ++a) emit(a, kTerminal, 1.0, 1.0);
            return;
        }
        const int y = static_cast<int>(k);
        emit(0, k, 1.0, 0.0);
        emit(1, y == kMaxY ? kCrossed : static_cast<std::uint64_t>(y + 1), 1.0, 0.0);
        emit(2, static_cast<std::uint64_t>(y == kMinY ? y : y - 1), 1.0, 0.0);
    }

    template <class F>
    void for_each_successor(std::uint64_t k, F&& f) const {
        if (is_terminal(k)) return;
        expand(k, [&](std::size_t, std::uint64_t n, double, double) { f(n); });
    }
};

struct FreewayAbstraction {
    IndexedModel model;
    AggregationFn alpha;  // alpha_s: (s_14, 0)

    const TabularMdp& mdp() const { return model.mdp; }
    StateId crossed() const { return model.index_of(FreewayModel::kCrossed); }
    StateId position(int y) const {
        if (y < FreewayModel::kMinY || y > FreewayModel::kMaxY) return kNoState;
        return model.index_of(static_cast<std::uint64_t>(y));
    }

    // alpha_{s'}: (s'_14, s'_103 - s_103). A score increment of one means the
    // road was crossed; other increments are not part of the abstraction.
    std::optional<StateId> alpha_next(const RamVector& ram, const RamVector& ram_next) const {
        const int delta = ram_next[FreewayModel::kRamScore] - ram[FreewayModel::kRamScore];
        if (delta == 1) return crossed();
        if (delta != 0) return std::nullopt;
        const StateId s = position(ram_next[FreewayModel::kRamY]);
        if (s == kNoState) return std::nullopt;
        return s;
    }
};

inline FreewayAbstraction build_freeway_abstraction(double gamma = 0.98) {
    FreewayModel m;
    auto keys = explore(m, m.start_key()).keys;
    auto model = build_indexed_model(
        std::move(keys), m.start_key(), FreewayModel::kNumActions, gamma,
        [&](std::uint64_t k, auto&& emit) { m.expand(k, emit); },
        [&](std::uint64_t k) { return m.is_terminal(k); }, [&](std::uint64_t k) { return m.is_terminal(k); },
        true);
    FreewayAbstraction fa{std::move(model), {}};
    // The rule captures a copy of the sorted keys so the abstraction stays movable.
    auto keys_copy = fa.model.keys;
    fa.alpha = AggregationFn::by_ram_indices(
        {FreewayModel::kRamY},
        [keys_copy](const RamVector& ram) -> std::optional<StateId> {
            const int y = ram[FreewayModel::kRamY];
            if (y < FreewayModel::kMinY || y > FreewayModel::kMaxY) return std::nullopt;
            auto it = std::lower_bound(keys_copy.begin(), keys_copy.end(), static_cast<std::uint64_t>(y));
            return static_cast<StateId>(it - keys_copy.begin());
        },
        fa.model.mdp.num_states());
    return fa;
}

}  // namespace pbrs
