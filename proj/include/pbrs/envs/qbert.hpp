#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pbrs/abstraction.hpp"
#include "pbrs/reachability.hpp"
#include "pbrs/ram.hpp"

namespace pbrs::qbert {

inline constexpr int kRows = 6;
inline constexpr int kNodes = 21;
inline constexpr std::size_t kNumActions = 5;
enum Action : ActionId { kUp = 0, kRight = 1, kLeft = 2, kDown = 3, kDeath = 4 };
inline constexpr std::uint32_t kAllColored = (1u << kNodes) - 1;
inline constexpr std::uint64_t kTerminalKey = std::uint64_t{1} << 40;

// Reward scale the Atari adapter divides raw game rewards by.
inline constexpr double kRewardNormalization = 500.0;

inline constexpr std::size_t kRamX = 43;
inline constexpr std::size_t kRamY = 67;
// RAM component holding the color of tile n + 1.
inline constexpr std::array<std::size_t, kNodes> kTileRam = {21, 52, 54, 83, 85, 87, 98,  100, 102, 104, 1,
                                                             3,  5,  7,  9,  32, 34, 36, 38,  40,  42};
// Screen coordinates of node n + 1.
inline constexpr std::array<std::pair<int, int>, kNodes> kNodeXY = {{{77, 25},  {65, 53},  {93, 53},  {53, 81},
                                                                     {77, 81},  {105, 81}, {41, 109}, {65, 109},
                                                                     {93, 109}, {117, 109}, {29, 137}, {53, 137},
                                                                     {77, 137}, {105, 137}, {129, 137}, {16, 165},
                                                                     {41, 165}, {65, 165}, {93, 165}, {117, 165},
                                                                     {141, 165}}};

// Node ids are 1-based: node(r, k) = r(r+1)/2 + k + 1 for row r, slot k <= r.
inline int node_id(int r, int k) { return r * (r + 1) / 2 + k + 1; }
inline std::pair<int, int> row_slot(int node) {
    int r = 0;
    while (node_id(r, r) < node) ++r;
    return {r, node - node_id(r, 0)};
}

// Neighbour reached by a movement action, or 0 when the move leaves the pyramid.
inline int move(int node, ActionId a) {
    auto [r, k] = row_slot(node);
    int nr = r, nk = k;
    switch (a) {
        case kUp: nr = r - 1; break;
        case kRight: nr = r + 1; nk = k + 1; break;
        case kLeft: nr = r - 1; nk = k - 1; break;
        case kDown: nr = r + 1; break;
        default: return 0;
    }
    if (nr < 0 || nr >= kRows || nk < 0 || nk > nr) return 0;
    return node_id(nr, nk);
}

inline ActionId inverse(ActionId a) {
    switch (a) {
        case kUp: return kDown;
        case kDown: return kUp;
        case kLeft: return kRight;
        case kRight: return kLeft;
        default: return a;
    }
}

inline int node_at(int x, int y) {
    for (int i = 0; i < kNodes; ++i)
        if (kNodeXY[i].first == x && kNodeXY[i].second == y) return i + 1;
    return 0;
}

struct AbstractState {
    int node = 1;
    std::uint32_t colors = 0;  // bit n-1 set when tile n shows the target color

    std::uint64_t key() const { return (static_cast<std::uint64_t>(node - 1) << kNodes) | colors; }
    static AbstractState from_key(std::uint64_t k) {
        return {static_cast<int>(k >> kNodes) + 1, static_cast<std::uint32_t>(k & kAllColored)};
    }
    bool colored(int n) const { return (colors >> (n - 1)) & 1u; }
    bool complete() const { return colors == kAllColored; }
};

// Abstract state observed from RAM, keeping the raw coordinates.
struct CoordState {
    int x = 0;
    int y = 0;
    std::uint32_t colors = 0;
};

// Hop trajectories between two nodes: the intermediate coordinates seen while
// jumping, all represented by the landing node.
struct HopSequence {
    int from;
    ActionId action;
    int to;
    std::vector<std::pair<int, int>> points;
};

inline const std::vector<HopSequence>& known_hops() {
    static const std::vector<HopSequence> hops = {
        {1, kRight, 3, {{78, 24}, {82, 20}, {86, 22}, {89, 27}, {89, 35}, {89, 43}, {89, 51}}},
    };
    return hops;
}

// Tiles climb the pyramid; each movement colors the landing tile, the death
// action returns to node 1 without coloring. Completed boards take a done
// transition (any action) into a fictitious terminal paying reward 1.
class Model {
public:
    explicit Model(bool color_start_tile = false) : color_start_(color_start_tile) {}

    std::uint64_t start_key() const {
        return AbstractState{1, color_start_ ? 1u : 0u}.key();
    }
    bool is_terminal(std::uint64_t k) const { return k == kTerminalKey; }

    template <class Emit>
    void expand(std::uint64_t k, Emit&& emit) const {
        const auto s = AbstractState::from_key(k);
        if (s.complete()) {
            for (std::size_t a = 0; a < kNumActions; ++a) emit(a, kTerminalKey, 1.0, 1.0);
            return;
        }
        for (ActionId a = kUp; a <= kDown; ++a) {
            const int n = move(s.node, a);
            if (n == 0) continue;
            emit(a, AbstractState{n, s.colors | (1u << (n - 1))}.key(), 1.0, 0.0);
        }
        emit(kDeath, AbstractState{1, s.colors}.key(), 1.0, 0.0);
    }

    template <class F>
    void for_each_successor(std::uint64_t k, F&& f) const {
        if (is_terminal(k)) return;
        expand(k, [&](std::size_t, std::uint64_t n, double, double) { f(n); });
    }

private:
    bool color_start_;
};

}  // namespace pbrs::qbert

namespace pbrs {

class QbertAbstraction {
public:
    IndexedModel model;
    int target_color = 0;  // RAM value a tile takes once colored

    const TabularMdp& mdp() const { return model.mdp; }

    StateId index_of(const qbert::AbstractState& s) const { return model.index_of(s.key()); }
    StateId start() const { return model.index_of(qbert::Model().start_key()); }

    std::uint32_t colors_from_ram(const RamVector& ram) const {
        std::uint32_t c = 0;
        for (int i = 0; i < qbert::kNodes; ++i)
            if (ram[qbert::kTileRam[i]] == target_color) c |= 1u << i;
        return c;
    }

    qbert::CoordState observe(const RamVector& ram) const {
        return {ram[qbert::kRamX], ram[qbert::kRamY], colors_from_ram(ram)};
    }

    // Abstract state of a snapshot standing on a node; nullopt on hop points.
    std::optional<qbert::AbstractState> alpha(const RamVector& ram) const {
        const auto c = observe(ram);
        const int n = qbert::node_at(c.x, c.y);
        if (n == 0) return std::nullopt;
        return qbert::AbstractState{n, c.colors};
    }

    // Pair (alpha(s), alpha(s')). A next snapshot caught mid-hop is represented
    // by the landing node of the hop that the action started, with the landing
    // tile counted as colored.
    std::pair<std::optional<qbert::AbstractState>, std::optional<qbert::AbstractState>> alpha_pair(
        const RamVector& ram, ActionId action, const RamVector& ram_next) const {
        auto cur = alpha(ram);
        auto nxt = alpha(ram_next);
        if (!nxt && cur) {
            const auto c = observe(ram_next);
            for (const auto& hop : qbert::known_hops()) {
                if (hop.from != cur->node || hop.action != action) continue;
                for (auto [x, y] : hop.points)
                    if (x == c.x && y == c.y) nxt = qbert::AbstractState{hop.to, c.colors | (1u << (hop.to - 1))};
            }
        }
        return {cur, nxt};
    }
};

inline QbertAbstraction build_qbert_abstraction(double gamma = 0.99, bool color_start_tile = false,
                                               int target_color = 0) {
    qbert::Model m(color_start_tile);
    auto keys = explore(m, m.start_key()).keys;
    QbertAbstraction qa;
    qa.model = build_indexed_model(
        std::move(keys), m.start_key(), qbert::kNumActions, gamma,
        [&](std::uint64_t k, auto&& emit) { m.expand(k, emit); },
        [&](std::uint64_t k) { return m.is_terminal(k); }, [&](std::uint64_t k) { return m.is_terminal(k); },
        true);
    qa.target_color = target_color;
    return qa;
}

// Shaping term for one Q*Bert step given the coordinate-level observations.
// phi is indexed by the abstraction's state ids.
inline double qbert_shaping_F(const qbert::CoordState& s_bar, ActionId a, const qbert::CoordState& s_bar_next,
                              const QbertAbstraction& abs, const Potential& phi, double gamma) {
    const int node = qbert::node_at(s_bar.x, s_bar.y);
    if (node == 0) return 0.0;
    if (s_bar.x == s_bar_next.x && s_bar.y == s_bar_next.y) return 0.0;
    const StateId cur = abs.index_of({node, s_bar.colors});
    const int dest = (a <= qbert::kDown) ? qbert::move(node, a) : 0;
    if (dest == 0) return cur != kNoState ? -phi.at(cur) : 0.0;
    const StateId nxt = abs.index_of({dest, s_bar.colors | (1u << (dest - 1))});
    if (cur != kNoState && nxt != kNoState) {
        const double f = gamma * phi.at(nxt) - phi.at(cur);
        return f == 0.0 ? 0.1 : f;
    }
    return 0.0;
}

}  // namespace pbrs
