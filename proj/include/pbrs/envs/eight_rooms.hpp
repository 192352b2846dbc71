#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pbrs/abstraction.hpp"
#include "pbrs/common.hpp"
#include "pbrs/mdp.hpp"

namespace pbrs {

// Layout of the eight-rooms world, one character per cell, top row first.
//   '#' wall, 'S' start cell (inside the red room), 'G' goal cell,
//   lower-case letters: room colors (r red, v violet, y yellow, b blue,
//   p pink, n brown, o orange). A colored cell inside a wall line is a door.
// The same text ships as data/eight_rooms.txt.
inline constexpr const char* kEightRoomsGrid =
    "#########################\n"
    "#rrrr#vvvv######nnnnn####\n"
    "#rrrrrvvvv#pppppnnnnn####\n"
    "#rSrr#vvvv#pppp#nnnnn####\n"
    "#rrrr#vvvv#pppp#nnnnn####\n"
    "###y#######pppp#n########\n"
    "#yyyy#bbbb#pppp#ooooo#GG#\n"
    "#yyyyybbbb#ppppoooooooGG#\n"
    "#yyyy#bbbbbpppp#ooooo####\n"
    "#yyyy#bbbb######ooooo####\n"
    "#########################\n";

struct GridLayout {
    std::vector<std::string> rows;  // top row first
    std::size_t width() const { return rows.empty() ? 0 : rows.front().size(); }
    std::size_t height() const { return rows.size(); }
    char at(std::size_t r, std::size_t c) const { return rows[r][c]; }
};

inline GridLayout parse_grid(const std::string& text) {
    GridLayout g;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!g.rows.empty() && line.size() != g.rows.front().size())
            throw ConstructionError("grid rows have different widths");
        for (char ch : line)
            if (ch != '#' && ch != '.' && ch != 'S' && ch != 'G' && !(ch >= 'a' && ch <= 'z'))
                throw ConstructionError(std::string("unknown grid character '") + ch + "'");
        g.rows.push_back(line);
    }
    if (g.rows.empty()) throw ConstructionError("empty grid");
    return g;
}

enum GridAction : ActionId { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

// Non-wall cells indexed in reading order.
class GridWorld {
public:
    explicit GridWorld(GridLayout layout) : layout_(std::move(layout)) {
        index_.assign(layout_.height() * layout_.width(), kNoState);
        for (std::size_t r = 0; r < layout_.height(); ++r)
            for (std::size_t c = 0; c < layout_.width(); ++c) {
                const char ch = layout_.at(r, c);
                if (ch == '#') continue;
                index_[r * layout_.width() + c] = static_cast<StateId>(cells_.size());
                cells_.push_back({r, c});
                if (ch == 'S') {
                    if (start_ != kNoState) throw ConstructionError("grid has several start cells");
                    start_ = static_cast<StateId>(cells_.size() - 1);
                }
                if (ch == 'G') goals_.push_back(static_cast<StateId>(cells_.size() - 1));
            }
        if (start_ == kNoState) throw ConstructionError("grid has no start cell");
        if (goals_.empty()) throw ConstructionError("grid has no goal cell");
    }

    const GridLayout& layout() const { return layout_; }
    std::size_t num_cells() const { return cells_.size(); }
    StateId start() const { return start_; }
    const std::vector<StateId>& goals() const { return goals_; }
    std::pair<std::size_t, std::size_t> cell(StateId s) const { return cells_.at(s); }
    char symbol(StateId s) const { return layout_.at(cells_.at(s).first, cells_.at(s).second); }
    bool is_goal(StateId s) const { return symbol(s) == 'G'; }

    StateId index(std::size_t r, std::size_t c) const {
        if (r >= layout_.height() || c >= layout_.width()) return kNoState;
        return index_[r * layout_.width() + c];
    }

    // Deterministic move; walls and the border leave the agent in place.
    StateId move(StateId s, ActionId a) const {
        auto [r, c] = cells_.at(s);
        long rr = static_cast<long>(r), cc = static_cast<long>(c);
        switch (a) {
            case kUp: --rr; break;
            case kDown: ++rr; break;
            case kLeft: --cc; break;
            case kRight: ++cc; break;
            default: throw UsageError("grid action out of range");
        }
        if (rr < 0 || cc < 0) return s;
        const StateId n = index(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
        return n == kNoState ? s : n;
    }

private:
    GridLayout layout_;
    std::vector<std::pair<std::size_t, std::size_t>> cells_;
    std::vector<StateId> index_;
    StateId start_ = kNoState;
    std::vector<StateId> goals_;
};

// Goal-oriented grid MDP: the chosen action runs with probability
// 1 - fail_prob; otherwise an action drawn uniformly from all four runs.
inline TabularMdp build_gridworld_env(const GridWorld& world, double fail_prob = 0.04, double gamma = 0.98) {
    MdpBuilder b(world.num_cells(), 4, gamma);
    for (StateId s = 0; s < world.num_cells(); ++s) {
        if (world.is_goal(s)) {
            b.terminal(s);
            continue;
        }
        for (ActionId a = 0; a < 4; ++a) {
            std::map<StateId, double> dist;
            dist[world.move(s, a)] += 1.0 - fail_prob;
            for (ActionId f = 0; f < 4; ++f) dist[world.move(s, f)] += fail_prob / 4.0;
            for (auto [n, p] : dist) b.add(s, a, n, p, world.is_goal(n) ? 1.0 : 0.0);
        }
    }
    b.start(world.start()).goals(world.goals()).goal_oriented(true).reward_bound(1.0);
    return b.build();
}

inline GridWorld eight_rooms_world() { return GridWorld(parse_grid(kEightRoomsGrid)); }

inline TabularMdp build_eight_rooms_env() { return build_gridworld_env(eight_rooms_world()); }

// Room graph of the abstraction. Node ids: 0 S (red), 1 R1 (violet),
// 2 R2 (yellow), 3 R3 (blue), 4 R4 (pink), 5 R5 (brown), 6 R6 (orange),
// 7 G (green), 8 fictitious terminal.
namespace eight_rooms {
inline constexpr StateId kS = 0, kG = 7, kTerminal = 8;
inline constexpr std::size_t kNumNodes = 9;
inline constexpr ActionId kDone = 3;  // actions 0..2 pick a neighbour slot
inline const std::vector<std::pair<StateId, StateId>>& edges() {
    static const std::vector<std::pair<StateId, StateId>> e = {{0, 1}, {0, 2}, {2, 3}, {3, 4},
                                                               {4, 5}, {4, 6}, {5, 6}, {6, 7}};
    return e;
}
inline std::vector<std::vector<StateId>> neighbours() {
    std::vector<std::vector<StateId>> nb(kNumNodes - 1);
    for (auto [u, v] : edges()) {
        nb[u].push_back(v);
        nb[v].push_back(u);
    }
    for (auto& l : nb) std::sort(l.begin(), l.end());
    return nb;
}
inline std::optional<StateId> node_of_symbol(char ch) {
    switch (ch) {
        case 'S': case 'r': return 0;
        case 'v': return 1;
        case 'y': return 2;
        case 'b': return 3;
        case 'p': return 4;
        case 'n': return 5;
        case 'o': return 6;
        case 'G': return 7;
        default: return std::nullopt;
    }
}
}  // namespace eight_rooms

// Moves between adjacent rooms succeed with probability success_prob and
// otherwise stay put; the goal room's done action reaches the terminal with reward 1.
inline std::pair<TabularMdp, AggregationFn> build_eight_rooms_abstraction(const GridWorld& world,
                                                                         double gamma = 0.9,
                                                                         double success_prob = 0.9) {
    using namespace eight_rooms;
    const auto nb = neighbours();
    MdpBuilder b(kNumNodes, 4, gamma);
    for (StateId u = 0; u < kNumNodes - 1; ++u) {
        for (std::size_t k = 0; k < nb[u].size(); ++k) {
            b.add(u, static_cast<ActionId>(k), nb[u][k], success_prob, 0.0);
            b.add(u, static_cast<ActionId>(k), u, 1.0 - success_prob, 0.0);
        }
    }
    b.add(kG, kDone, kTerminal, 1.0, 1.0);
    b.terminal(kTerminal).start(kS).goals({kTerminal}).goal_oriented(true).reward_bound(1.0);

    std::vector<std::optional<StateId>> table(world.num_cells());
    for (StateId s = 0; s < world.num_cells(); ++s) {
        auto n = node_of_symbol(world.symbol(s));
        if (!n) throw ConstructionError("grid cell has no room color");
        table[s] = n;
    }
    return {b.build(), AggregationFn::by_cell(std::move(table), kNumNodes)};
}

inline std::pair<TabularMdp, AggregationFn> build_eight_rooms_abstraction() {
    return build_eight_rooms_abstraction(eight_rooms_world());
}

}  // namespace pbrs
