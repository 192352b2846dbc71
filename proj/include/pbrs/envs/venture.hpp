#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pbrs/abstraction.hpp"
#include "pbrs/reachability.hpp"
#include "pbrs/ram.hpp"

namespace pbrs::venture {

inline constexpr std::size_t kNumActions = 8;
enum Action : ActionId {
    kUp = 0, kRight = 1, kLeft = 2, kDown = 3, kUpRight = 4, kUpLeft = 5, kDownRight = 6, kDownLeft = 7
};
inline constexpr std::array<std::pair<int, int>, kNumActions> kDelta = {
    {{0, -1}, {1, 0}, {-1, 0}, {0, 1}, {1, -1}, {-1, -1}, {1, 1}, {-1, 1}}};

inline constexpr int kHall = 8;  // room component value for the main hall
inline constexpr int kAllLocked = 0xF;
inline constexpr int kMinX = 1, kMaxX = 160, kMinY = 0, kMaxY = 78;  // y grows downward
inline constexpr std::pair<int, int> kStart = {68, 76};
inline constexpr std::uint64_t kTerminalKey = std::uint64_t{1} << 30;

inline constexpr std::size_t kRamX = 85, kRamY = 26, kRamRoom = 90, kRamLocked = 17;

struct Door {
    std::pair<int, int> hall;  // door coordinate in the main hall
    ActionId enter;            // action that walks through it
    std::pair<int, int> room;  // arrival coordinate inside the room
    int room_id;               // 0..3
};

inline const std::array<Door, 8>& doors() {
    static const std::array<Door, 8> d = {{{{65, 62}, kLeft, {129, 63}, 0},
                                           {{36, 34}, kDown, {58, 11}, 0},
                                           {{112, 50}, kUp, {62, 18}, 1},
                                           {{145, 48}, kLeft, {129, 13}, 1},
                                           {{141, 10}, kLeft, {129, 15}, 2},
                                           {{88, 9}, kRight, {31, 15}, 2},
                                           {{54, 14}, kLeft, {117, 39}, 3},
                                           {{20, 18}, kRight, {43, 39}, 3}}};
    return d;
}

inline ActionId reverse(ActionId a) {
    switch (a) {
        case kUp: return kDown;
        case kDown: return kUp;
        case kLeft: return kRight;
        case kRight: return kLeft;
        default: return a;
    }
}

using Polygon = std::vector<std::pair<int, int>>;

// Walls of the four rooms and the three free-standing blocks of the hall.
inline const std::vector<Polygon>& obstacles() {
    static const std::vector<Polygon> p = {
        {{16, 34}, {16, 70}, {65, 70}, {65, 54}, {41, 54}, {41, 46}, {61, 46}, {61, 34}},
        {{100, 36}, {145, 36}, {145, 72}, {92, 72}, {92, 56}, {120, 56}, {120, 50}, {100, 50}},
        {{88, 2}, {141, 2}, {141, 32}, {124, 32}, {124, 20}, {88, 20}},
        {{20, 4}, {54, 4}, {54, 30}, {20, 30}},
        {{64, 2}, {79, 2}, {79, 20}, {64, 20}},
        {{68, 26}, {114, 26}, {114, 32}, {68, 32}},
        {{76, 42}, {85, 42}, {85, 70}, {76, 70}},
    };
    return p;
}

inline bool on_boundary(const Polygon& poly, int x, int y) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
        auto [x0, y0] = poly[i];
        auto [x1, y1] = poly[(i + 1) % poly.size()];
        if (x0 == x1 && x == x0 && y >= std::min(y0, y1) && y <= std::max(y0, y1)) return true;
        if (y0 == y1 && y == y0 && x >= std::min(x0, x1) && x <= std::max(x0, x1)) return true;
    }
    return false;
}

// Even-odd rule; only meaningful for points off the boundary.
inline bool inside(const Polygon& poly, double x, double y) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const double xi = poly[i].first, yi = poly[i].second, xj = poly[j].first, yj = poly[j].second;
        if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
    }
    return in;
}

// Free-cell map of the hall: a lattice point is blocked only when it lies
// strictly inside an obstacle, so walls' outlines (where the doors sit) are walkable.
class HallMap {
public:
    HallMap() : free_((kMaxX + 1) * (kMaxY + 1), 0) {
        for (int x = kMinX; x <= kMaxX; ++x)
            for (int y = kMinY; y <= kMaxY; ++y) {
                bool blocked = false;
                for (const auto& poly : obstacles())
                    if (!on_boundary(poly, x, y) && inside(poly, x, y)) blocked = true;
                free_[static_cast<std::size_t>(x * (kMaxY + 1) + y)] = blocked ? 0 : 1;
            }
    }
    bool free(int x, int y) const {
        if (x < kMinX || x > kMaxX || y < kMinY || y > kMaxY) return false;
        return free_[static_cast<std::size_t>(x * (kMaxY + 1) + y)] != 0;
    }
    // Position after a unit move; a diagonal also needs both orthogonal cells free.
    std::pair<int, int> step(int x, int y, ActionId a) const {
        auto [dx, dy] = kDelta[a];
        if (!free(x + dx, y + dy)) return {x, y};
        if (dx != 0 && dy != 0 && (!free(x + dx, y) || !free(x, y + dy))) return {x, y};
        return {x + dx, y + dy};
    }

private:
    std::vector<char> free_;
};

struct AbstractState {
    int x = kStart.first;
    int y = kStart.second;
    int room = kHall;  // 0..3 inside a room, kHall in the main hall
    int locked = 0;    // bit r set once room r has been visited and left

    std::uint64_t key() const {
        return static_cast<std::uint64_t>(x) | (static_cast<std::uint64_t>(y) << 8) |
               (static_cast<std::uint64_t>(room) << 16) | (static_cast<std::uint64_t>(locked) << 20);
    }
    static AbstractState from_key(std::uint64_t k) {
        return {static_cast<int>(k & 0xFF), static_cast<int>((k >> 8) & 0xFF), static_cast<int>((k >> 16) & 0xF),
                static_cast<int>((k >> 20) & 0xF)};
    }
};

// Main-hall abstraction. A door's entry action moves the agent to the room's
// arrival coordinate; there, only the reverse action leaves, back onto the
// hall door, and leaving marks the room as locked. With every room locked the
// agent takes a done transition to a fictitious terminal paying reward 1.
class Model {
public:
    std::uint64_t start_key() const { return AbstractState{}.key(); }
    bool is_terminal(std::uint64_t k) const { return k == kTerminalKey; }
    const HallMap& hall() const { return hall_; }

    template <class Emit>
    void expand(std::uint64_t k, Emit&& emit) const {
        const auto s = AbstractState::from_key(k);
        if (s.room == kHall && s.locked == kAllLocked) {
            for (std::size_t a = 0; a < kNumActions; ++a) emit(a, kTerminalKey, 1.0, 1.0);
            return;
        }
        if (s.room != kHall) {
            const Door* door = nullptr;
            for (const auto& d : doors())
                if (d.room_id == s.room && d.room.first == s.x && d.room.second == s.y) door = &d;
            for (ActionId a = 0; a < kNumActions; ++a) {
                if (door && a == reverse(door->enter))
                    emit(a, AbstractState{door->hall.first, door->hall.second, kHall, s.locked | (1 << s.room)}.key(),
                         1.0, 0.0);
                else
                    emit(a, k, 1.0, 0.0);
            }
            return;
        }
        for (ActionId a = 0; a < kNumActions; ++a) {
            const Door* door = nullptr;
            for (const auto& d : doors())
                if (d.hall.first == s.x && d.hall.second == s.y && d.enter == a) door = &d;
            if (door) {
                emit(a, AbstractState{door->room.first, door->room.second, door->room_id, s.locked}.key(), 1.0, 0.0);
                continue;
            }
            auto [nx, ny] = hall_.step(s.x, s.y, a);
            emit(a, AbstractState{nx, ny, kHall, s.locked}.key(), 1.0, 0.0);
        }
    }

    template <class F>
    void for_each_successor(std::uint64_t k, F&& f) const {
        if (is_terminal(k)) return;
        expand(k, [&](std::size_t, std::uint64_t n, double, double) { f(n); });
    }

private:
    HallMap hall_;
};

}  // namespace pbrs::venture

namespace pbrs {

class VentureAbstraction {
public:
    IndexedModel model;

    const TabularMdp& mdp() const { return model.mdp; }
    StateId index_of(const venture::AbstractState& s) const { return model.index_of(s.key()); }

    // alpha(s) = (s_85, s_26, s_90, s_17); the low four bits of s_17 are the lock flags.
    static venture::AbstractState alpha(const RamVector& ram) {
        return {ram[venture::kRamX], ram[venture::kRamY], ram[venture::kRamRoom] == venture::kHall ? venture::kHall
                                                                                                    : ram[venture::kRamRoom] & 0xF,
                ram[venture::kRamLocked] & 0xF};
    }
    std::optional<StateId> lookup(const RamVector& ram) const {
        if (ram[venture::kRamRoom] != venture::kHall && ram[venture::kRamRoom] > 3) return std::nullopt;
        const StateId s = index_of(alpha(ram));
        if (s == kNoState) return std::nullopt;
        return s;
    }
};

inline VentureAbstraction build_venture_abstraction(double gamma = 0.98) {
    venture::Model m;
    auto keys = explore(m, m.start_key()).keys;
    VentureAbstraction va;
    va.model = build_indexed_model(
        std::move(keys), m.start_key(), venture::kNumActions, gamma,
        [&](std::uint64_t k, auto&& emit) { m.expand(k, emit); },
        [&](std::uint64_t k) { return m.is_terminal(k); }, [&](std::uint64_t k) { return m.is_terminal(k); },
        true);
    return va;
}

// Hall-only shaping: scaled PBRS term between the abstract states of s and s'.
inline double venture_shaping_F8(const RamVector& s, const RamVector& s_next, const VentureAbstraction& abs,
                                 const Potential& phi, double gamma) {
    const auto cur = abs.lookup(s);
    const auto nxt = abs.lookup(s_next);
    if (cur && nxt) return 1e3 * (gamma * phi.at(*nxt) - phi.at(*cur));
    return 0.0;
}

inline double venture_shaping_F(const RamVector& s, ActionId /*a*/, const RamVector& s_next,
                                const VentureAbstraction& abs, const Potential& phi, double gamma) {
    if (s[venture::kRamX] == s_next[venture::kRamX] && s[venture::kRamY] == s_next[venture::kRamY]) return 0.0;
    if (s[venture::kRamRoom] == venture::kHall) return venture_shaping_F8(s, s_next, abs, phi, gamma);
    return 0.0;
}

}  // namespace pbrs
