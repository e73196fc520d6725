#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fmcts/turn.hpp"

namespace fmcts {

using VertexId = std::int32_t;

/// Sentinel for a position outside the playable area. Never a vertex.
inline constexpr VertexId kOffBoard = -1;

/// A resolved relative position: a vertex id or kOffBoard.
using ResolvedPosition = VertexId;

enum class BoardKind { Square, HexRhombus, HexHexagon };

/// Integer lattice coordinate of a vertex. Square boards use (x, y) with y
/// growing northwards; hex boards use axial (q, r) with r growing southwards.
struct Coord {
    int x = 0;
    int y = 0;
    friend bool operator==(Coord, Coord) = default;
};

/// Playable area as a graph whose vertices list their neighbours in clockwise
/// slot order starting from a fixed direction. Missing neighbours are
/// kOffBoard. Immutable once built.
class BoardGraph {
public:
    /// 8 slots per cell: N, NE, E, SE, S, SW, W, NW.
    static BoardGraph square(int width, int height);
    /// n x n rhombus of hexagonal cells (the Hex board). 6 slots: NE, E, SE, SW, W, NW.
    static BoardGraph hex_rhombus(int n);
    /// Hexagon of hexagonal cells with `side` cells per side (the Yavalath board).
    static BoardGraph hex_hexagon(int side);

    BoardKind kind() const { return kind_; }
    /// Width/height for square boards, n for rhombus, side for hexagon.
    int width() const { return width_; }
    int height() const { return height_; }

    int vertex_count() const { return static_cast<int>(coords_.size()); }
    int slot_count(VertexId v) const { return slot_counts_[v]; }
    int max_slot_count() const { return max_slots_; }

    VertexId neighbor(VertexId v, int slot) const { return adjacency_[offsets_[v] + slot]; }
    /// Slot of neighbor(v, slot) that points back at v.
    int back_slot(VertexId v, int slot) const { return back_slots_[offsets_[v] + slot]; }
    /// Number of non-null slots of v.
    int degree(VertexId v) const;

    Coord coord(VertexId v) const { return coords_[v]; }
    std::optional<VertexId> at(Coord c) const;

    std::string describe() const;

private:
    BoardGraph() = default;
    void finish();

    BoardKind kind_ = BoardKind::Square;
    int width_ = 0;
    int height_ = 0;
    int max_slots_ = 0;
    std::vector<Coord> coords_;
    std::vector<int> slot_counts_;
    std::vector<int> offsets_;
    std::vector<VertexId> adjacency_;
    std::vector<int> back_slots_;
};

/// Endpoint of one branch of a walk resolution. `dir` is the direction slot
/// the walker faces on arrival; it is -1 for kOffBoard endpoints.
struct WalkEnd {
    ResolvedPosition pos = kOffBoard;
    int dir = -1;
    friend auto operator<=>(const WalkEnd&, const WalkEnd&) = default;
};

/// All branch endpoints of a walk, sorted and unique.
std::vector<WalkEnd> trace_walk(const BoardGraph& g, VertexId anchor, Turn rotation, bool reflect,
                                const Walk& walk);

/// Positions reached by `walk` from `anchor` after rotating the initial
/// direction by `rotation` and optionally mirroring every turn. Fractional
/// slot offsets branch to both neighbouring slots, so the result is a sorted
/// set. Throws std::invalid_argument when rotation is not a multiple of
/// 1/max_slot_count.
std::vector<ResolvedPosition> resolve_walk(const BoardGraph& g, VertexId anchor, Turn rotation, bool reflect,
                                           const Walk& walk);

/// Shortest walk (then lexicographically smallest) from `from` that reaches
/// `to` using whole-slot turns, or nullopt when `to` is unreachable.
std::optional<Walk> canonical_walk(const BoardGraph& g, VertexId from, VertexId to);

} // namespace fmcts
