#include "fmcts/board_graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <stdexcept>

namespace fmcts {

std::string walk_to_string(const Walk& w) {
    std::string out = "[";
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i)
            out += ';';
        out += w[i].to_string();
    }
    out += ']';
    return out;
}

namespace {

constexpr std::array<Coord, 8> kSquareDirs{{{0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}}};
constexpr std::array<Coord, 6> kHexDirs{{{1, -1}, {1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}}};

// Slot offset as an exact rational numer/denom, split into floor/ceil branches.
void push_branches(std::int64_t numer, std::int64_t denom, int slots, std::vector<int>& out) {
    const std::int64_t base = numer / denom;
    out.push_back(static_cast<int>(base % slots));
    if (numer % denom != 0)
        out.push_back(static_cast<int>((base + 1) % slots));
}

} // namespace

void BoardGraph::finish() {
    std::map<std::pair<int, int>, VertexId> index;
    for (VertexId v = 0; v < vertex_count(); ++v)
        index[{coords_[v].x, coords_[v].y}] = v;

    const bool square = kind_ == BoardKind::Square;
    const int slots = square ? 8 : 6;
    max_slots_ = slots;
    slot_counts_.assign(coords_.size(), slots);
    offsets_.resize(coords_.size());
    adjacency_.assign(coords_.size() * slots, kOffBoard);
    back_slots_.assign(coords_.size() * slots, -1);
    for (VertexId v = 0; v < vertex_count(); ++v) {
        offsets_[v] = v * slots;
        for (int s = 0; s < slots; ++s) {
            const Coord d = square ? kSquareDirs[s] : kHexDirs[s];
            auto it = index.find({coords_[v].x + d.x, coords_[v].y + d.y});
            if (it != index.end()) {
                adjacency_[offsets_[v] + s] = it->second;
                back_slots_[offsets_[v] + s] = (s + slots / 2) % slots;
            }
        }
    }
}

BoardGraph BoardGraph::square(int width, int height) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("square board dimensions must be positive");
    BoardGraph g;
    g.kind_ = BoardKind::Square;
    g.width_ = width;
    g.height_ = height;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            g.coords_.push_back({x, y});
    g.finish();
    return g;
}

BoardGraph BoardGraph::hex_rhombus(int n) {
    if (n < 1)
        throw std::invalid_argument("rhombus size must be positive");
    BoardGraph g;
    g.kind_ = BoardKind::HexRhombus;
    g.width_ = n;
    g.height_ = n;
    for (int r = 0; r < n; ++r)
        for (int q = 0; q < n; ++q)
            g.coords_.push_back({q, r});
    g.finish();
    return g;
}

BoardGraph BoardGraph::hex_hexagon(int side) {
    if (side < 1)
        throw std::invalid_argument("hexagon side must be positive");
    BoardGraph g;
    g.kind_ = BoardKind::HexHexagon;
    g.width_ = side;
    g.height_ = side;
    const int m = side - 1;
    for (int r = -m; r <= m; ++r)
        for (int q = -m; q <= m; ++q)
            if (std::abs(q + r) <= m)
                g.coords_.push_back({q, r});
    g.finish();
    return g;
}

int BoardGraph::degree(VertexId v) const {
    int d = 0;
    for (int s = 0; s < slot_count(v); ++s)
        d += neighbor(v, s) != kOffBoard;
    return d;
}

std::optional<VertexId> BoardGraph::at(Coord c) const {
    for (VertexId v = 0; v < vertex_count(); ++v)
        if (coords_[v] == c)
            return v;
    return std::nullopt;
}

std::string BoardGraph::describe() const {
    switch (kind_) {
    case BoardKind::Square:
        return "square " + std::to_string(width_) + "x" + std::to_string(height_);
    case BoardKind::HexRhombus:
        return "hex rhombus " + std::to_string(width_);
    case BoardKind::HexHexagon:
        return "hex hexagon side " + std::to_string(width_);
    }
    return {};
}

std::vector<WalkEnd> trace_walk(const BoardGraph& g, VertexId anchor, Turn rotation, bool reflect,
                                const Walk& walk) {
    const int kmax = g.max_slot_count();
    if ((rotation.num() * kmax) % rotation.den() != 0)
        throw std::invalid_argument("rotation " + rotation.to_string() + " is not a multiple of 1/" +
                                    std::to_string(kmax));
    if (anchor < 0 || anchor >= g.vertex_count())
        throw std::out_of_range("anchor is not a board vertex");

    std::vector<WalkEnd> frontier;
    std::vector<int> dirs;
    push_branches(rotation.num() * g.slot_count(anchor), rotation.den(), g.slot_count(anchor), dirs);
    for (int d : dirs)
        frontier.push_back({anchor, d});

    std::vector<WalkEnd> next;
    for (Turn t : walk) {
        if (reflect)
            t = t.negated();
        next.clear();
        for (const WalkEnd& cur : frontier) {
            if (cur.pos == kOffBoard) {
                next.push_back(cur);
                continue;
            }
            const int sc = g.slot_count(cur.pos);
            dirs.clear();
            push_branches(cur.dir * t.den() + t.num() * sc, t.den(), sc, dirs);
            for (int slot : dirs) {
                const VertexId nb = g.neighbor(cur.pos, slot);
                if (nb == kOffBoard) {
                    next.push_back({kOffBoard, -1});
                    continue;
                }
                const int back = g.back_slot(cur.pos, slot);
                const int nsc = g.slot_count(nb);
                std::vector<int> ahead;
                push_branches(2 * back + nsc, 2, nsc, ahead);
                for (int d : ahead)
                    next.push_back({nb, d});
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        frontier.swap(next);
    }
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    return frontier;
}

std::vector<ResolvedPosition> resolve_walk(const BoardGraph& g, VertexId anchor, Turn rotation, bool reflect,
                                           const Walk& walk) {
    std::vector<ResolvedPosition> out;
    for (const WalkEnd& e : trace_walk(g, anchor, rotation, reflect, walk))
        out.push_back(e.pos);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<Walk> canonical_walk(const BoardGraph& g, VertexId from, VertexId to) {
    if (from < 0 || from >= g.vertex_count() || to < 0 || to >= g.vertex_count())
        throw std::out_of_range("canonical_walk endpoints must be board vertices");
    if (from == to)
        return Walk{};

    // BFS over (vertex, facing). Expanding turns in increasing order keeps each
    // layer sorted lexicographically, so the first hit is the canonical walk.
    struct Node {
        VertexId pos;
        int dir;
        int parent;
        Turn turn;
    };
    std::vector<Node> nodes{{from, 0, -1, Turn{}}};
    const int kmax = g.max_slot_count();
    std::vector<char> seen(static_cast<std::size_t>(g.vertex_count()) * kmax, 0);
    seen[static_cast<std::size_t>(from) * kmax] = 1;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        const int idx = queue.front();
        queue.pop_front();
        const Node cur = nodes[idx];
        const int sc = g.slot_count(cur.pos);
        for (int k = 0; k < sc; ++k) {
            const int slot = (cur.dir + k) % sc;
            const VertexId nb = g.neighbor(cur.pos, slot);
            if (nb == kOffBoard)
                continue;
            const int nsc = g.slot_count(nb);
            const int ndir = (g.back_slot(cur.pos, slot) + nsc / 2) % nsc;
            const std::size_t key = static_cast<std::size_t>(nb) * kmax + ndir;
            if (seen[key])
                continue;
            seen[key] = 1;
            nodes.push_back({nb, ndir, idx, Turn(k, sc)});
            const int nidx = static_cast<int>(nodes.size()) - 1;
            if (nb == to) {
                Walk w;
                for (int i = nidx; nodes[i].parent >= 0; i = nodes[i].parent)
                    w.push_back(nodes[i].turn);
                std::reverse(w.begin(), w.end());
                return w;
            }
            queue.push_back(nidx);
        }
    }
    return std::nullopt;
}

} // namespace fmcts
