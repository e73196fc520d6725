#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>

#include "fmcts/features.hpp"

namespace fmcts {

namespace {

char glyph(const Element& e) {
    switch (e.kind) {
    case ElementKind::Empty:
        return '_';
    case ElementKind::Friendly:
        return 'o';
    case ElementKind::Enemy:
        return 'x';
    case ElementKind::OwnedBy:
        return static_cast<char>('0' + std::clamp(e.index, 0, 9));
    case ElementKind::ItemIndex:
        return 'i';
    case ElementKind::OffBoard:
        break;
    }
    return '#';
}

// Column/row on the character grid. Hex rows are shifted half a cell per row.
std::pair<int, int> cell_position(const BoardGraph& g, VertexId v) {
    const Coord c = g.coord(v);
    switch (g.kind()) {
    case BoardKind::Square:
        return {2 * c.x, g.height() - 1 - c.y};
    case BoardKind::HexRhombus:
        return {2 * c.x + c.y, c.y};
    case BoardKind::HexHexagon:
        return {2 * c.x + c.y + 2 * (g.width() - 1), c.y + g.width() - 1};
    }
    return {0, 0};
}

} // namespace

std::string render_feature(const Feature& f, const BoardGraph& board) {
    // Prefer the anchor nearest the middle at which the whole pattern fits.
    std::vector<VertexId> anchors(board.vertex_count());
    for (VertexId v = 0; v < board.vertex_count(); ++v)
        anchors[v] = v;
    double cx = 0, cy = 0;
    for (VertexId v : anchors) {
        cx += cell_position(board, v).first;
        cy += cell_position(board, v).second;
    }
    cx /= board.vertex_count();
    cy /= board.vertex_count();
    auto dist = [&](VertexId v) {
        auto [x, y] = cell_position(board, v);
        return std::hypot(x - cx, 2.0 * (y - cy));
    };
    std::stable_sort(anchors.begin(), anchors.end(), [&](VertexId a, VertexId b) { return dist(a) < dist(b); });

    std::optional<FeatureInstance> shown;
    for (VertexId a : anchors) {
        auto insts = ground_feature(board, f, 0, a, Turn{}, false);
        if (!insts.empty()) {
            shown = insts.front();
            break;
        }
    }
    if (!shown)
        return "  (pattern does not fit on " + board.describe() + ")\n";

    std::map<VertexId, char> marks;
    std::vector<std::string> offboard;
    for (const ResolvedTest& t : shown->tests) {
        if (t.pos == kOffBoard)
            offboard.push_back(walk_to_string(f.pattern[t.requirement].walk));
        else
            marks[t.pos] = glyph(t.element);
    }
    if (shown->from != kOffBoard)
        marks[shown->from] = marks.count(shown->from) ? static_cast<char>(std::toupper(marks[shown->from])) : '^';
    marks[shown->to] = '+';

    int cols = 0, rows = 0;
    for (VertexId v = 0; v < board.vertex_count(); ++v) {
        auto [x, y] = cell_position(board, v);
        cols = std::max(cols, x + 1);
        rows = std::max(rows, y + 1);
    }
    std::vector<std::string> grid(rows, std::string(cols, ' '));
    for (VertexId v = 0; v < board.vertex_count(); ++v) {
        auto [x, y] = cell_position(board, v);
        auto it = marks.find(v);
        grid[y][x] = it == marks.end() ? '.' : it->second;
    }
    std::string out;
    for (std::string& row : grid) {
        while (!row.empty() && row.back() == ' ')
            row.pop_back();
        out += "  " + row + "\n";
    }
    if (!offboard.empty()) {
        out += "  off-board at:";
        for (const std::string& w : offboard)
            out += " " + w;
        out += "\n";
    }
    return out;
}

} // namespace fmcts
