#include "fmcts/game.hpp"

#include <algorithm>

namespace fmcts {

std::string move_to_string(const Move& m) {
    if (m.has_from())
        return std::to_string(m.from) + "-" + std::to_string(m.to);
    return std::to_string(m.to);
}

BoardGraph build_board(const BoardSpec& spec) {
    switch (spec.shape) {
    case BoardSpec::Shape::Square:
        return BoardGraph::square(spec.width, spec.height);
    case BoardSpec::Shape::HexRhombus:
        return BoardGraph::hex_rhombus(spec.width);
    case BoardSpec::Shape::HexHexagon:
        return BoardGraph::hex_hexagon(spec.width);
    }
    throw std::invalid_argument("unknown board shape");
}

Game::Game(GameRules rules) : rules_(std::move(rules)), board_(build_board(rules_.board)) {}

GameState Game::initial_state() const {
    GameState s;
    s.cells.assign(board_.vertex_count(), 0);
    if (rules_.moves.kind == MoveRule::Kind::Step) {
        const int h = board_.height();
        const int ranks = h >= 4 ? 2 : 1;
        for (VertexId v = 0; v < board_.vertex_count(); ++v) {
            const int y = board_.coord(v).y;
            if (y < ranks)
                s.cells[v] = 1;
            else if (y >= h - ranks)
                s.cells[v] = 2;
        }
    }
    for (auto c : s.cells)
        if (c)
            ++s.pieces[c];
    return s;
}

std::array<int, 3> Game::step_slots(PlayerId p) const {
    // Straight ahead, then the two forward diagonals.
    if (p == 1)
        return {0, 1, 7};
    return {4, 3, 5};
}

void Game::legal_moves(const GameState& s, std::vector<Move>& out) const {
    if (s.terminal())
        throw ContractViolation("legal_moves called on a terminal state");
    out.clear();
    if (rules_.moves.kind == MoveRule::Kind::PlaceOnEmpty) {
        out.reserve(static_cast<std::size_t>(board_.vertex_count() - s.pieces[1] - s.pieces[2]));
        for (VertexId v = 0; v < board_.vertex_count(); ++v)
            if (s.cells[v] == 0)
                out.push_back({kOffBoard, v});
        return;
    }
    const MoveRule& rule = rules_.moves;
    const auto slots = step_slots(s.mover);
    const std::int8_t enemy = static_cast<std::int8_t>(opponent(s.mover));
    for (VertexId v = 0; v < board_.vertex_count(); ++v) {
        if (s.cells[v] != s.mover)
            continue;
        const std::size_t first = out.size();
        for (int i = 0; i < 3; ++i) {
            const bool straight = i == 0;
            if (straight ? !rule.forward : !rule.forward_diagonal)
                continue;
            const VertexId to = board_.neighbor(v, slots[i]);
            if (to == kOffBoard)
                continue;
            const bool may_capture = rule.capture == CaptureMode::Any ||
                                     (rule.capture == CaptureMode::Diagonal && !straight);
            if (s.cells[to] == 0 || (may_capture && s.cells[to] == enemy))
                out.push_back({v, to});
        }
        std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
    }
}

std::vector<Move> Game::legal_moves(const GameState& s) const {
    std::vector<Move> out;
    legal_moves(s, out);
    return out;
}

bool Game::is_legal(const GameState& s, Move m) const {
    if (s.terminal())
        return false;
    const auto moves = legal_moves(s);
    return std::binary_search(moves.begin(), moves.end(), m);
}

GameState Game::apply(const GameState& s, Move m) const {
    if (!is_legal(s, m))
        throw ContractViolation("illegal move " + move_to_string(m));
    GameState next = s;
    apply_in_place(next, m);
    return next;
}

int Game::line_run(const GameState& s, VertexId v, int slot) const {
    const std::int8_t owner = s.cells[v];
    int run = 0;
    for (VertexId cur = board_.neighbor(v, slot); cur != kOffBoard && s.cells[cur] == owner;
         cur = board_.neighbor(cur, slot))
        ++run;
    return run;
}

int Game::longest_line(const GameState& s, VertexId v) const {
    const int sc = board_.slot_count(v);
    int best = 1;
    for (int d = 0; d < sc / 2; ++d)
        best = std::max(best, 1 + line_run(s, v, d) + line_run(s, v, d + sc / 2));
    return best;
}

bool Game::connects_sides(const GameState& s, VertexId v) const {
    // Player 1 joins the r = 0 and r = n-1 rows, player 2 the q = 0 and q = n-1 columns.
    const std::int8_t owner = s.cells[v];
    const int n = board_.width();
    bool low = false, high = false;
    std::vector<char> seen(board_.vertex_count(), 0);
    std::vector<VertexId> stack{v};
    seen[v] = 1;
    while (!stack.empty()) {
        const VertexId cur = stack.back();
        stack.pop_back();
        const Coord c = board_.coord(cur);
        const int axis = owner == 1 ? c.y : c.x;
        low |= axis == 0;
        high |= axis == n - 1;
        if (low && high)
            return true;
        for (int slot = 0; slot < board_.slot_count(cur); ++slot) {
            const VertexId nb = board_.neighbor(cur, slot);
            if (nb != kOffBoard && !seen[nb] && s.cells[nb] == owner) {
                seen[nb] = 1;
                stack.push_back(nb);
            }
        }
    }
    return false;
}

void Game::update_status(GameState& s, Move m, bool captured) const {
    const PlayerId mover = s.cells[m.to];
    auto win = [&](PlayerId p) {
        s.status = Status::Win;
        s.winner = p;
    };

    int line = 0;
    bool line_known = false;
    for (int pass = 0; pass < 2 && !s.terminal(); ++pass) {
        const Outcome wanted = pass == 0 ? Outcome::Win : Outcome::Loss;
        for (const EndRule& e : rules_.end) {
            if (e.outcome != wanted || s.terminal())
                continue;
            switch (e.kind) {
            case EndRule::Kind::Line:
                if (!line_known) {
                    line = longest_line(s, m.to);
                    line_known = true;
                }
                if (line >= e.length)
                    win(wanted == Outcome::Win ? mover : opponent(mover));
                break;
            case EndRule::Kind::ConnectSides:
                if (connects_sides(s, m.to))
                    win(mover);
                break;
            case EndRule::Kind::ReachOpposite: {
                const int y = board_.coord(m.to).y;
                if ((mover == 1 && y == board_.height() - 1) || (mover == 2 && y == 0))
                    win(mover);
                break;
            }
            case EndRule::Kind::NoPieces:
                if (captured && s.pieces[opponent(mover)] == 0)
                    win(mover);
                break;
            }
        }
    }

    if (!s.terminal()) {
        bool any_move = false;
        if (rules_.moves.kind == MoveRule::Kind::PlaceOnEmpty) {
            any_move = s.pieces[1] + s.pieces[2] < board_.vertex_count();
        } else {
            std::vector<Move> moves;
            legal_moves(s, moves);
            any_move = !moves.empty();
        }
        if (!any_move)
            s.status = Status::Tie;
    }
    if (!s.terminal() && s.move_count >= rules_.move_cap)
        s.status = Status::Tie;
}

void Game::apply_in_place(GameState& s, Move m) const {
    const PlayerId mover = s.mover;
    bool captured = false;
    if (m.has_from()) {
        s.cells[m.from] = 0;
        if (s.cells[m.to] != 0) {
            --s.pieces[s.cells[m.to]];
            captured = true;
        }
    } else {
        ++s.pieces[mover];
    }
    s.cells[m.to] = static_cast<std::int8_t>(mover);
    s.mover = opponent(mover);
    ++s.move_count;
    update_status(s, m, captured);
}

void Game::random_playout(GameState& s, Rng& rng) const {
    if (s.terminal())
        return;
    if (rules_.moves.kind == MoveRule::Kind::PlaceOnEmpty) {
        std::vector<VertexId> empty;
        empty.reserve(s.cells.size());
        for (VertexId v = 0; v < board_.vertex_count(); ++v)
            if (s.cells[v] == 0)
                empty.push_back(v);
        while (!s.terminal()) {
            const std::size_t i = rng.index(empty.size());
            const VertexId v = empty[i];
            empty[i] = empty.back();
            empty.pop_back();
            apply_in_place(s, {kOffBoard, v});
        }
        return;
    }
    std::vector<Move> moves;
    while (!s.terminal()) {
        legal_moves(s, moves);
        apply_in_place(s, moves[rng.index(moves.size())]);
    }
}

double Game::score(const GameState& terminal, PlayerId player) {
    switch (terminal.status) {
    case Status::Win:
        return terminal.winner == player ? 1.0 : 0.0;
    case Status::Tie:
        return 0.5;
    case Status::Ongoing:
        break;
    }
    throw ContractViolation("score of a non-terminal state");
}

std::vector<Feature> Game::proto_features() const {
    const Element empty{ElementKind::Empty, 0};
    const Element friendly{ElementKind::Friendly, 0};
    if (rules_.moves.kind == MoveRule::Kind::PlaceOnEmpty)
        return {Feature{std::nullopt, Walk{}, {{Walk{}, empty}}}};

    const MoveRule& rule = rules_.moves;
    if (rule.kind == MoveRule::Kind::Step && board_.kind() == BoardKind::Square) {
        std::vector<Feature> out;
        const int k = board_.max_slot_count();
        if (rule.forward) {
            Feature f{Walk{}, Walk{Turn{}}, {{Walk{}, friendly}}};
            if (rule.capture != CaptureMode::Any)
                f.pattern.push_back({Walk{Turn{}}, empty});
            out.push_back(*normalized(f));
        }
        if (rule.forward_diagonal) {
            for (int side : {1, k - 1}) {
                Feature f{Walk{}, Walk{Turn(side, k)}, {{Walk{}, friendly}}};
                if (rule.capture == CaptureMode::None)
                    f.pattern.push_back({Walk{Turn(side, k)}, empty});
                out.push_back(*normalized(f));
            }
        }
        return out;
    }
    return {Feature{std::nullopt, Walk{}, {}}};
}

} // namespace fmcts
