#include "fmcts/game_dsl.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fmcts {

const char* to_string(ParseErrorKind kind) {
    switch (kind) {
    case ParseErrorKind::Lexical:
        return "lexical error";
    case ParseErrorKind::UnknownLudeme:
        return "unknown ludeme";
    case ParseErrorKind::Arity:
        return "arity mismatch";
    case ParseErrorKind::Unsupported:
        return "unsupported construct";
    }
    return "error";
}

ParseError::ParseError(ParseErrorKind kind, SourceLocation where, const std::string& what)
    : std::runtime_error(std::to_string(where.line) + ":" + std::to_string(where.column) + " (offset " +
                         std::to_string(where.offset) + "): " + to_string(kind) + ": " + what),
      kind_(kind), where_(where) {}

namespace {

constexpr int kMaxDepth = 256;

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    std::vector<Ludeme> read_all() {
        std::vector<Ludeme> out;
        for (;;) {
            skip_space();
            if (at_end())
                return out;
            out.push_back(read(0));
        }
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    SourceLocation here() const { return {pos_, line_, column_}; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(ParseErrorKind::Lexical, here(), what); }

    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
    static bool is_delimiter(char c) {
        return is_space(c) || c == '(' || c == ')' || c == '{' || c == '}' || c == '"' || c == ';';
    }

    void skip_space() {
        while (!at_end()) {
            if (is_space(peek())) {
                advance();
            } else if (peek() == ';') {
                while (!at_end() && peek() != '\n')
                    advance();
            } else {
                break;
            }
        }
    }

    Ludeme read(int depth) {
        if (depth > kMaxDepth)
            fail("nesting deeper than " + std::to_string(kMaxDepth));
        const SourceLocation start = here();
        const char c = peek();
        if (c == '(' || c == '{')
            return read_group(depth);
        if (c == ')' || c == '}')
            fail(std::string("unmatched '") + c + "'");
        if (c == '"')
            return read_string();
        Ludeme atom = read_atom();
        atom.where = start;
        return atom;
    }

    Ludeme read_group(int depth) {
        const SourceLocation start = here();
        const char open = peek();
        const char close = open == '(' ? ')' : '}';
        advance();
        Ludeme node;
        node.where = start;
        node.kind = open == '(' ? Ludeme::Kind::List : Ludeme::Kind::Set;
        bool labelled = node.kind == Ludeme::Kind::Set;
        for (;;) {
            skip_space();
            if (at_end())
                throw ParseError(ParseErrorKind::Lexical, start, std::string("unclosed '") + open + "'");
            const char c = peek();
            if (c == close) {
                advance();
                break;
            }
            if (c == ')' || c == '}')
                fail(std::string("mismatched '") + c + "', expected '" + close + "'");
            if (!labelled) {
                if (c == '(' || c == '{' || c == '"')
                    fail("list label must be an identifier");
                Ludeme head = read_atom();
                if (head.kind != Ludeme::Kind::Symbol)
                    throw ParseError(ParseErrorKind::Lexical, head.where, "list label must be an identifier");
                node.text = head.text;
                labelled = true;
                continue;
            }
            node.children.push_back(read(depth + 1));
        }
        if (!labelled)
            throw ParseError(ParseErrorKind::Lexical, start, "empty list");
        return node;
    }

    Ludeme read_string() {
        Ludeme node;
        node.where = here();
        node.kind = Ludeme::Kind::String;
        advance();
        for (;;) {
            if (at_end())
                throw ParseError(ParseErrorKind::Lexical, node.where, "unterminated string");
            char c = peek();
            if (c == '"') {
                advance();
                return node;
            }
            if (c == '\\') {
                advance();
                if (at_end())
                    throw ParseError(ParseErrorKind::Lexical, node.where, "unterminated string");
                c = peek();
                if (c != '"' && c != '\\')
                    fail("unknown escape sequence");
            }
            node.text.push_back(c);
            advance();
        }
    }

    Ludeme read_atom() {
        Ludeme node;
        node.where = here();
        const std::size_t begin = pos_;
        while (!at_end() && !is_delimiter(peek())) {
            const auto u = static_cast<unsigned char>(peek());
            if (u < 0x21 || u == 0x7f)
                fail("unexpected control byte");
            advance();
        }
        const std::string_view tok = text_.substr(begin, pos_ - begin);
        if (tok.empty())
            fail("expected a token");

        long value = 0;
        const bool numeric = tok.front() == '-' || (tok.front() >= '0' && tok.front() <= '9');
        if (numeric) {
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
            if (ec == std::errc() && ptr == tok.data() + tok.size()) {
                node.kind = Ludeme::Kind::Integer;
                node.integer = value;
                node.text = std::string(tok);
                return node;
            }
            if (ec == std::errc::result_out_of_range)
                throw ParseError(ParseErrorKind::Lexical, node.where, "integer out of range");
        }
        const auto colon = tok.find(':');
        if (colon != std::string_view::npos && colon > 0 && colon + 1 < tok.size()) {
            node.kind = Ludeme::Kind::Keyword;
            node.text = std::string(tok.substr(0, colon));
            node.value = std::string(tok.substr(colon + 1));
            return node;
        }
        node.kind = Ludeme::Kind::Symbol;
        node.text = std::string(tok);
        return node;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

[[noreturn]] void semantic_error(ParseErrorKind kind, const Ludeme& at, const std::string& what) {
    throw ParseError(kind, at.where, what);
}

std::string describe(const Ludeme& n) {
    switch (n.kind) {
    case Ludeme::Kind::List:
        return "(" + n.text + " ...)";
    case Ludeme::Kind::Set:
        return "{...}";
    default:
        return "'" + print_ludeme(n) + "'";
    }
}

const Ludeme& expect_list(const Ludeme& n, std::string_view label) {
    if (!n.is_list())
        semantic_error(ParseErrorKind::Unsupported, n, "expected (" + std::string(label) + " ...), got " + describe(n));
    if (n.text != label)
        semantic_error(ParseErrorKind::UnknownLudeme, n, "expected (" + std::string(label) + " ...), got " + describe(n));
    return n;
}

void expect_arity(const Ludeme& n, std::size_t lo, std::size_t hi) {
    if (n.children.size() < lo || n.children.size() > hi) {
        std::string range = lo == hi ? std::to_string(lo) : std::to_string(lo) + ".." + std::to_string(hi);
        semantic_error(ParseErrorKind::Arity, n,
                       "(" + n.text + ") takes " + range + " arguments, got " + std::to_string(n.children.size()));
    }
}

int positive_int(const Ludeme& n, const char* what) {
    if (n.kind != Ludeme::Kind::Integer)
        semantic_error(ParseErrorKind::Unsupported, n, std::string(what) + " must be an integer");
    if (n.integer < 1 || n.integer > 64)
        semantic_error(ParseErrorKind::Unsupported, n, std::string(what) + " must be in 1..64");
    return static_cast<int>(n.integer);
}

Outcome parse_outcome(const Ludeme& n) {
    if (n.is_atom("win"))
        return Outcome::Win;
    if (n.is_atom("loss"))
        return Outcome::Loss;
    semantic_error(ParseErrorKind::Unsupported, n, "expected win or loss, got " + describe(n));
}

BoardSpec parse_board(const Ludeme& board) {
    expect_arity(board, 1, 1);
    const Ludeme& shape = board.children[0];
    if (!shape.is_list())
        semantic_error(ParseErrorKind::Unsupported, shape, "board shape must be a list");
    BoardSpec spec;
    if (shape.text == "square") {
        expect_arity(shape, 1, 2);
        spec.shape = BoardSpec::Shape::Square;
        spec.width = positive_int(shape.children[0], "square width");
        spec.height = shape.children.size() == 2 ? positive_int(shape.children[1], "square height") : spec.width;
    } else if (shape.text == "rhombus") {
        expect_arity(shape, 1, 1);
        spec.shape = BoardSpec::Shape::HexRhombus;
        spec.width = spec.height = positive_int(shape.children[0], "rhombus size");
    } else if (shape.text == "hexagon") {
        expect_arity(shape, 1, 1);
        spec.shape = BoardSpec::Shape::HexHexagon;
        spec.width = spec.height = positive_int(shape.children[0], "hexagon side");
    } else {
        semantic_error(ParseErrorKind::UnknownLudeme, shape, "unknown board shape " + describe(shape));
    }
    return spec;
}

MoveRule parse_move_rule(const Ludeme& n) {
    if (!n.is_list())
        semantic_error(ParseErrorKind::Unsupported, n, "move rule must be a list");
    MoveRule rule;
    if (n.text == "to") {
        expect_arity(n, 2, 2);
        if (!n.children[0].is_atom("Mover"))
            semantic_error(ParseErrorKind::Unsupported, n.children[0], "only (to Mover ...) is supported");
        const Ludeme& site = n.children[1];
        if (!site.is_list() || site.text != "empty")
            semantic_error(ParseErrorKind::Unsupported, site, "only (to Mover (empty)) is supported");
        expect_arity(site, 0, 0);
        rule.kind = MoveRule::Kind::PlaceOnEmpty;
        return rule;
    }
    if (n.text == "step") {
        expect_arity(n, 2, 2);
        const Ludeme& dirs = expect_list(n.children[0], "dirs");
        expect_arity(dirs, 1, 2);
        rule.kind = MoveRule::Kind::Step;
        for (const Ludeme& d : dirs.children) {
            if (d.is_atom("forward"))
                rule.forward = true;
            else if (d.is_atom("forward-diagonal"))
                rule.forward_diagonal = true;
            else
                semantic_error(ParseErrorKind::UnknownLudeme, d, "unknown direction " + describe(d));
        }
        const Ludeme& cap = n.children[1];
        if (cap.kind != Ludeme::Kind::Keyword || cap.text != "capture")
            semantic_error(ParseErrorKind::Unsupported, cap, "expected capture:<none|diagonal|any>");
        if (cap.value == "none")
            rule.capture = CaptureMode::None;
        else if (cap.value == "diagonal")
            rule.capture = CaptureMode::Diagonal;
        else if (cap.value == "any")
            rule.capture = CaptureMode::Any;
        else
            semantic_error(ParseErrorKind::Unsupported, cap, "unknown capture mode '" + cap.value + "'");
        return rule;
    }
    semantic_error(ParseErrorKind::UnknownLudeme, n, "unknown move rule " + describe(n));
}

EndRule parse_end_rule(const Ludeme& n) {
    if (!n.is_list())
        semantic_error(ParseErrorKind::Unsupported, n, "end rule must be a list");
    EndRule rule;
    if (n.text == "line") {
        expect_arity(n, 2, 2);
        const Ludeme& len = n.children[0];
        if (len.kind != Ludeme::Kind::Keyword || len.text != "length")
            semantic_error(ParseErrorKind::Unsupported, len, "expected length:<k>");
        int k = 0;
        auto [ptr, ec] = std::from_chars(len.value.data(), len.value.data() + len.value.size(), k);
        if (ec != std::errc() || ptr != len.value.data() + len.value.size() || k < 2 || k > 64)
            semantic_error(ParseErrorKind::Unsupported, len, "line length must be an integer in 2..64");
        rule.kind = EndRule::Kind::Line;
        rule.length = k;
        rule.outcome = parse_outcome(n.children[1]);
        return rule;
    }
    if (n.text == "reach-opposite" || n.text == "connect-sides" || n.text == "no-pieces") {
        expect_arity(n, 1, 1);
        rule.kind = n.text == "reach-opposite" ? EndRule::Kind::ReachOpposite
                  : n.text == "connect-sides"  ? EndRule::Kind::ConnectSides
                                               : EndRule::Kind::NoPieces;
        rule.outcome = parse_outcome(n.children[0]);
        const Outcome required = rule.kind == EndRule::Kind::NoPieces ? Outcome::Loss : Outcome::Win;
        if (rule.outcome != required)
            semantic_error(ParseErrorKind::Unsupported, n.children[0], "(" + n.text + ") only supports this outcome: " +
                                                                           (required == Outcome::Win ? "win" : "loss"));
        return rule;
    }
    semantic_error(ParseErrorKind::UnknownLudeme, n, "unknown end rule " + describe(n));
}

void check_consistency(const GameRules& rules, const Ludeme& game) {
    const bool square = rules.board.shape == BoardSpec::Shape::Square;
    if (rules.moves.kind == MoveRule::Kind::Step && !square)
        semantic_error(ParseErrorKind::Unsupported, game, "step moves require a square board");
    for (const EndRule& e : rules.end) {
        if (e.kind == EndRule::Kind::ConnectSides && rules.board.shape != BoardSpec::Shape::HexRhombus)
            semantic_error(ParseErrorKind::Unsupported, game, "connect-sides requires a rhombus board");
        if ((e.kind == EndRule::Kind::ReachOpposite || e.kind == EndRule::Kind::NoPieces) &&
            rules.moves.kind != MoveRule::Kind::Step)
            semantic_error(ParseErrorKind::Unsupported, game, "reach-opposite/no-pieces require step moves");
    }
}

} // namespace

std::vector<Ludeme> parse_ludemes(std::string_view text) { return Reader(text).read_all(); }

std::string print_ludeme(const Ludeme& n) {
    switch (n.kind) {
    case Ludeme::Kind::Symbol:
        return n.text;
    case Ludeme::Kind::Integer:
        return std::to_string(n.integer);
    case Ludeme::Kind::Keyword:
        return n.text + ":" + n.value;
    case Ludeme::Kind::String: {
        std::string out = "\"";
        for (char c : n.text) {
            if (c == '"' || c == '\\')
                out.push_back('\\');
            out.push_back(c);
        }
        return out + "\"";
    }
    case Ludeme::Kind::List:
    case Ludeme::Kind::Set: {
        const bool list = n.kind == Ludeme::Kind::List;
        std::string out = list ? "(" + n.text : "{";
        bool first = !list;
        for (const Ludeme& c : n.children) {
            if (!first)
                out.push_back(' ');
            first = false;
            out += print_ludeme(c);
        }
        return out + (list ? ")" : "}");
    }
    }
    return {};
}

bool structurally_equal(const Ludeme& a, const Ludeme& b) {
    if (a.kind != b.kind || a.text != b.text || a.value != b.value || a.integer != b.integer ||
        a.children.size() != b.children.size())
        return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurally_equal(a.children[i], b.children[i]))
            return false;
    return true;
}

GameRules parse_game(std::string_view text) {
    std::vector<Ludeme> top = parse_ludemes(text);
    if (top.empty())
        throw ParseError(ParseErrorKind::Arity, SourceLocation{}, "empty description");
    if (top.size() > 1)
        semantic_error(ParseErrorKind::Arity, top[1], "expected a single (game ...) description");
    const Ludeme& game = expect_list(top[0], "game");
    if (game.children.empty())
        semantic_error(ParseErrorKind::Arity, game, "(game) requires a name");

    GameRules rules;
    const Ludeme& name = game.children[0];
    if (name.kind != Ludeme::Kind::String && name.kind != Ludeme::Kind::Symbol)
        semantic_error(ParseErrorKind::Unsupported, name, "game name must be a string");
    rules.name = name.text;

    bool have_players = false, have_board = false, have_rules = false;
    for (std::size_t i = 1; i < game.children.size(); ++i) {
        const Ludeme& part = game.children[i];
        if (!part.is_list())
            semantic_error(ParseErrorKind::Unsupported, part, "unexpected " + describe(part) + " in (game)");
        auto once = [&](bool& flag) {
            if (flag)
                semantic_error(ParseErrorKind::Arity, part, "duplicate (" + part.text + ")");
            flag = true;
        };
        if (part.text == "players") {
            once(have_players);
            expect_arity(part, 1, 1);
            if (part.children[0].kind != Ludeme::Kind::Integer || part.children[0].integer != 2)
                semantic_error(ParseErrorKind::Unsupported, part.children[0], "only two-player games are supported");
            rules.players = 2;
        } else if (part.text == "equipment") {
            // Pieces are implied by the move rule; the block is accepted as-is.
        } else if (part.text == "board") {
            once(have_board);
            rules.board = parse_board(part);
        } else if (part.text == "rules") {
            once(have_rules);
            expect_arity(part, 2, 2);
            const Ludeme& moves = expect_list(part.children[0], "moves");
            expect_arity(moves, 1, 1);
            rules.moves = parse_move_rule(moves.children[0]);
            const Ludeme& end = expect_list(part.children[1], "end");
            expect_arity(end, 1, 8);
            for (const Ludeme& e : end.children)
                rules.end.push_back(parse_end_rule(e));
        } else {
            semantic_error(ParseErrorKind::UnknownLudeme, part, "unknown ludeme (" + part.text + ")");
        }
    }
    if (!have_players)
        semantic_error(ParseErrorKind::Arity, game, "missing (players ...)");
    if (!have_board)
        semantic_error(ParseErrorKind::Arity, game, "missing (board ...)");
    if (!have_rules)
        semantic_error(ParseErrorKind::Arity, game, "missing (rules ...)");
    check_consistency(rules, game);
    return rules;
}

std::string to_description(const GameRules& r) {
    std::ostringstream out;
    Ludeme name;
    name.kind = Ludeme::Kind::String;
    name.text = r.name;
    out << "(game " << print_ludeme(name) << "\n  (players " << r.players << ")\n  (board ";
    switch (r.board.shape) {
    case BoardSpec::Shape::Square:
        out << "(square " << r.board.width;
        if (r.board.height != r.board.width)
            out << ' ' << r.board.height;
        out << ')';
        break;
    case BoardSpec::Shape::HexRhombus:
        out << "(rhombus " << r.board.width << ')';
        break;
    case BoardSpec::Shape::HexHexagon:
        out << "(hexagon " << r.board.width << ')';
        break;
    }
    out << ")\n  (rules\n    (moves ";
    if (r.moves.kind == MoveRule::Kind::PlaceOnEmpty) {
        out << "(to Mover (empty))";
    } else {
        out << "(step (dirs";
        if (r.moves.forward)
            out << " forward";
        if (r.moves.forward_diagonal)
            out << " forward-diagonal";
        out << ") capture:"
            << (r.moves.capture == CaptureMode::None       ? "none"
                : r.moves.capture == CaptureMode::Diagonal ? "diagonal"
                                                           : "any")
            << ')';
    }
    out << ")\n    (end";
    for (const EndRule& e : r.end) {
        const char* outcome = e.outcome == Outcome::Win ? "win" : "loss";
        switch (e.kind) {
        case EndRule::Kind::Line:
            out << " (line length:" << e.length << ' ' << outcome << ')';
            break;
        case EndRule::Kind::ReachOpposite:
            out << " (reach-opposite " << outcome << ')';
            break;
        case EndRule::Kind::ConnectSides:
            out << " (connect-sides " << outcome << ')';
            break;
        case EndRule::Kind::NoPieces:
            out << " (no-pieces " << outcome << ')';
            break;
        }
    }
    out << ")))\n";
    return out.str();
}

const std::map<std::string, std::string>& builtin_games() {
    static const std::map<std::string, std::string> games = [] {
        auto placement = [](const std::string& name, const std::string& board, const std::string& end) {
            return "(game \"" + name + "\"\n  (players 2)\n  (board " + board +
                   ")\n  (rules\n    (moves (to Mover (empty)))\n    (end " + end + ")))\n";
        };
        auto breakthrough = [](int n) {
            return "(game \"Breakthrough\"\n  (players 2)\n  (equipment {(pawn \"Pawn\")})\n  (board (square " +
                   std::to_string(n) +
                   "))\n  (rules\n    (moves (step (dirs forward forward-diagonal) capture:diagonal))\n"
                   "    (end (reach-opposite win) (no-pieces loss))))\n";
        };
        std::map<std::string, std::string> m;
        m["tictactoe"] = "(game \"Tic-Tac-Toe\"\n  (players 2)\n"
                         "  (equipment {(board \"Board\") (disc \"Piece\") (cross \"Cross\")})\n"
                         "  (board (square 3))\n"
                         "  (rules\n    (moves (to Mover (empty)))\n    (end (line length:3 win))))\n";
        m["gomoku"] = placement("Gomoku", "(square 9)", "(line length:5 win)");
        m["gomoku15"] = placement("Gomoku", "(square 15)", "(line length:5 win)");
        m["hex5"] = placement("Hex", "(rhombus 5)", "(connect-sides win)");
        m["hex7"] = placement("Hex", "(rhombus 7)", "(connect-sides win)");
        m["hex11"] = placement("Hex", "(rhombus 11)", "(connect-sides win)");
        m["yavalath"] = placement("Yavalath", "(hexagon 5)", "(line length:4 win) (line length:3 loss)");
        m["breakthrough6"] = breakthrough(6);
        m["breakthrough8"] = breakthrough(8);
        return m;
    }();
    return games;
}

GameRules load_game_rules(const std::string& id) {
    const auto& games = builtin_games();
    if (auto it = games.find(id); it != games.end())
        return parse_game(it->second);
    if (id.size() > 9 && id.ends_with(".lud-mini")) {
        std::ifstream in(id, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open game description " + id);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_game(buf.str());
    }
    throw std::invalid_argument("unknown game '" + id + "'");
}

} // namespace fmcts
