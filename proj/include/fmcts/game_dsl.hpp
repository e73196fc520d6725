#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fmcts {

struct SourceLocation {
    std::size_t offset = 0;
    int line = 1;
    int column = 1;
};

enum class ParseErrorKind { Lexical, UnknownLudeme, Arity, Unsupported };

const char* to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, SourceLocation where, const std::string& what);

    ParseErrorKind kind() const { return kind_; }
    const SourceLocation& where() const { return where_; }

private:
    ParseErrorKind kind_;
    SourceLocation where_;
};

/// Node of a parsed description. Lists carry a head label and children;
/// atoms are symbols, quoted strings, integers or `name:value` keywords.
/// Brace groups `{ ... }` are lists with kind Set and no label.
struct Ludeme {
    enum class Kind { List, Set, Symbol, String, Integer, Keyword };

    Kind kind = Kind::Symbol;
    std::string text;  ///< list label, symbol, string contents, or keyword name
    std::string value; ///< keyword value
    long integer = 0;
    std::vector<Ludeme> children;
    SourceLocation where;

    bool is_list() const { return kind == Kind::List; }
    bool is_atom(std::string_view s) const { return kind == Kind::Symbol && text == s; }
};

/// Parses a whole text into its top-level ludemes.
std::vector<Ludeme> parse_ludemes(std::string_view text);

/// Whitespace-normalised printing; parse_ludemes(print_ludeme(x)) == x.
std::string print_ludeme(const Ludeme& node);

bool structurally_equal(const Ludeme& a, const Ludeme& b);

struct BoardSpec {
    enum class Shape { Square, HexRhombus, HexHexagon };
    Shape shape = Shape::Square;
    int width = 0;
    int height = 0; ///< square only; equals width otherwise

    friend bool operator==(const BoardSpec&, const BoardSpec&) = default;
};

enum class CaptureMode { None, Diagonal, Any };

struct MoveRule {
    enum class Kind { PlaceOnEmpty, Step };
    Kind kind = Kind::PlaceOnEmpty;
    bool forward = false;          ///< step straight ahead
    bool forward_diagonal = false; ///< step to both forward diagonals
    CaptureMode capture = CaptureMode::None;

    friend bool operator==(const MoveRule&, const MoveRule&) = default;
};

enum class Outcome { Win, Loss };

struct EndRule {
    enum class Kind { Line, ReachOpposite, ConnectSides, NoPieces };
    Kind kind = Kind::Line;
    int length = 0; ///< Line only
    Outcome outcome = Outcome::Win;

    friend bool operator==(const EndRule&, const EndRule&) = default;
};

struct GameRules {
    std::string name;
    int players = 2;
    BoardSpec board;
    MoveRule moves;
    std::vector<EndRule> end;
    int move_cap = 100;

    friend bool operator==(const GameRules&, const GameRules&) = default;
};

/// Parses a single `(game ...)` description. Throws ParseError.
GameRules parse_game(std::string_view text);

/// Canonical description text for `rules`; parse_game(to_description(r)) == r.
std::string to_description(const GameRules& rules);

/// Built-in descriptions keyed by game id.
const std::map<std::string, std::string>& builtin_games();

/// Looks up a built-in game id, or reads a `.lud-mini` file when `id` names one.
GameRules load_game_rules(const std::string& id);

} // namespace fmcts
