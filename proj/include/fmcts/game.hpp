#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmcts/board_graph.hpp"
#include "fmcts/game_dsl.hpp"
#include "fmcts/pattern.hpp"
#include "fmcts/rng.hpp"

namespace fmcts {

using PlayerId = int;

inline PlayerId opponent(PlayerId p) { return 3 - p; }

enum class Status : std::uint8_t { Ongoing, Win, Tie };

struct Move {
    VertexId from = kOffBoard; ///< kOffBoard for placements
    VertexId to = kOffBoard;

    bool has_from() const { return from != kOffBoard; }
    friend auto operator<=>(const Move&, const Move&) = default;
};

std::string move_to_string(const Move& m);

/// Snapshot of a game in progress. Cells hold 0 for empty, else the owner.
struct GameState {
    std::vector<std::int8_t> cells;
    PlayerId mover = 1;
    int move_count = 0;
    Status status = Status::Ongoing;
    PlayerId winner = 0; ///< set when status == Win
    std::array<int, 3> pieces{}; ///< pieces on board per player (index 1, 2)

    bool terminal() const { return status != Status::Ongoing; }
    friend bool operator==(const GameState&, const GameState&) = default;
};

/// Thrown when a caller breaks an operation's preconditions.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Rule semantics for one GameRules description on its board.
class Game {
public:
    explicit Game(GameRules rules);

    const GameRules& rules() const { return rules_; }
    const BoardGraph& board() const { return board_; }
    const std::string& name() const { return rules_.name; }

    GameState initial_state() const;

    /// Legal moves in ascending (from, to) order. Throws ContractViolation on
    /// terminal states.
    std::vector<Move> legal_moves(const GameState& s) const;
    void legal_moves(const GameState& s, std::vector<Move>& out) const;
    bool is_legal(const GameState& s, Move m) const;

    /// Returns the successor state. Throws ContractViolation for illegal moves.
    GameState apply(const GameState& s, Move m) const;
    /// In-place successor without legality checks.
    void apply_in_place(GameState& s, Move m) const;

    /// Plays uniformly random moves until the game ends or the move cap hits.
    void random_playout(GameState& s, Rng& rng) const;

    /// 1 for a win, 0 for a loss, 0.5 for a tie, from `player`'s point of view.
    static double score(const GameState& terminal, PlayerId player);

    /// Features guaranteed to be active for every legal move of this game.
    std::vector<Feature> proto_features() const;

    /// Pieces are not distinguished beyond their owner, so every piece has item index 0.
    int item_index(const GameState&, VertexId) const { return 0; }

private:
    int line_run(const GameState& s, VertexId v, int slot) const;
    int longest_line(const GameState& s, VertexId v) const;
    bool connects_sides(const GameState& s, VertexId v) const;
    void update_status(GameState& s, Move m, bool captured) const;
    std::array<int, 3> step_slots(PlayerId p) const;

    GameRules rules_;
    BoardGraph board_;
};

BoardGraph build_board(const BoardSpec& spec);

} // namespace fmcts
