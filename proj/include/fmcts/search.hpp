#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fmcts/features.hpp"
#include "fmcts/game.hpp"
#include "fmcts/policy.hpp"
#include "fmcts/rng.hpp"

namespace fmcts {

inline const double kDefaultExploration = std::sqrt(2.0);

/// Either a fixed number of MCTS iterations or a wall-clock allowance.
struct SearchBudget {
    enum class Mode { Iterations, WallClock };
    Mode mode = Mode::Iterations;
    std::int64_t amount = 1; ///< iterations, or milliseconds

    static SearchBudget iterations(std::int64_t n);
    static SearchBudget wall_clock_ms(std::int64_t ms);
};

/// Tree node. `visits` counts the iterations through it and `total` sums
/// their scores for the player who moved into it. The parent keeps a copy of
/// each child's pair in `edge_visits` / `edge_total` so selection reads one
/// contiguous array.
struct SearchNode {
    GameState state;
    PlayerId moved_by = 0;
    std::vector<Move> moves;
    std::vector<std::unique_ptr<SearchNode>> children;
    std::vector<std::int64_t> edge_visits;
    std::vector<double> edge_total;
    std::vector<double> priors; ///< apprentice distribution, filled on demand
    std::int64_t visits = 0;
    std::int64_t child_visits = 0;
    double total = 0.0;

    /// Legal moves are generated now, or on the first generate_moves() call
    /// when `with_moves` is false (leaves that may never be revisited).
    SearchNode(const Game& game, GameState s, PlayerId moved_by, bool with_moves = true);

    bool has_moves() const { return moves_ready_ || state.terminal(); }
    void generate_moves(const Game& game);

    std::int64_t child_visit_count(std::size_t a) const { return edge_visits[a]; }
    double child_value(std::size_t a) const {
        return edge_visits[a] > 0 ? edge_total[a] / static_cast<double>(edge_visits[a]) : 0.0;
    }

private:
    bool moves_ready_ = false;
};

/// Search tree that survives between moves of one game.
class SearchTree {
public:
    SearchNode* root() { return root_.get(); }
    const SearchNode* root() const { return root_.get(); }

    /// Makes sure the root holds `s`; starts a fresh tree if it does not.
    SearchNode& prepare(const Game& game, const GameState& s);

    /// Re-roots at the subtree reached by `played`, or clears the tree when a
    /// move leads outside what was searched.
    void advance(std::span<const Move> played);
    void advance(Move played) { advance(std::span<const Move>(&played, 1)); }

    void clear() { root_.reset(); }

private:
    std::unique_ptr<SearchNode> root_;
};

struct SearchResult {
    std::vector<Move> moves;
    std::vector<std::int64_t> visits;
    std::int64_t iterations = 0;
};

/// Index maximising Q + c * sqrt(ln(sum N) / N); unvisited entries win
/// immediately, in index order. Ties go to the lowest index.
std::size_t ucb1_select(std::span<const double> q, std::span<const std::int64_t> n, double c);

/// Index maximising Q + c * p * sqrt(sum N) / (1 + N), with Q = 0 for
/// unvisited entries. Ties go to the lowest index.
std::size_t puct_select(std::span<const double> q, std::span<const std::int64_t> n, std::span<const double> priors,
                        double c);
/// PUCT choice at an expanded node. Throws ContractViolation without priors.
Move puct_select(const SearchNode& node, double c);

/// Plain UCT: UCB1 selection, one expansion per iteration, uniform play-outs.
SearchResult uct_search(const Game& game, SearchTree& tree, const GameState& root, SearchBudget budget, double c,
                        Rng& rng);

/// PUCT selection with apprentice priors; the first play-out move is sampled
/// from the apprentice and added to the tree, the rest are uniform.
SearchResult biased_search(const Game& game, SearchTree& tree, const GameState& root, SearchBudget budget,
                           const LinearPolicy& policy, const CompiledFeatureSet& cfs, double c, Rng& rng);

/// Normalised visit counts. Throws std::invalid_argument if all are zero.
std::vector<double> expert_distribution(std::span<const std::int64_t> visits);

enum class FinalMoveMode { SampleExpert, MaxVisits };

Move final_move(const SearchResult& result, FinalMoveMode mode, Rng& rng);

/// Apprentice argmax without search; ties go to the first legal move.
Move greedy_move(const Game& game, const LinearPolicy& policy, const CompiledFeatureSet& cfs, const GameState& s);

// Agents ---------------------------------------------------------------------

class Agent {
public:
    virtual ~Agent() = default;
    virtual std::string name() const = 0;
    virtual Move choose(const GameState& s) = 0;
    /// Called for every move played in the game, by either side.
    virtual void observe(Move) {}
    /// Iterations of the last search, 0 for agents that do not search.
    virtual std::int64_t last_iterations() const { return 0; }
};

struct MctsConfig {
    SearchBudget budget = SearchBudget::iterations(1000);
    double exploration = kDefaultExploration;
    FinalMoveMode final_move = FinalMoveMode::MaxVisits;
    bool reuse_tree = true;
};

class UctAgent : public Agent {
public:
    UctAgent(const Game& game, MctsConfig config, Rng rng);
    std::string name() const override { return "uct"; }
    Move choose(const GameState& s) override;
    void observe(Move m) override;
    std::int64_t last_iterations() const override { return last_.iterations; }
    const SearchResult& last_result() const { return last_; }

private:
    const Game& game_;
    MctsConfig config_;
    Rng rng_;
    SearchTree tree_;
    SearchResult last_;
};

class BiasedAgent : public Agent {
public:
    BiasedAgent(const Game& game, const LinearPolicy& policy, const CompiledFeatureSet& cfs, MctsConfig config, Rng rng);
    std::string name() const override { return "biased"; }
    Move choose(const GameState& s) override;
    void observe(Move m) override;
    std::int64_t last_iterations() const override { return last_.iterations; }
    const SearchResult& last_result() const { return last_; }

private:
    const Game& game_;
    const LinearPolicy& policy_;
    const CompiledFeatureSet& cfs_;
    MctsConfig config_;
    Rng rng_;
    SearchTree tree_;
    SearchResult last_;
};

class GreedyAgent : public Agent {
public:
    GreedyAgent(const Game& game, const LinearPolicy& policy, const CompiledFeatureSet& cfs)
        : game_(game), policy_(policy), cfs_(cfs) {}
    std::string name() const override { return "greedy"; }
    Move choose(const GameState& s) override { return greedy_move(game_, policy_, cfs_, s); }

private:
    const Game& game_;
    const LinearPolicy& policy_;
    const CompiledFeatureSet& cfs_;
};

class RandomAgent : public Agent {
public:
    RandomAgent(const Game& game, Rng rng) : game_(game), rng_(rng) {}
    std::string name() const override { return "random"; }
    Move choose(const GameState& s) override;

private:
    const Game& game_;
    Rng rng_;
};

} // namespace fmcts
