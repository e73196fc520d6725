#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fmcts/features.hpp"
#include "fmcts/game.hpp"
#include "fmcts/search.hpp"

namespace fmcts {

inline constexpr double kWilsonZ95 = 1.959963984540054;

/// Wilson score interval for `successes` out of `n` (successes may be fractional).
/// Throws std::invalid_argument unless n > 0 and 0 <= successes <= n.
std::pair<double, double> wilson_interval(double successes, int n, double z = kWilsonZ95);

struct GameRecord {
    int index = 0;
    bool a_first = true;
    int moves = 0;
    Status status = Status::Tie;
    PlayerId winner = 0;
    double score_a = 0.5;
};

struct MatchResult {
    int games_played = 0;
    double wins_a = 0.0; ///< ties count half
    double win_rate_a = 0.0;
    std::pair<double, double> ci95{0.0, 1.0};
    std::vector<GameRecord> games;
};

/// Builds a fresh agent for one game from its own random stream.
using AgentFactory = std::function<std::unique_ptr<Agent>(Rng)>;

/// Plays n games, A moving first in even-numbered games. Games may run on up
/// to `threads` threads (further capped by FMCTS_THREADS); results do not
/// depend on the thread count.
MatchResult play_match(const Game& game, const AgentFactory& a, const AgentFactory& b, int n, std::uint64_t seed,
                       int threads = 1);

/// Threads to use when at most `requested` are wanted, honouring FMCTS_THREADS.
int evaluation_threads(int requested);

struct SlowdownReport {
    double uct_iterations = 0.0;
    double biased_iterations = 0.0;
    double ratio = 0.0; ///< > 1 means the biased agent is slower
    int games = 0;
};

/// Mean iterations of plain UCT and biased MCTS over the first two moves of
/// `games` fresh games at the same wall-clock allowance. Throws
/// std::invalid_argument for an iterations budget.
SlowdownReport measure_slowdown(const Game& game, const WeightedFeatures& features, SearchBudget budget, int games,
                                std::uint64_t seed);

struct CurveRow {
    int games_of_self_play = 0;
    double win_rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t feature_count = 0;
};

/// Which side faces the opponent in a learning-curve evaluation.
enum class CurveAgent { Biased, Greedy };
enum class Opponent { Uct, Random };

/// Game count encoded in a checkpoint file name (checkpoint-<g>.feat), or -1.
int checkpoint_game(const std::string& path);

/// Checkpoint files in `dir`, sorted by game count.
std::vector<std::string> list_checkpoints(const std::string& dir);

struct CurveConfig {
    CurveAgent agent = CurveAgent::Biased;
    Opponent opponent = Opponent::Uct;
    int games = 200;
    MctsConfig search;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// One row per checkpoint, sorted by game count. Throws on a missing file.
std::vector<CurveRow> emit_learning_curve(const Game& game, const std::vector<std::string>& checkpoints,
                                          const CurveConfig& config, std::vector<MatchResult>* matches = nullptr);

AgentFactory make_agent_factory(const Game& game, CurveAgent kind, const LinearPolicy& policy,
                                const CompiledFeatureSet& cfs, const MctsConfig& search);
AgentFactory make_opponent_factory(const Game& game, Opponent kind, const MctsConfig& search);

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& rows);
void write_match_csv(const std::string& path, const MatchResult& result);
void write_slowdown_csv(const std::string& path, const SlowdownReport& report, std::int64_t ms);

} // namespace fmcts
