#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fmcts/evaluation.hpp"
#include "oracles.hpp"

using namespace fmcts;

namespace {

AgentFactory uct(const Game& g, int iterations) {
    MctsConfig cfg;
    cfg.budget = SearchBudget::iterations(iterations);
    return make_opponent_factory(g, Opponent::Uct, cfg);
}

AgentFactory random_agent(const Game& g) { return make_opponent_factory(g, Opponent::Random, MctsConfig{}); }

std::string temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("fmcts-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

} // namespace

TEST_CASE("wilson interval examples") {
    const auto [lo, hi] = wilson_interval(100, 200);
    CHECK(lo == doctest::Approx(0.43136).epsilon(1e-4));
    CHECK(hi == doctest::Approx(0.56864).epsilon(1e-4));
    const auto zero = wilson_interval(0, 50);
    CHECK(zero.first == 0.0);
    CHECK(zero.second > 0.0);
    const auto all = wilson_interval(50, 50);
    CHECK(all.second == 1.0);
    CHECK(all.first < 1.0);
    CHECK_THROWS_AS(wilson_interval(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(wilson_interval(3, 2), std::invalid_argument);
}

TEST_CASE("wilson interval agrees with the oracle") {
    Rng rng(5);
    for (int t = 0; t < 500; ++t) {
        const int n = 1 + static_cast<int>(rng.index(400));
        const double s = static_cast<double>(rng.index(2 * n + 1)) / 2.0;
        const auto [lo, hi] = wilson_interval(s, n);
        const auto [olo, ohi] = oracle::wilson(s, n, kWilsonZ95);
        CHECK(std::abs(lo - olo) < 1e-9);
        CHECK(std::abs(hi - ohi) < 1e-9);
        CHECK(lo <= s / n + 1e-12);
        CHECK(hi >= s / n - 1e-12);
        CHECK(lo >= 0.0);
        CHECK(hi <= 1.0);
    }
}

TEST_CASE("matches alternate seats and score ties as half") {
    const Game g(load_game_rules("tictactoe"));
    const MatchResult r = play_match(g, random_agent(g), random_agent(g), 20, 3);
    CHECK(r.games_played == 20);
    REQUIRE(r.games.size() == 20);
    double wins = 0;
    for (const GameRecord& rec : r.games) {
        CHECK(rec.a_first == (rec.index % 2 == 0));
        CHECK(rec.status != Status::Ongoing);
        CHECK(rec.moves >= 5);
        CHECK(rec.moves <= 9);
        if (rec.status == Status::Tie)
            CHECK(rec.score_a == 0.5);
        else
            CHECK((rec.score_a == 0.0 || rec.score_a == 1.0));
        wins += rec.score_a;
    }
    CHECK(r.wins_a == wins);
    CHECK(r.win_rate_a == doctest::Approx(wins / 20));
    const auto ci = wilson_interval(wins, 20);
    CHECK(r.ci95.first == ci.first);
    CHECK(r.ci95.second == ci.second);

    const MatchResult one = play_match(g, random_agent(g), random_agent(g), 1, 9);
    CHECK((one.win_rate_a == 0.0 || one.win_rate_a == 0.5 || one.win_rate_a == 1.0));
    CHECK_THROWS_AS(play_match(g, random_agent(g), random_agent(g), 0, 9), std::invalid_argument);
}

TEST_CASE("matches are reproducible and independent of thread count") {
    const Game g(load_game_rules("tictactoe"));
    const MatchResult a = play_match(g, uct(g, 50), random_agent(g), 12, 77, 1);
    const MatchResult b = play_match(g, uct(g, 50), random_agent(g), 12, 77, 1);
    const MatchResult c = play_match(g, uct(g, 50), random_agent(g), 12, 77, 4);
    for (int i = 0; i < 12; ++i) {
        CHECK(a.games[i].moves == b.games[i].moves);
        CHECK(a.games[i].score_a == b.games[i].score_a);
        CHECK(a.games[i].moves == c.games[i].moves);
        CHECK(a.games[i].score_a == c.games[i].score_a);
    }
    CHECK(a.wins_a == c.wins_a);
}

TEST_CASE("identical agents split evenly") {
    const Game g(load_game_rules("tictactoe"));
    const MatchResult r = play_match(g, uct(g, 40), uct(g, 40), 100, 2024);
    CHECK(r.win_rate_a >= 0.35);
    CHECK(r.win_rate_a <= 0.65);
}

TEST_CASE("stronger search beats random play") {
    const Game g(load_game_rules("tictactoe"));
    const MatchResult r = play_match(g, uct(g, 500), random_agent(g), 20, 1);
    CHECK(r.win_rate_a > 0.8);
}

TEST_CASE("slowdown measurement") {
    const Game g(load_game_rules("tictactoe"));
    CHECK_THROWS_AS(measure_slowdown(g, WeightedFeatures{}, SearchBudget::iterations(10), 2, 1),
                    std::invalid_argument);
    // On Hex both searches grow similar trees, so an empty feature set
    // leaves softmax as the only extra work.
    const Game hex(load_game_rules("hex7"));
    const SlowdownReport empty = measure_slowdown(hex, WeightedFeatures{}, SearchBudget::wall_clock_ms(20), 4, 1);
    CHECK(empty.games == 4);
    CHECK(empty.uct_iterations > 0);
    CHECK(empty.biased_iterations > 0);
    CHECK(empty.ratio == doctest::Approx(empty.uct_iterations / empty.biased_iterations));
    CHECK(empty.ratio >= 0.8);
    CHECK(empty.ratio <= 1.5);
}

TEST_CASE("checkpoint names") {
    CHECK(checkpoint_game("run/checkpoint-25.feat") == 25);
    CHECK(checkpoint_game("checkpoint-1.feat") == 1);
    CHECK(checkpoint_game("checkpoint-x.feat") == -1);
    CHECK(checkpoint_game("weights.feat") == -1);
    CHECK(checkpoint_game("checkpoint-3.feat.bak") == -1);
}

TEST_CASE("learning curve rows follow the checkpoints") {
    const Game g(load_game_rules("tictactoe"));
    const std::string dir = temp_dir("curve");
    const FeatureSet fs = generate_atomic_features(g);
    const std::vector<double> zero(fs.size(), 0.0);
    for (int games : {10, 2, 5})
        write_feature_file(dir + "/checkpoint-" + std::to_string(games) + ".feat", fs, zero);
    const auto paths = list_checkpoints(dir);
    REQUIRE(paths.size() == 3);
    CHECK(checkpoint_game(paths[0]) == 2);
    CHECK(checkpoint_game(paths[2]) == 10);

    CurveConfig cfg;
    cfg.agent = CurveAgent::Greedy;
    cfg.opponent = Opponent::Random;
    cfg.games = 6;
    std::vector<MatchResult> matches;
    const std::vector<std::string> shuffled{paths[2], paths[0], paths[1]};
    const auto rows = emit_learning_curve(g, shuffled, cfg, &matches);
    REQUIRE(rows.size() == 3);
    CHECK(matches.size() == 3);
    CHECK(rows[0].games_of_self_play == 2);
    CHECK(rows[1].games_of_self_play == 5);
    CHECK(rows[2].games_of_self_play == 10);
    for (const CurveRow& r : rows) {
        CHECK(r.feature_count == fs.size());
        CHECK(r.ci_lo <= r.win_rate);
        CHECK(r.win_rate <= r.ci_hi);
    }

    write_curve_csv(dir + "/curve.csv", rows);
    std::ifstream in(dir + "/curve.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "gamesOfSelfPlay,winRate,ciLo,ciHi,featureCount");
    int lines = 0;
    for (std::string line; std::getline(in, line);)
        ++lines;
    CHECK(lines == 3);

    CHECK_THROWS(emit_learning_curve(g, {dir + "/checkpoint-99.feat"}, cfg));
    std::filesystem::remove_all(dir);
}

TEST_CASE("thread cap from the environment") {
    ::setenv("FMCTS_THREADS", "1", 1);
    CHECK(evaluation_threads(8) == 1);
    ::unsetenv("FMCTS_THREADS");
    CHECK(evaluation_threads(1) == 1);
    CHECK(evaluation_threads(3) >= 1);
    CHECK(evaluation_threads(3) <= 3);
}
