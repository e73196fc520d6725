// fmcts: train feature-biased MCTS agents by self-play and evaluate them.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fmcts/evaluation.hpp"
#include "fmcts/features.hpp"
#include "fmcts/game.hpp"
#include "fmcts/game_dsl.hpp"
#include "fmcts/training.hpp"

using namespace fmcts;

namespace {

// Thrown for flag combinations CLI11 cannot express; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetFlags {
    std::optional<std::int64_t> iterations;
    std::optional<std::int64_t> time_ms;

    void attach(CLI::App& cmd) {
        auto* it = cmd.add_option("--iterations", iterations, "MCTS iterations per move")->check(CLI::PositiveNumber);
        auto* ms = cmd.add_option("--time-ms", time_ms, "thinking time per move in milliseconds")
                       ->check(CLI::PositiveNumber);
        it->excludes(ms);
        ms->excludes(it);
    }

    SearchBudget get() const {
        if (iterations)
            return SearchBudget::iterations(*iterations);
        if (time_ms)
            return SearchBudget::wall_clock_ms(*time_ms);
        throw UsageError("one of --iterations or --time-ms is required");
    }
};

struct TrainArgs {
    std::string game;
    std::string strategy = "correlation";
    int games = 200;
    BudgetFlags budget;
    std::uint64_t seed = 0;
    std::string out;
    double alpha = 0.05;
    double l2 = 1e-6;
    std::size_t sgd_batch = 20;
    std::size_t discovery_batch = 30;
    std::vector<int> checkpoints{1, 25, 50, 100, 200};
    std::string init;
    bool freeze = false;
};

int cmd_train(const TrainArgs& a) {
    TrainConfig cfg;
    cfg.game = a.game;
    auto strategy = parse_strategy(a.strategy);
    if (!strategy)
        throw UsageError("unknown strategy '" + a.strategy + "'");
    cfg.strategy = *strategy;
    cfg.games = a.games;
    cfg.budget = a.budget.get();
    cfg.seed = a.seed;
    cfg.out_dir = a.out;
    cfg.step_size = a.alpha;
    cfg.l2 = a.l2;
    cfg.sgd_batch = a.sgd_batch;
    cfg.discovery_batch = a.discovery_batch;
    cfg.checkpoints = a.checkpoints;
    cfg.freeze_features = a.freeze;
    if (!a.init.empty())
        cfg.initial = read_feature_file(a.init);
    const TrainingArtifacts art = run_self_play(cfg, &std::cerr);
    std::cout << "trained " << a.games << " games, " << art.features.size() << " features, wrote " << a.out << '\n';
    return 0;
}

struct EvalArgs {
    std::string game;
    std::string features;
    std::string checkpoints;
    std::string opponent = "uct";
    std::string agent = "biased";
    int n = 200;
    BudgetFlags budget;
    std::uint64_t seed = 0;
    std::string out = "curve.csv";
    std::string match_out;
    int threads = 1;
};

int cmd_eval(const EvalArgs& a) {
    const Game game(load_game_rules(a.game));
    CurveConfig cfg;
    if (a.agent == "biased")
        cfg.agent = CurveAgent::Biased;
    else if (a.agent == "greedy")
        cfg.agent = CurveAgent::Greedy;
    else
        throw UsageError("--agent must be biased or greedy");
    if (a.opponent == "uct")
        cfg.opponent = Opponent::Uct;
    else if (a.opponent == "random")
        cfg.opponent = Opponent::Random;
    else
        throw UsageError("--opponent must be uct or random");
    cfg.games = a.n;
    cfg.search.budget = a.budget.get();
    cfg.seed = a.seed;
    cfg.threads = a.threads;

    std::vector<std::string> files;
    if (!a.features.empty())
        files.push_back(a.features);
    else if (!a.checkpoints.empty())
        files = list_checkpoints(a.checkpoints);
    else
        throw UsageError("one of --features or --checkpoints is required");
    if (files.empty())
        throw std::runtime_error("no checkpoint files in " + a.checkpoints);

    std::vector<MatchResult> matches;
    std::vector<CurveRow> rows = emit_learning_curve(game, files, cfg, &matches);
    for (CurveRow& r : rows)
        r.games_of_self_play = std::max(0, r.games_of_self_play);
    write_curve_csv(a.out, rows);
    if (!a.match_out.empty())
        write_match_csv(a.match_out, matches.back());
    for (const CurveRow& r : rows)
        std::cout << "checkpoint " << r.games_of_self_play << ": win rate " << std::fixed << std::setprecision(3)
                  << r.win_rate << " [" << r.ci_lo << ", " << r.ci_hi << "] with " << r.feature_count
                  << " features\n";
    return 0;
}

struct ShowArgs {
    std::string file;
    std::size_t top = 15;
    std::string game;
};

int cmd_features_show(const ShowArgs& a) {
    const WeightedFeatures wf = read_feature_file(a.file);
    std::optional<Game> game;
    if (!a.game.empty())
        game.emplace(load_game_rules(a.game));
    std::vector<std::size_t> order(wf.features.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(wf.weights[x]) > std::abs(wf.weights[y]);
    });
    order.resize(std::min(order.size(), a.top));
    for (std::size_t i : order) {
        std::cout << "#" << i << " weight " << wf.weights[i] << "  " << feature_to_string(wf.features[i]) << '\n';
        if (game)
            std::cout << render_feature(wf.features[i], game->board());
    }
    return 0;
}

struct PruneArgs {
    std::string file;
    std::size_t k = 15;
    std::string out;
};

int cmd_features_prune(const PruneArgs& a) {
    const WeightedFeatures wf = read_feature_file(a.file);
    const PruneResult r = prune(wf.features, wf.weights, a.k, &std::cerr);
    write_feature_file(a.out, r.features, r.theta);
    std::cout << "kept " << r.features.size() << " of " << wf.features.size() << " features in " << a.out << '\n';
    return 0;
}

struct SlowdownArgs {
    std::string game;
    std::string features;
    BudgetFlags budget;
    int games = 10;
    std::uint64_t seed = 0;
    std::string out = "slowdown.csv";
};

int cmd_slowdown(const SlowdownArgs& a) {
    const SearchBudget budget = a.budget.get();
    if (budget.mode != SearchBudget::Mode::WallClock)
        throw UsageError("slowdown needs --time-ms");
    const Game game(load_game_rules(a.game));
    const WeightedFeatures wf = a.features.empty() ? WeightedFeatures{} : read_feature_file(a.features);
    const SlowdownReport r = measure_slowdown(game, wf, budget, a.games, a.seed);
    write_slowdown_csv(a.out, r, budget.amount);
    std::cout << "uct " << r.uct_iterations << " iterations, biased " << r.biased_iterations
              << " iterations, slowdown " << r.ratio << '\n';
    return 0;
}

int cmd_games_list() {
    for (const auto& [id, text] : builtin_games()) {
        const Game game(load_game_rules(id));
        std::cout << id << "\t" << game.name() << "\t" << game.board().describe() << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature-biased MCTS: self-play training and evaluation"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "learn features and weights by self-play");
    train_cmd->add_option("--game", train.game, "built-in game id or .lud-mini file")->required();
    train_cmd->add_option("--strategy", train.strategy, "random | combine-random | combine-max | correlation");
    train_cmd->add_option("--games", train.games, "self-play games")->check(CLI::PositiveNumber);
    train.budget.attach(*train_cmd);
    train_cmd->add_option("--seed", train.seed);
    train_cmd->add_option("--out", train.out, "output directory")->required();
    train_cmd->add_option("--alpha", train.alpha, "SGD step size")->check(CLI::PositiveNumber);
    train_cmd->add_option("--l2", train.l2, "L2 coefficient")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--sgd-batch", train.sgd_batch)->check(CLI::PositiveNumber);
    train_cmd->add_option("--discovery-batch", train.discovery_batch)->check(CLI::PositiveNumber);
    train_cmd->add_option("--checkpoints", train.checkpoints, "games after which to write a checkpoint")
        ->delimiter(',');
    train_cmd->add_option("--init", train.init, "starting .feat file");
    train_cmd->add_flag("--freeze", train.freeze, "keep the feature set fixed");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate checkpoints against an opponent");
    eval_cmd->add_option("--game", eval.game)->required();
    auto* feat_opt = eval_cmd->add_option("--features", eval.features, "single .feat file");
    auto* ckpt_opt = eval_cmd->add_option("--checkpoints", eval.checkpoints, "directory of checkpoint-<g>.feat");
    feat_opt->excludes(ckpt_opt);
    ckpt_opt->excludes(feat_opt);
    eval_cmd->add_option("--opponent", eval.opponent, "uct | random");
    eval_cmd->add_option("--agent", eval.agent, "biased | greedy");
    eval_cmd->add_option("--n", eval.n, "games per checkpoint")->check(CLI::PositiveNumber);
    eval.budget.attach(*eval_cmd);
    eval_cmd->add_option("--seed", eval.seed);
    eval_cmd->add_option("--out", eval.out, "learning-curve CSV");
    eval_cmd->add_option("--match-out", eval.match_out, "per-game CSV of the last match");
    eval_cmd->add_option("--threads", eval.threads)->check(CLI::PositiveNumber);

    auto* features_cmd = app.add_subcommand("features", "inspect and prune feature files");
    features_cmd->require_subcommand(1);
    ShowArgs show;
    auto* show_cmd = features_cmd->add_subcommand("show", "list features by absolute weight");
    show_cmd->add_option("--file", show.file)->required();
    show_cmd->add_option("--top", show.top)->check(CLI::PositiveNumber);
    show_cmd->add_option("--game", show.game, "draw each pattern on this game's board");
    PruneArgs prune_args;
    auto* prune_cmd = features_cmd->add_subcommand("prune", "keep the k heaviest features");
    prune_cmd->add_option("--file", prune_args.file)->required();
    prune_cmd->add_option("--k", prune_args.k)->check(CLI::PositiveNumber);
    prune_cmd->add_option("--out", prune_args.out)->required();

    SlowdownArgs slow;
    auto* slow_cmd = app.add_subcommand("slowdown", "compare iteration counts of UCT and biased MCTS");
    slow_cmd->add_option("--game", slow.game)->required();
    slow_cmd->add_option("--features", slow.features, ".feat file (empty set if omitted)");
    slow.budget.attach(*slow_cmd);
    slow_cmd->add_option("--games", slow.games)->check(CLI::PositiveNumber);
    slow_cmd->add_option("--seed", slow.seed);
    slow_cmd->add_option("--out", slow.out);

    auto* games_cmd = app.add_subcommand("games", "built-in games");
    games_cmd->require_subcommand(1);
    auto* list_cmd = games_cmd->add_subcommand("list", "list built-in game ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        for (const CLI::App* sub : app.get_subcommands())
            std::cerr << '\n' << sub->help();
        return 2;
    }

    try {
        if (train_cmd->parsed())
            return cmd_train(train);
        if (eval_cmd->parsed())
            return cmd_eval(eval);
        if (show_cmd->parsed())
            return cmd_features_show(show);
        if (prune_cmd->parsed())
            return cmd_features_prune(prune_args);
        if (slow_cmd->parsed())
            return cmd_slowdown(slow);
        if (list_cmd->parsed())
            return cmd_games_list();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\nRun with --help for more information.\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
