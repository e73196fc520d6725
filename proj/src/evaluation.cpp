#include "fmcts/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <regex>
#include <stdexcept>
#include <thread>

namespace fmcts {

std::pair<double, double> wilson_interval(double successes, int n, double z) {
    if (n <= 0)
        throw std::invalid_argument("wilson interval needs at least one trial");
    if (successes < 0.0 || successes > static_cast<double>(n))
        throw std::invalid_argument("wilson interval: successes outside [0, n]");
    const double nn = static_cast<double>(n);
    const double p = successes / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(std::max(0.0, p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)));
    double lo = std::max(0.0, centre - half);
    double hi = std::min(1.0, centre + half);
    if (p <= 0.0)
        lo = 0.0;
    if (p >= 1.0)
        hi = 1.0;
    return {lo, hi};
}

int evaluation_threads(int requested) {
    int n = std::max(1, requested);
    if (const char* env = std::getenv("FMCTS_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1)
            n = std::min<long>(n, cap);
    }
    return n;
}

namespace {

GameRecord play_one(const Game& game, const AgentFactory& make_a, const AgentFactory& make_b, int index,
                    const Rng& root) {
    GameRecord rec;
    rec.index = index;
    rec.a_first = index % 2 == 0;
    std::unique_ptr<Agent> a = make_a(root.derive("agent-a", static_cast<std::uint64_t>(index)));
    std::unique_ptr<Agent> b = make_b(root.derive("agent-b", static_cast<std::uint64_t>(index)));
    Agent* first = rec.a_first ? a.get() : b.get();
    Agent* second = rec.a_first ? b.get() : a.get();

    GameState s = game.initial_state();
    while (!s.terminal()) {
        Agent* mover = s.mover == 1 ? first : second;
        const Move m = mover->choose(s);
        s = game.apply(s, m);
        first->observe(m);
        second->observe(m);
    }
    rec.moves = s.move_count;
    rec.status = s.status;
    rec.winner = s.winner;
    rec.score_a = Game::score(s, rec.a_first ? 1 : 2);
    return rec;
}

} // namespace

MatchResult play_match(const Game& game, const AgentFactory& a, const AgentFactory& b, int n, std::uint64_t seed,
                       int threads) {
    if (n < 1)
        throw std::invalid_argument("a match needs at least one game");
    const Rng root(seed);
    MatchResult out;
    out.games.resize(static_cast<std::size_t>(n));
    const int workers = std::min(evaluation_threads(threads), n);
    if (workers <= 1) {
        for (int g = 0; g < n; ++g)
            out.games[g] = play_one(game, a, b, g, root);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_lock;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int g; (g = next.fetch_add(1)) < n;) {
                    try {
                        out.games[g] = play_one(game, a, b, g, root);
                    } catch (...) {
                        std::lock_guard<std::mutex> hold(failure_lock);
                        if (!failure)
                            failure = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : pool)
            t.join();
        if (failure)
            std::rethrow_exception(failure);
    }
    out.games_played = n;
    for (const GameRecord& r : out.games)
        out.wins_a += r.score_a;
    out.win_rate_a = out.wins_a / n;
    out.ci95 = wilson_interval(out.wins_a, n);
    return out;
}

SlowdownReport measure_slowdown(const Game& game, const WeightedFeatures& features, SearchBudget budget, int games,
                                std::uint64_t seed) {
    if (budget.mode != SearchBudget::Mode::WallClock)
        throw std::invalid_argument("slowdown is only meaningful under a wall-clock budget");
    if (games < 1)
        throw std::invalid_argument("slowdown needs at least one game");
    LinearPolicy policy;
    policy.theta = features.weights;
    const CompiledFeatureSet cfs(features.features, game.board());
    MctsConfig config;
    config.budget = budget;
    config.reuse_tree = false;
    const Rng root(seed);

    auto first_two = [&](Agent& agent) {
        std::int64_t total = 0;
        int searches = 0;
        GameState s = game.initial_state();
        for (int k = 0; k < 2 && !s.terminal(); ++k) {
            const Move m = agent.choose(s);
            total += agent.last_iterations();
            ++searches;
            agent.observe(m);
            s = game.apply(s, m);
        }
        return std::pair<std::int64_t, int>{total, searches};
    };

    std::int64_t uct_total = 0, biased_total = 0;
    int uct_n = 0, biased_n = 0;
    for (int g = 0; g < games; ++g) {
        UctAgent uct(game, config, root.derive("uct", static_cast<std::uint64_t>(g)));
        BiasedAgent biased(game, policy, cfs, config, root.derive("biased", static_cast<std::uint64_t>(g)));
        auto [ui, un] = first_two(uct);
        auto [bi, bn] = first_two(biased);
        uct_total += ui;
        uct_n += un;
        biased_total += bi;
        biased_n += bn;
    }
    SlowdownReport r;
    r.games = games;
    r.uct_iterations = static_cast<double>(uct_total) / std::max(1, uct_n);
    r.biased_iterations = static_cast<double>(biased_total) / std::max(1, biased_n);
    r.ratio = r.biased_iterations > 0 ? r.uct_iterations / r.biased_iterations
                                      : std::numeric_limits<double>::infinity();
    return r;
}

int checkpoint_game(const std::string& path) {
    static const std::regex pattern(R"(checkpoint-(\d+)\.feat$)");
    std::smatch m;
    const std::string name = std::filesystem::path(path).filename().string();
    if (!std::regex_search(name, m, pattern))
        return -1;
    return std::stoi(m[1].str());
}

std::vector<std::string> list_checkpoints(const std::string& dir) {
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("checkpoint directory not found: " + dir);
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && checkpoint_game(entry.path().string()) >= 0)
            out.push_back(entry.path().string());
    std::sort(out.begin(), out.end(),
              [](const std::string& a, const std::string& b) { return checkpoint_game(a) < checkpoint_game(b); });
    return out;
}

AgentFactory make_agent_factory(const Game& game, CurveAgent kind, const LinearPolicy& policy,
                                const CompiledFeatureSet& cfs, const MctsConfig& search) {
    if (kind == CurveAgent::Greedy)
        return [&game, &policy, &cfs](Rng) { return std::make_unique<GreedyAgent>(game, policy, cfs); };
    return [&game, &policy, &cfs, search](Rng rng) {
        return std::make_unique<BiasedAgent>(game, policy, cfs, search, rng);
    };
}

AgentFactory make_opponent_factory(const Game& game, Opponent kind, const MctsConfig& search) {
    if (kind == Opponent::Random)
        return [&game](Rng rng) { return std::make_unique<RandomAgent>(game, rng); };
    return [&game, search](Rng rng) { return std::make_unique<UctAgent>(game, search, rng); };
}

std::vector<CurveRow> emit_learning_curve(const Game& game, const std::vector<std::string>& checkpoints,
                                          const CurveConfig& config, std::vector<MatchResult>* matches) {
    std::vector<std::string> sorted = checkpoints;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const std::string& a, const std::string& b) { return checkpoint_game(a) < checkpoint_game(b); });
    std::vector<CurveRow> rows;
    for (const std::string& path : sorted) {
        if (!std::filesystem::exists(path))
            throw std::runtime_error("checkpoint file not found: " + path);
        const WeightedFeatures wf = read_feature_file(path);
        LinearPolicy policy;
        policy.theta = wf.weights;
        const CompiledFeatureSet cfs(wf.features, game.board());
        const AgentFactory agent = make_agent_factory(game, config.agent, policy, cfs, config.search);
        const AgentFactory opponent = make_opponent_factory(game, config.opponent, config.search);
        MatchResult r = play_match(game, agent, opponent, config.games, config.seed, config.threads);
        rows.push_back({checkpoint_game(path), r.win_rate_a, r.ci95.first, r.ci95.second, wf.features.size()});
        if (matches)
            matches->push_back(std::move(r));
    }
    return rows;
}

namespace {

std::ofstream open_csv(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty())
        std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out.precision(10);
    return out;
}

const char* outcome_name(const GameRecord& r) {
    if (r.score_a == 1.0)
        return "win";
    if (r.score_a == 0.0)
        return "loss";
    return "tie";
}

} // namespace

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& rows) {
    std::ofstream out = open_csv(path);
    out << "gamesOfSelfPlay,winRate,ciLo,ciHi,featureCount\n";
    for (const CurveRow& r : rows)
        out << r.games_of_self_play << ',' << r.win_rate << ',' << r.ci_lo << ',' << r.ci_hi << ',' << r.feature_count
            << '\n';
}

void write_match_csv(const std::string& path, const MatchResult& result) {
    std::ofstream out = open_csv(path);
    out << "game,aFirst,moves,outcome,scoreA\n";
    for (const GameRecord& r : result.games)
        out << r.index << ',' << (r.a_first ? 1 : 0) << ',' << r.moves << ',' << outcome_name(r) << ',' << r.score_a
            << '\n';
}

void write_slowdown_csv(const std::string& path, const SlowdownReport& report, std::int64_t ms) {
    std::ofstream out = open_csv(path);
    out << "games,timeMs,iterationsUct,iterationsBiased,ratio\n";
    out << report.games << ',' << ms << ',' << report.uct_iterations << ',' << report.biased_iterations << ','
        << report.ratio << '\n';
}

} // namespace fmcts
