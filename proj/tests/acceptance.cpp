// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "fmcts/evaluation.hpp"
#include "fmcts/training.hpp"
#include "oracles.hpp"

using namespace fmcts;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const std::string& title, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass)
        ++failures;
    std::printf("%s criterion %d: %s (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fresh_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("fmcts-acceptance-" + name);
    std::filesystem::remove_all(p);
    return p.string();
}

Outcome matcher_equivalence() {
    Rng rng(101);
    long pairs = 0, mismatches = 0;
    for (const auto& [id, text] : builtin_games()) {
        const Game g(parse_game(text));
        FeatureSet fs = generate_atomic_features(g);
        for (int i = 0; i < 25; ++i)
            if (auto f = normalized(oracle::random_feature(rng, g)))
                fs.append(*f);
        const CompiledFeatureSet cfs(fs, g.board());
        int done = 0;
        while (done < 1000) {
            const GameState s = oracle::random_state(g, rng, 2 * g.board().vertex_count() / 3);
            if (s.terminal())
                continue;
            const auto moves = g.legal_moves(s);
            const Move m = moves[rng.index(moves.size())];
            if (cfs.feature_vector(s, m) != oracle::feature_vector(g.board(), fs, s, m))
                ++mismatches;
            ++done;
        }
        pairs += done;
    }
    return {mismatches == 0, std::to_string(pairs) + " pairs over " + std::to_string(builtin_games().size()) +
                                 " games, " + std::to_string(mismatches) + " mismatches"};
}

Outcome walk_semantics() {
    const Walk knight{Turn{}, Turn{}, Turn(1, 4)};
    const auto sq = BoardGraph::square(5, 5);
    auto as_set = [](const std::vector<ResolvedPosition>& v) { return std::set<ResolvedPosition>(v.begin(), v.end()); };
    const auto on_square = as_set(resolve_walk(sq, *sq.at({2, 2}), Turn{}, false, knight));
    const bool square_ok = on_square == std::set<ResolvedPosition>{*sq.at({3, 4})};

    const auto hex = BoardGraph::hex_hexagon(5);
    const VertexId hc = *hex.at({0, 0});
    std::set<ResolvedPosition> pair = as_set(resolve_walk(hex, hc, Turn{}, false, {Turn{}, Turn{}, Turn(1, 6)}));
    const auto third = as_set(resolve_walk(hex, hc, Turn{}, false, {Turn{}, Turn{}, Turn(1, 3)}));
    pair.insert(third.begin(), third.end());
    const auto on_hex = as_set(resolve_walk(hex, hc, Turn{}, false, knight));
    const bool hex_ok = on_hex.size() == 2 && on_hex == pair;

    std::vector<BoardGraph> boards;
    for (int w = 1; w <= 7; ++w)
        for (int h = 1; w * h <= 61 && h <= 8; ++h)
            boards.push_back(BoardGraph::square(w, h));
    for (int n = 1; n <= 7; ++n)
        boards.push_back(BoardGraph::hex_rhombus(n));
    for (int n = 1; n <= 5; ++n)
        boards.push_back(BoardGraph::hex_hexagon(n));
    long checked = 0, broken = 0;
    for (const BoardGraph& g : boards)
        for (VertexId u = 0; u < g.vertex_count(); ++u)
            for (VertexId v = 0; v < g.vertex_count(); ++v) {
                const auto w = canonical_walk(g, u, v);
                ++checked;
                if (!w || as_set(resolve_walk(g, u, Turn{}, false, *w)) != std::set<ResolvedPosition>{v})
                    ++broken;
            }
    std::ostringstream d;
    d << "square example " << (square_ok ? "ok" : "wrong") << ", hex example " << (hex_ok ? "ok" : "wrong") << ", "
      << checked << " round trips on " << boards.size() << " boards, " << broken << " broken";
    return {square_ok && hex_ok && broken == 0, d.str()};
}

FeatureSample random_sample(Rng& rng, int features, int moves) {
    FeatureSample s;
    for (int a = 0; a < moves; ++a) {
        SparseVector phi;
        for (int i = 0; i < features; ++i)
            if (rng.index(2))
                phi.push_back(static_cast<std::uint32_t>(i));
        s.phis.push_back(phi);
    }
    double total = 0;
    for (int a = 0; a < moves; ++a)
        s.pi.push_back(rng.uniform() + 0.01);
    for (double p : s.pi)
        total += p;
    for (double& p : s.pi)
        p /= total;
    return s;
}

Outcome gradient_check() {
    Rng rng(303);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<FeatureSample> batch;
        const int nb = 1 + static_cast<int>(rng.index(4));
        const int features = 2 + static_cast<int>(rng.index(6));
        for (int b = 0; b < nb; ++b)
            batch.push_back(random_sample(rng, features, 2 + static_cast<int>(rng.index(6))));
        std::vector<double> theta(static_cast<std::size_t>(features));
        for (double& w : theta)
            w = (rng.uniform() - 0.5) * 4;
        const auto grad = batch_gradient(theta, batch);
        auto mean_loss = [&](const std::vector<double>& th) {
            double total = 0;
            for (const auto& s : batch)
                total += cross_entropy(th, s);
            return total / static_cast<double>(batch.size());
        };
        const double h = 1e-5;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            auto up = theta, down = theta;
            up[i] += h;
            down[i] -= h;
            const double fd = (mean_loss(up) - mean_loss(down)) / (2 * h);
            const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-3});
            worst = std::max(worst, std::abs(fd - grad[i]) / scale);
        }
    }
    std::ostringstream d;
    d << "worst relative error " << worst;
    return {worst < 1e-4, d.str()};
}

Outcome softmax_contract() {
    Rng rng(404);
    double worst_sum = 0, worst_shift = 0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> z(1 + rng.index(50));
        const double spread = std::pow(10.0, static_cast<double>(rng.index(4)));
        for (double& v : z)
            v = (rng.uniform() - 0.5) * spread;
        const auto p = softmax(z);
        double sum = 0;
        for (double v : p)
            sum += v;
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        const double c = (rng.uniform() - 0.5) * 200;
        for (double& v : z)
            v += c;
        const auto q = softmax(z);
        for (std::size_t i = 0; i < p.size(); ++i)
            worst_shift = std::max(worst_shift, std::abs(p[i] - q[i]));
    }
    std::ostringstream d;
    d << "max |sum-1| " << worst_sum << ", max shift change " << worst_shift;
    return {worst_sum < 1e-9 && worst_shift < 1e-9, d.str()};
}

Outcome pearson_oracle() {
    Rng rng(505);
    double worst = 0;
    int zero_variance = 0;
    bool zero_ok = true;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + rng.index(60);
        std::vector<double> u(n), v(n);
        const int kind = static_cast<int>(rng.index(4));
        for (std::size_t i = 0; i < n; ++i) {
            switch (kind) {
            case 0:
                u[i] = static_cast<double>(rng.index(2));
                v[i] = static_cast<double>(rng.index(2));
                break;
            case 1:
                u[i] = rng.uniform() - 0.5;
                v[i] = static_cast<double>(rng.index(2));
                break;
            case 2:
                u[i] = rng.uniform() * 10;
                v[i] = 0.3 * u[i] + rng.uniform();
                break;
            default:
                u[i] = 0.25;
                v[i] = rng.uniform();
                break;
            }
        }
        const double r = pearson(u, v);
        const double expect = oracle::pearson(u, v);
        worst = std::max(worst, std::abs(r - expect));
        if (expect == 0.0 && (kind == 3 || n == 1)) {
            ++zero_variance;
            zero_ok = zero_ok && r == 0.0;
        }
    }
    std::ostringstream d;
    d << "max deviation " << worst << ", " << zero_variance << " zero-variance cases";
    return {worst < 1e-12 && zero_ok && zero_variance > 0, d.str()};
}

Outcome handcrafted_beats_uct() {
    const Game g(load_game_rules("yavalath"));
    const WeightedFeatures hand = handcrafted_yavalath();
    LinearPolicy policy;
    policy.theta = hand.weights;
    const CompiledFeatureSet cfs(hand.features, g.board());
    MctsConfig search;
    search.budget = SearchBudget::iterations(1000);
    const MatchResult r = play_match(g, make_agent_factory(g, CurveAgent::Biased, policy, cfs, search),
                                     make_opponent_factory(g, Opponent::Uct, search), 100, 606, evaluation_threads(8));
    std::ostringstream d;
    d << "biased scored " << r.wins_a << "/100 (" << r.win_rate_a * 100 << "%, CI " << r.ci95.first << "-"
      << r.ci95.second << ")";
    return {r.win_rate_a >= 0.75, d.str()};
}

// Shared by criteria 7, 9 and 10.
struct TrainingRun {
    bool ran = false;
    TrainingArtifacts art;
    std::string dir;
};

TrainConfig criterion7_config(const std::string& dir) {
    TrainConfig c;
    c.game = "tictactoe";
    c.strategy = DiscoveryStrategy::CorrelationBased;
    c.games = 30;
    c.budget = SearchBudget::iterations(200);
    c.seed = 707;
    c.checkpoints = {1, 30};
    c.out_dir = dir;
    return c;
}

TrainingRun training;

Outcome training_smoke() {
    const std::string d1 = fresh_dir("train-a"), d2 = fresh_dir("train-b");
    training.art = run_self_play(criterion7_config(d1));
    training.dir = d1;
    training.ran = true;
    const TrainingArtifacts second = run_self_play(criterion7_config(d2));
    bool identical = second.features == training.art.features && second.policy.theta == training.art.policy.theta;
    for (const char* name : {"checkpoint-1.feat", "checkpoint-30.feat", "train_log.csv"}) {
        const std::string a = read_file(d1 + "/" + name), b = read_file(d2 + "/" + name);
        identical = identical && !a.empty() && a == b;
    }
    std::filesystem::remove_all(d2);

    const Game g(load_game_rules("tictactoe"));
    const auto& cps = training.art.checkpoints;
    if (cps.size() != 2 || cps[0].game != 1 || cps[1].game != 30)
        return {false, "unexpected checkpoint schedule"};
    const ExperienceBuffer& buffer = training.art.buffer;
    const double early = mean_cross_entropy(cps[0].features, cps[0].theta, g.board(), buffer);
    const double late = mean_cross_entropy(cps[1].features, cps[1].theta, g.board(), buffer);
    std::ostringstream d;
    d << "checkpoints " << (identical ? "bit-identical" : "DIFFER") << ", cross-entropy game 1 " << early
      << " -> game 30 " << late << ", " << training.art.discoveries.size() << " features discovered";
    return {identical && late < early, d.str()};
}

Outcome uct_sanity() {
    const Game g(load_game_rules("tictactoe"));
    MctsConfig cfg;
    cfg.budget = SearchBudget::iterations(10000);
    const Rng root(808);
    int losses = 0, wins = 0, ties = 0;
    for (int game = 0; game < 100; ++game) {
        UctAgent first(g, cfg, root.derive("uct", static_cast<std::uint64_t>(game)));
        RandomAgent second(g, root.derive("random", static_cast<std::uint64_t>(game)));
        GameState s = g.initial_state();
        while (!s.terminal()) {
            Agent& mover = s.mover == 1 ? static_cast<Agent&>(first) : second;
            const Move m = mover.choose(s);
            first.observe(m);
            second.observe(m);
            s = g.apply(s, m);
        }
        const double score = Game::score(s, 1);
        losses += score == 0.0;
        wins += score == 1.0;
        ties += score == 0.5;
    }
    std::ostringstream d;
    d << wins << " wins, " << ties << " ties, " << losses << " losses";
    return {losses == 0, d.str()};
}

Outcome monotonicity() {
    if (!training.ran)
        return {false, "criterion 7 run unavailable"};
    const Game g(load_game_rules("tictactoe"));
    const auto& found = training.art.discoveries;
    if (found.empty())
        return {false, "no features were discovered"};
    Rng rng(909);
    long samples = 0, violations = 0, fired = 0;
    while (samples < 500) {
        const GameState s = oracle::random_state(g, rng, 8);
        if (s.terminal())
            continue;
        const auto moves = g.legal_moves(s);
        const Move m = moves[rng.index(moves.size())];
        ++samples;
        for (const Discovery& d : found) {
            if (!oracle::active(g.board(), d.feature, s, m))
                continue;
            ++fired;
            const Feature& a = training.art.features[d.first];
            const Feature& b = training.art.features[d.second];
            if (!oracle::active(g.board(), a, s, m) || !oracle::active(g.board(), b, s, m))
                ++violations;
        }
    }
    std::ostringstream d;
    d << found.size() << " features, " << samples << " samples, " << fired << " activations, " << violations
      << " violations";
    return {violations == 0 && fired > 0, d.str()};
}

Outcome pruning_protocol() {
    if (!training.ran)
        return {false, "criterion 7 run unavailable"};
    const Checkpoint& last = training.art.checkpoints.back();
    const std::size_t k = 15;
    if (last.features.size() < k)
        return {false, "final set smaller than k"};
    const PruneResult r = prune(last.features, last.theta, k);

    // Independent selection: the k-th largest |weight| is the threshold, and
    // among equal weights the earliest indices are kept.
    std::vector<double> mags;
    for (double w : last.theta)
        mags.push_back(std::abs(w));
    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double cut = sorted[k - 1];
    std::size_t above = 0;
    for (double m : mags)
        above += m > cut;
    std::vector<Feature> expect;
    std::vector<double> expect_w;
    std::size_t ties_left = k - above;
    for (std::size_t i = 0; i < mags.size(); ++i) {
        if (mags[i] > cut || (mags[i] == cut && ties_left > 0)) {
            if (mags[i] == cut)
                --ties_left;
            expect.push_back(last.features[i]);
            expect_w.push_back(last.theta[i]);
        }
    }
    const bool structural = r.pruned && r.features == FeatureSet(expect) && r.theta == expect_w;

    const std::string dir = fresh_dir("prune");
    TrainConfig c = criterion7_config(dir);
    c.games = 10;
    c.checkpoints = {10};
    c.freeze_features = true;
    c.initial = WeightedFeatures{r.features, r.theta};
    const TrainingArtifacts retrain = run_self_play(c);
    bool constant = retrain.features == r.features && retrain.discoveries.empty();
    for (const GameLog& l : retrain.log)
        constant = constant && l.feature_count == k;
    std::filesystem::remove_all(dir);
    std::ostringstream d;
    d << "pruned " << last.features.size() << " -> " << r.features.size() << " "
      << (structural ? "matching" : "NOT matching") << " the top-15 oracle; frozen retrain over "
      << retrain.log.size() << " games kept " << retrain.features.size() << " features";
    return {structural && constant, d.str()};
}

Outcome serialization() {
    Rng rng(1111);
    std::vector<Game> games;
    for (const auto& [id, text] : builtin_games())
        games.emplace_back(parse_game(text));
    int broken = 0;
    for (int t = 0; t < 100; ++t) {
        const Game& g = games[rng.index(games.size())];
        FeatureSet fs;
        std::vector<double> w;
        const std::size_t n = 1 + rng.index(12);
        for (std::size_t i = 0; i < n; ++i) {
            auto f = normalized(oracle::random_feature(rng, g));
            if (f && fs.append(*f))
                w.push_back((rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.index(16)) - 8));
        }
        const WeightedFeatures back = parse_feature_set(serialize_features(fs, w));
        broken += !(back.features == fs && back.weights == w);
    }
    const WeightedFeatures hand = handcrafted_yavalath();
    const WeightedFeatures hand_back = parse_feature_set(serialize_features(hand.features, hand.weights));
    const bool hand_ok = hand_back.features == hand.features && hand_back.weights == hand.weights;
    std::ostringstream d;
    d << broken << " of 100 random sets changed, handcrafted set " << (hand_ok ? "identical" : "CHANGED");
    return {broken == 0 && hand_ok, d.str()};
}

Outcome wilson_check() {
    const auto [lo, hi] = wilson_interval(100, 200);
    const auto [olo, ohi] = oracle::wilson(100, 200, kWilsonZ95);
    std::ostringstream d;
    d.precision(12);
    d << "(" << lo << ", " << hi << ") vs oracle (" << olo << ", " << ohi << ")";
    return {std::abs(lo - olo) < 1e-9 && std::abs(hi - ohi) < 1e-9, d.str()};
}

} // namespace

int main() {
    run(1, "compiled matcher equals naive matcher", matcher_equivalence);
    run(2, "walk semantics and canonical round trip", walk_semantics);
    run(3, "analytic gradient equals finite differences", gradient_check);
    run(4, "softmax normalization and shift invariance", softmax_contract);
    run(5, "pearson equals two-pass oracle", pearson_oracle);
    run(6, "handcrafted Yavalath biased MCTS beats UCT", handcrafted_beats_uct);
    run(7, "deterministic training with falling cross-entropy", training_smoke);
    run(8, "UCT never loses Tic-Tac-Toe to random as first player", uct_sanity);
    run(9, "combined features imply their constituents", monotonicity);
    run(10, "prune to 15 and frozen retrain", pruning_protocol);
    run(11, "feature file round trip", serialization);
    run(12, "Wilson interval equals oracle", wilson_check);
    if (training.ran)
        std::filesystem::remove_all(training.dir);
    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
