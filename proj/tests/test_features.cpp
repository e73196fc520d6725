#include <doctest.h>

#include <set>

#include "fmcts/features.hpp"
#include "oracles.hpp"

using namespace fmcts;

namespace {

Game game_of(const std::string& id) { return Game(load_game_rules(id)); }

const Element kEmpty{ElementKind::Empty, 0};
const Element kFriend{ElementKind::Friendly, 0};
const Element kEnemy{ElementKind::Enemy, 0};
const Element kOff{ElementKind::OffBoard, 0};

Feature placement(std::vector<Requirement> pattern) {
    Feature f;
    f.pattern = std::move(pattern);
    return *normalized(f);
}

} // namespace

TEST_CASE("normalization sorts, dedups and rejects conflicts") {
    Feature f;
    f.pattern = {{{Turn{}, Turn{}}, kFriend}, {{}, kEmpty}, {{Turn{}}, kEnemy}, {{}, kEmpty}};
    const auto n = normalized(f);
    REQUIRE(n);
    REQUIRE(n->pattern.size() == 3);
    CHECK(n->pattern[0].walk.empty());
    CHECK(n->pattern[1].walk.size() == 1);
    CHECK(n->pattern[2].walk.size() == 2);

    Feature bad;
    bad.pattern = {{{Turn{}}, kEnemy}, {{Turn{}}, kFriend}};
    CHECK_FALSE(normalized(bad));

    FeatureSet fs;
    CHECK(fs.append(f));
    CHECK_FALSE(fs.append(*n));
    CHECK(fs.size() == 1);
    CHECK_THROWS_AS(fs.append(bad), std::invalid_argument);
    CHECK_THROWS_AS(FeatureSet({f, f}), std::invalid_argument);
}

TEST_CASE("atomic features for Tic-Tac-Toe") {
    const FeatureSet fs = generate_atomic_features(game_of("tictactoe"));
    // Proto + 9 non-anchor walks x 4 elements; anchor atoms other than Empty
    // conflict with the proto, and Empty at the anchor duplicates it.
    CHECK(fs.size() == 37);
    CHECK(fs.contains(placement({{{}, kEmpty}, {{Turn{}}, kEnemy}})));
    for (const Feature& f : fs.features())
        for (const Requirement& r : f.pattern)
            if (r.walk.empty())
                CHECK(r.element == kEmpty);
}

TEST_CASE("grounding examples") {
    const Game g = game_of("tictactoe");
    const BoardGraph& b = g.board();

    // The always-active feature collapses to one instance per target cell.
    Feature always;
    const CompiledFeatureSet all(FeatureSet({always}), b);
    CHECK(all.instances().size() == 9);

    // Enemy one step away, seen from the centre: one instance per direction.
    const Feature enemy = placement({{{Turn{}}, kEnemy}});
    const CompiledFeatureSet cfs(FeatureSet({enemy}), b);
    const VertexId centre = *b.at({1, 1});
    std::set<std::vector<std::pair<ResolvedPosition, Element>>> distinct;
    for (const FeatureInstance& inst : cfs.instances()) {
        CHECK(inst.to != kOffBoard);
        if (inst.anchor != centre)
            continue;
        std::vector<std::pair<ResolvedPosition, Element>> key;
        for (const ResolvedTest& t : inst.tests)
            key.emplace_back(t.pos, t.element);
        distinct.insert(key);
    }
    CHECK(distinct.size() == 8);

    // No pieces on an empty board, so the enemy feature never fires.
    const GameState s0 = g.initial_state();
    for (const Move& m : g.legal_moves(s0))
        CHECK(cfs.feature_vector(s0, m).empty());

    const CompiledFeatureSet none(FeatureSet{}, b);
    CHECK(none.feature_vector(s0, g.legal_moves(s0)[0]).empty());
}

TEST_CASE("two groundings of one feature give a single entry") {
    const Game g = game_of("tictactoe");
    const Feature enemy = placement({{{Turn{}}, kEnemy}});
    const CompiledFeatureSet cfs(FeatureSet({enemy}), g.board());
    const BoardGraph& b = g.board();
    GameState s = g.initial_state();
    s = g.apply(s, {kOffBoard, *b.at({0, 0})});
    s = g.apply(s, {kOffBoard, *b.at({1, 1})});
    s = g.apply(s, {kOffBoard, *b.at({2, 2})});
    s = g.apply(s, {kOffBoard, *b.at({0, 2})});
    // Player 1 to move; (0,1) has enemy neighbours at (1,1) and (0,2).
    const Move m{kOffBoard, *b.at({0, 1})};
    CHECK(cfs.active_instances(s, m).size() >= 2);
    CHECK(cfs.feature_vector(s, m) == SparseVector{0});
}

TEST_CASE("compiled matcher agrees with the naive matcher") {
    Rng rng(21);
    for (const std::string id : {"tictactoe", "hex5", "yavalath", "breakthrough6"}) {
        CAPTURE(id);
        const Game g = game_of(id);
        FeatureSet fs = generate_atomic_features(g);
        for (int i = 0; i < 15; ++i) {
            auto f = normalized(oracle::random_feature(rng, g));
            if (f)
                fs.append(*f);
        }
        const CompiledFeatureSet cfs(fs, g.board());
        for (int t = 0; t < 60; ++t) {
            const GameState s = oracle::random_state(g, rng, 30);
            if (s.terminal())
                continue;
            const auto moves = g.legal_moves(s);
            const Move m = moves[rng.index(moves.size())];
            const SparseVector phi = cfs.feature_vector(s, m);
            CHECK(phi == oracle::feature_vector(g.board(), fs, s, m));
            CHECK(std::is_sorted(phi.begin(), phi.end()));
        }
    }
}

TEST_CASE("handcrafted Yavalath win feature fires exactly on winning moves") {
    const Game g = game_of("yavalath");
    const WeightedFeatures hand = handcrafted_yavalath();
    REQUIRE(hand.features.size() == 3);
    CHECK(hand.weights == std::vector<double>{3000, -1000, -1000});
    const CompiledFeatureSet cfs(hand.features, g.board());
    Rng rng(31);
    int checked = 0;
    for (int t = 0; t < 300; ++t) {
        const GameState s = oracle::random_state(g, rng, 30);
        if (s.terminal())
            continue;
        for (const Move& m : g.legal_moves(s)) {
            // "oo_o": three friendly stones on one line with the gap at the move.
            const Coord c = g.board().coord(m.to);
            bool pattern = false;
            for (Coord d : oracle::directions(g.board())) {
                auto at = [&](int k) {
                    auto v = g.board().at({c.x + k * d.x, c.y + k * d.y});
                    return v && s.cells[*v] == s.mover;
                };
                pattern |= at(1) && at(2) && at(-1);
            }
            const SparseVector phi = cfs.feature_vector(s, m);
            CHECK((std::find(phi.begin(), phi.end(), 0u) != phi.end()) == pattern);
            ++checked;
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("frame conversions are inverse") {
    Rng rng(2);
    for (int t = 0; t < 500; ++t) {
        const Walk w = oracle::random_walk(rng, 4, 8);
        const Turn rot(static_cast<std::int64_t>(rng.index(8)), 8);
        const bool refl = rng.index(2) == 1;
        CHECK(from_base_frame(to_base_frame(w, rot, refl), rot, refl) == w);
        CHECK(to_base_frame(from_base_frame(w, rot, refl), rot, refl) == w);
    }
    // A walk read under (rotation, reflect) reaches the same cells as its
    // base-frame version read plainly.
    const BoardGraph b = BoardGraph::square(6, 6);
    for (int t = 0; t < 300; ++t) {
        const Walk w = oracle::random_walk(rng, 3, 8);
        const Turn rot(static_cast<std::int64_t>(rng.index(8)), 8);
        const bool refl = rng.index(2) == 1;
        const VertexId a = static_cast<VertexId>(rng.index(b.vertex_count()));
        CHECK(resolve_walk(b, a, rot, refl, w) == resolve_walk(b, a, Turn{}, false, to_base_frame(w, rot, refl)));
    }
}

TEST_CASE("combination examples") {
    const Game g = game_of("tictactoe");
    const FeatureSet atoms = generate_atomic_features(g);
    const CompiledFeatureSet cfs(atoms, g.board());
    const auto& inst = cfs.instances();
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        const FeatureInstance& i = inst[rng.index(inst.size())];
        const auto self = combine_instances(cfs, i, i);
        REQUIRE(self);
        CHECK(*self == atoms[i.feature]);
    }

    // Proto (empty anchor) merged with "enemy one step ahead" at the same grounding.
    const Feature enemy = placement({{{}, kEmpty}, {{Turn{}}, kEnemy}});
    const auto enemy_id = static_cast<std::uint32_t>(
        std::find(atoms.features().begin(), atoms.features().end(), enemy) - atoms.features().begin());
    REQUIRE(enemy_id < atoms.size());
    const VertexId centre = *g.board().at({1, 1});
    const FeatureInstance* proto = nullptr;
    const FeatureInstance* with_enemy = nullptr;
    for (const FeatureInstance& x : inst) {
        if (x.anchor != centre || x.rotation != Turn{} || x.reflect)
            continue;
        if (x.feature == 0)
            proto = &x;
        if (x.feature == enemy_id)
            with_enemy = &x;
    }
    REQUIRE(proto);
    REQUIRE(with_enemy);
    const auto merged = combine_instances(cfs, *proto, *with_enemy);
    REQUIRE(merged);
    CHECK(merged->pattern.size() == 2);
    CHECK(*merged == enemy);
}

TEST_CASE("combined features imply their constituents") {
    Rng rng(17);
    for (const std::string id : {"tictactoe", "yavalath", "breakthrough6"}) {
        CAPTURE(id);
        const Game g = game_of(id);
        const FeatureSet atoms = generate_atomic_features(g);
        const CompiledFeatureSet cfs(atoms, g.board());
        int combined = 0;
        for (int t = 0; t < 200 && combined < 25; ++t) {
            const GameState s = oracle::random_state(g, rng, 20);
            if (s.terminal())
                continue;
            const auto moves = g.legal_moves(s);
            const Move m = moves[rng.index(moves.size())];
            const auto act = cfs.active_instances(s, m);
            if (act.size() < 2)
                continue;
            const auto& i = cfs.instances()[act[rng.index(act.size())]];
            const auto& j = cfs.instances()[act[rng.index(act.size())]];
            const auto f = combine_instances(cfs, i, j);
            if (!f || atoms.contains(*f))
                continue;
            ++combined;
            FeatureSet trio({atoms[i.feature]});
            trio.append(atoms[j.feature]);
            const std::size_t merged_id = trio.size();
            trio.append(*f);
            const CompiledFeatureSet tc(trio, g.board());
            // Active where the pair was found.
            const SparseVector here = tc.feature_vector(s, m);
            CHECK(std::binary_search(here.begin(), here.end(), static_cast<std::uint32_t>(merged_id)));
            for (int u = 0; u < 40; ++u) {
                const GameState s2 = oracle::random_state(g, rng, 25);
                if (s2.terminal())
                    continue;
                for (const Move& m2 : g.legal_moves(s2)) {
                    const SparseVector phi = tc.feature_vector(s2, m2);
                    if (std::binary_search(phi.begin(), phi.end(), static_cast<std::uint32_t>(merged_id))) {
                        CHECK(std::binary_search(phi.begin(), phi.end(), 0u));
                        if (trio.size() == 3)
                            CHECK(std::binary_search(phi.begin(), phi.end(), 1u));
                    }
                }
            }
        }
        CHECK(combined > 0);
    }
}

TEST_CASE("feature files round-trip") {
    const WeightedFeatures hand = handcrafted_yavalath();
    const std::string text = serialize_features(hand.features, hand.weights);
    CHECK(text.substr(0, text.find('\n')) == "w=3000\tfrom=-\tto=[]\tpat=friend@[0],friend@[1/2],friend@[0;0]");
    const WeightedFeatures back = parse_feature_set(text);
    CHECK(back.features == hand.features);
    CHECK(back.weights == hand.weights);

    CHECK(serialize_features(FeatureSet{}, {}).empty());
    CHECK(parse_feature_set("").features.empty());

    Rng rng(8);
    const Game bt = game_of("breakthrough6");
    for (int t = 0; t < 100; ++t) {
        FeatureSet fs;
        std::vector<double> w;
        const std::size_t n = rng.index(8);
        for (std::size_t i = 0; i < n; ++i) {
            auto f = normalized(oracle::random_feature(rng, bt));
            if (f && fs.append(*f))
                w.push_back((rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.index(12)) - 6));
        }
        const WeightedFeatures parsed = parse_feature_set(serialize_features(fs, w));
        CHECK(parsed.features == fs);
        CHECK(parsed.weights == w);
    }
}

TEST_CASE("feature file errors point at the problem") {
    auto location = [](const std::string& text) {
        try {
            parse_feature_set(text);
        } catch (const FeatureFileError& e) {
            return std::pair<int, int>{e.line(), e.column()};
        }
        return std::pair<int, int>{0, 0};
    };
    CHECK(location("w=1\tfrom=-\tto=[]\tpat=empty@[]\nw=oops\tfrom=-\tto=[]\tpat=\n").first == 2);
    CHECK(location("w=1\tfrom=-\tto=[]\tpat=bogus@[]\n").first == 1);
    CHECK(location("w=1\tfrom=-\tto=[]\tpat=empty@[0],enemy@[0]\n").first == 1);
    CHECK(location("w=1\tfrom=-\tto=[]\tpat=empty@[]\nw=2\tfrom=-\tto=[]\tpat=empty@[]\n").first == 2);
    CHECK(location("w=1\tfrom=-\tto=[1/x]\tpat=\n").second > 1);
    // Comments and blank lines are skipped.
    CHECK(parse_feature_set("# note\n\nw=1\tfrom=-\tto=[]\tpat=empty@[]\r\n").features.size() == 1);
}

TEST_CASE("rendering") {
    const Game g = game_of("yavalath");
    const std::string pic = render_feature(handcrafted_yavalath().features[0], g.board());
    CHECK(std::count(pic.begin(), pic.end(), 'o') == 3);
    CHECK(std::count(pic.begin(), pic.end(), '+') == 1);
    const Game bt = game_of("breakthrough6");
    for (const Feature& f : bt.proto_features())
        CHECK(render_feature(f, bt.board()).find('+') != std::string::npos);
}
