#include "fmcts/features.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace fmcts {

// Pattern helpers -------------------------------------------------------------

std::optional<Feature> normalized(Feature f) {
    std::sort(f.pattern.begin(), f.pattern.end());
    f.pattern.erase(std::unique(f.pattern.begin(), f.pattern.end()), f.pattern.end());
    for (std::size_t i = 1; i < f.pattern.size(); ++i)
        if (f.pattern[i].walk == f.pattern[i - 1].walk)
            return std::nullopt;
    return f;
}

std::string element_to_string(const Element& e) {
    switch (e.kind) {
    case ElementKind::OffBoard:
        return "off";
    case ElementKind::Empty:
        return "empty";
    case ElementKind::Friendly:
        return "friend";
    case ElementKind::Enemy:
        return "enemy";
    case ElementKind::OwnedBy:
        return "own" + std::to_string(e.index);
    case ElementKind::ItemIndex:
        return "item" + std::to_string(e.index);
    }
    return "?";
}

std::string feature_to_string(const Feature& f) {
    std::string out = "from=" + (f.from ? walk_to_string(*f.from) : std::string("-"));
    out += " to=" + walk_to_string(f.to) + " pat=";
    for (std::size_t i = 0; i < f.pattern.size(); ++i) {
        if (i)
            out += ',';
        out += element_to_string(f.pattern[i].element) + "@" + walk_to_string(f.pattern[i].walk);
    }
    return out;
}

// FeatureSet -------------------------------------------------------------------

FeatureSet::FeatureSet(std::vector<Feature> features) {
    for (const Feature& f : features)
        if (!append(f))
            throw std::invalid_argument("duplicate or inconsistent feature: " + feature_to_string(f));
}

bool FeatureSet::contains(const Feature& f) const {
    return std::find(features_.begin(), features_.end(), f) != features_.end();
}

bool FeatureSet::append(const Feature& f) {
    auto n = normalized(f);
    if (!n)
        throw std::invalid_argument("inconsistent feature: " + feature_to_string(f));
    if (contains(*n))
        return false;
    features_.push_back(std::move(*n));
    return true;
}

// Matching ---------------------------------------------------------------------

bool test_holds(const GameState& s, PlayerId mover, ResolvedPosition pos, const Element& e) {
    if (e.kind == ElementKind::OffBoard)
        return pos == kOffBoard;
    if (pos == kOffBoard)
        return false;
    const int c = s.cells[pos];
    switch (e.kind) {
    case ElementKind::Empty:
        return c == 0;
    case ElementKind::Friendly:
        return c == mover;
    case ElementKind::Enemy:
        return c == opponent(mover);
    case ElementKind::OwnedBy:
        return c == e.index;
    case ElementKind::ItemIndex:
        // One piece type per player: every piece has item index 0.
        return c != 0 && e.index == 0;
    case ElementKind::OffBoard:
        break;
    }
    return false;
}

namespace {

bool compatible(const Element& a, const Element& b) {
    if (a == b)
        return true;
    if (a.kind == ElementKind::OffBoard || b.kind == ElementKind::OffBoard)
        return false;
    if (a.kind == ElementKind::Empty || b.kind == ElementKind::Empty)
        return false;
    auto pair_is = [&](ElementKind x, ElementKind y) {
        return (a.kind == x && b.kind == y) || (a.kind == y && b.kind == x);
    };
    if (pair_is(ElementKind::Friendly, ElementKind::Enemy))
        return false;
    if (a.kind == ElementKind::OwnedBy && b.kind == ElementKind::OwnedBy)
        return false;
    return true;
}

} // namespace

std::vector<FeatureInstance> ground_feature(const BoardGraph& g, const Feature& f, std::uint32_t id, VertexId anchor,
                                            Turn rotation, bool reflect) {
    // Slot 0 is the from-walk (if any), slot 1 the to-walk, then one per requirement.
    std::vector<std::vector<ResolvedPosition>> options;
    options.push_back(f.from ? resolve_walk(g, anchor, rotation, reflect, *f.from)
                             : std::vector<ResolvedPosition>{kOffBoard});
    options.push_back(resolve_walk(g, anchor, rotation, reflect, f.to));
    for (const Requirement& r : f.pattern)
        options.push_back(resolve_walk(g, anchor, rotation, reflect, r.walk));

    std::vector<FeatureInstance> out;
    std::vector<std::size_t> pick(options.size(), 0);
    for (;;) {
        FeatureInstance inst;
        inst.feature = id;
        inst.anchor = anchor;
        inst.rotation = rotation;
        inst.reflect = reflect;
        inst.from = options[0][pick[0]];
        inst.to = options[1][pick[1]];
        bool viable = inst.to != kOffBoard && (!f.from || inst.from != kOffBoard);
        for (std::size_t r = 0; viable && r < f.pattern.size(); ++r) {
            const ResolvedPosition pos = options[r + 2][pick[r + 2]];
            const Element& e = f.pattern[r].element;
            if ((pos == kOffBoard) != (e.kind == ElementKind::OffBoard))
                viable = false;
            inst.tests.push_back({pos, e, static_cast<int>(r)});
        }
        if (viable) {
            std::sort(inst.tests.begin(), inst.tests.end(), [](const ResolvedTest& a, const ResolvedTest& b) {
                return std::tie(a.pos, a.element, a.requirement) < std::tie(b.pos, b.element, b.requirement);
            });
            std::vector<ResolvedTest> unique;
            for (const ResolvedTest& t : inst.tests) {
                if (!unique.empty() && unique.back().pos == t.pos) {
                    if (unique.back().element == t.element)
                        continue;
                    if (!compatible(unique.back().element, t.element)) {
                        viable = false;
                        break;
                    }
                }
                unique.push_back(t);
            }
            inst.tests = std::move(unique);
        }
        if (viable)
            out.push_back(std::move(inst));

        std::size_t k = 0;
        while (k < pick.size() && ++pick[k] == options[k].size())
            pick[k++] = 0;
        if (k == pick.size())
            break;
    }
    return out;
}

CompiledFeatureSet::CompiledFeatureSet(FeatureSet features, const BoardGraph& board)
    : features_(std::move(features)), board_(board) {
    using TestKey = std::vector<std::pair<ResolvedPosition, Element>>;
    std::map<std::tuple<std::uint32_t, VertexId, VertexId, TestKey>, std::uint32_t> seen;
    const int k = board_.max_slot_count();
    for (std::uint32_t id = 0; id < features_.size(); ++id) {
        for (VertexId anchor = 0; anchor < board_.vertex_count(); ++anchor) {
            for (int rot = 0; rot < k; ++rot) {
                for (bool reflect : {false, true}) {
                    for (FeatureInstance& inst : ground_feature(board_, features_[id], id, anchor, Turn(rot, k), reflect)) {
                        TestKey tk;
                        for (const ResolvedTest& t : inst.tests)
                            tk.emplace_back(t.pos, t.element);
                        auto [it, fresh] = seen.try_emplace({id, inst.from, inst.to, std::move(tk)},
                                                            static_cast<std::uint32_t>(instances_.size()));
                        if (fresh)
                            instances_.push_back(std::move(inst));
                    }
                }
            }
        }
    }

    const std::size_t keys = static_cast<std::size_t>(board_.vertex_count() + 1) * board_.vertex_count();
    bucket_start_.assign(keys + 1, 0);
    for (const FeatureInstance& inst : instances_)
        ++bucket_start_[key(inst.from, inst.to) + 1];
    for (std::size_t i = 0; i < keys; ++i)
        bucket_start_[i + 1] += bucket_start_[i];
    bucket_items_.resize(instances_.size());
    std::vector<std::uint32_t> fill(bucket_start_.begin(), bucket_start_.end() - 1);
    for (std::uint32_t i = 0; i < instances_.size(); ++i)
        bucket_items_[fill[key(instances_[i].from, instances_[i].to)]++] = i;
}

std::span<const std::uint32_t> CompiledFeatureSet::bucket(VertexId from, VertexId to) const {
    const std::size_t k = key(from, to);
    return {bucket_items_.data() + bucket_start_[k], bucket_start_[k + 1] - bucket_start_[k]};
}

void CompiledFeatureSet::active_instances(const GameState& s, Move m, std::vector<std::uint32_t>& out) const {
    out.clear();
    auto scan = [&](std::span<const std::uint32_t> ids) {
        for (std::uint32_t id : ids) {
            const FeatureInstance& inst = instances_[id];
            bool ok = true;
            for (const ResolvedTest& t : inst.tests) {
                if (!test_holds(s, s.mover, t.pos, t.element)) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                out.push_back(id);
        }
    };
    // Features without a from-walk match any move that ends on their target.
    scan(bucket(kOffBoard, m.to));
    if (m.has_from())
        scan(bucket(m.from, m.to));
}

std::vector<std::uint32_t> CompiledFeatureSet::active_instances(const GameState& s, Move m) const {
    std::vector<std::uint32_t> out;
    active_instances(s, m, out);
    return out;
}

void CompiledFeatureSet::feature_vector(const GameState& s, Move m, SparseVector& out) const {
    // Scratch buffer reused across calls on the same thread.
    thread_local std::vector<std::uint32_t> active;
    active_instances(s, m, active);
    out.clear();
    for (std::uint32_t id : active)
        out.push_back(instances_[id].feature);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

SparseVector CompiledFeatureSet::feature_vector(const GameState& s, Move m) const {
    SparseVector out;
    feature_vector(s, m, out);
    return out;
}

// Atomic features --------------------------------------------------------------

FeatureSet generate_atomic_features(const Game& game) {
    const int k = game.board().max_slot_count();
    std::vector<Walk> walks{Walk{}, Walk{Turn{}}};
    for (int i = 0; i < k; ++i)
        walks.push_back(Walk{Turn{}, Turn(i, k)});
    const Element elements[] = {{ElementKind::Empty, 0},
                                {ElementKind::Friendly, 0},
                                {ElementKind::Enemy, 0},
                                {ElementKind::OffBoard, 0}};

    FeatureSet out;
    const std::vector<Feature> protos = game.proto_features();
    for (const Feature& p : protos)
        out.append(p);
    for (const Feature& p : protos) {
        for (const Walk& w : walks) {
            for (const Element& e : elements) {
                Feature f = p;
                f.pattern.push_back({w, e});
                if (auto n = normalized(std::move(f)))
                    out.append(*n);
            }
        }
    }
    return out;
}

// Combination ------------------------------------------------------------------

Walk to_base_frame(const Walk& w, Turn rotation, bool reflect) {
    Walk out = w;
    for (Turn& t : out)
        if (reflect)
            t = t.negated();
    if (!out.empty())
        out[0] = rotation + out[0];
    return out;
}

Walk from_base_frame(const Walk& w, Turn rotation, bool reflect) {
    Walk out = w;
    if (!out.empty())
        out[0] = out[0] - rotation;
    for (Turn& t : out)
        if (reflect)
            t = t.negated();
    return out;
}

std::optional<Feature> combine_instances(const CompiledFeatureSet& cfs, const FeatureInstance& i,
                                         const FeatureInstance& j) {
    const BoardGraph& g = cfs.board();
    const Feature& fi = cfs.features()[i.feature];
    const Feature& fj = cfs.features()[j.feature];
    if (i.to != j.to || i.from != j.from)
        return std::nullopt;

    // Route from i's anchor to j's anchor, in the base frame.
    Walk bridge;
    Turn arrival = Turn{};
    if (i.anchor != j.anchor) {
        auto w = canonical_walk(g, i.anchor, j.anchor);
        if (!w)
            return std::nullopt;
        bridge = *w;
        bool found = false;
        for (const WalkEnd& e : trace_walk(g, i.anchor, Turn{}, false, bridge)) {
            if (e.pos == j.anchor) {
                arrival = Turn(e.dir, g.slot_count(j.anchor));
                found = true;
                break;
            }
        }
        if (!found)
            return std::nullopt;
    }

    // j's walk re-read from i's frame: the bridge, then j's walk with its first
    // turn taken relative to the direction faced on arrival.
    auto translate = [&](const Walk& w) {
        Walk tail = to_base_frame(w, j.rotation, j.reflect);
        Walk base = bridge;
        if (!tail.empty()) {
            base.push_back(tail[0] - arrival);
            base.insert(base.end(), tail.begin() + 1, tail.end());
        }
        return from_base_frame(base, i.rotation, i.reflect);
    };

    Feature merged = fi;
    for (const Requirement& r : fj.pattern)
        merged.pattern.push_back({translate(r.walk), r.element});
    auto result = normalized(std::move(merged));
    if (!result)
        return std::nullopt;

    // The merged pattern must reproduce j's tests when grounded where i was.
    for (const ResolvedTest& t : j.tests) {
        const auto hits =
            resolve_walk(g, i.anchor, i.rotation, i.reflect, translate(fj.pattern[t.requirement].walk));
        if (!std::binary_search(hits.begin(), hits.end(), t.pos))
            return std::nullopt;
    }
    return result;
}

} // namespace fmcts
