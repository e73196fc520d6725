#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fmcts/board_graph.hpp"
#include "fmcts/game.hpp"
#include "fmcts/pattern.hpp"

namespace fmcts {

/// Ascending indices of active features; every listed feature has value 1.
using SparseVector = std::vector<std::uint32_t>;

/// Ordered, duplicate-free list of features. Indices are stable: features are
/// only appended (or the whole set rebuilt by pruning).
class FeatureSet {
public:
    FeatureSet() = default;
    explicit FeatureSet(std::vector<Feature> features);

    std::size_t size() const { return features_.size(); }
    bool empty() const { return features_.empty(); }
    const Feature& operator[](std::size_t i) const { return features_[i]; }
    const std::vector<Feature>& features() const { return features_; }

    bool contains(const Feature& f) const;
    /// Appends a normalized feature; returns false (and leaves the set
    /// unchanged) if it is already present.
    bool append(const Feature& f);

    friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

private:
    std::vector<Feature> features_;
};

/// Element test of a grounded pattern. `requirement` indexes the pattern of
/// the instance's feature.
struct ResolvedTest {
    ResolvedPosition pos = kOffBoard;
    Element element;
    int requirement = 0;
};

/// A feature grounded at one (anchor, rotation, reflection).
struct FeatureInstance {
    std::uint32_t feature = 0;
    VertexId anchor = 0;
    Turn rotation;
    bool reflect = false;
    ResolvedPosition from = kOffBoard; ///< kOffBoard when the feature has no from-walk
    VertexId to = kOffBoard;
    std::vector<ResolvedTest> tests; ///< sorted by position
};

/// True when `pos` holds `element` in state `s`, seen from `mover`.
bool test_holds(const GameState& s, PlayerId mover, ResolvedPosition pos, const Element& element);

/// Feature set grounded on one board, indexed by action for fast lookup.
class CompiledFeatureSet {
public:
    CompiledFeatureSet() = default;
    CompiledFeatureSet(FeatureSet features, const BoardGraph& board);

    const FeatureSet& features() const { return features_; }
    const BoardGraph& board() const { return board_; }
    const std::vector<FeatureInstance>& instances() const { return instances_; }

    /// Instances whose action is exactly (from, to); from may be kOffBoard.
    std::span<const std::uint32_t> bucket(VertexId from, VertexId to) const;

    /// Indices of instances matching move `m` whose tests all hold in `s`.
    void active_instances(const GameState& s, Move m, std::vector<std::uint32_t>& out) const;
    std::vector<std::uint32_t> active_instances(const GameState& s, Move m) const;

    SparseVector feature_vector(const GameState& s, Move m) const;
    void feature_vector(const GameState& s, Move m, SparseVector& out) const;

private:
    std::size_t key(VertexId from, VertexId to) const {
        return static_cast<std::size_t>(from + 1) * static_cast<std::size_t>(board_.vertex_count()) +
               static_cast<std::size_t>(to);
    }

    FeatureSet features_;
    BoardGraph board_ = BoardGraph::square(1, 1);
    std::vector<FeatureInstance> instances_;
    std::vector<std::uint32_t> bucket_start_;
    std::vector<std::uint32_t> bucket_items_;
};

/// Groundings of `feature` at one (anchor, rotation, reflect). Fractional
/// turns can yield several; groundings whose action leaves the board, or
/// whose tests can never hold together, are dropped.
std::vector<FeatureInstance> ground_feature(const BoardGraph& g, const Feature& feature, std::uint32_t id,
                                            VertexId anchor, Turn rotation, bool reflect);

/// Proto-features plus every single extra requirement on walks of at most two
/// steps (first turn fixed to 0) for the elements empty/friend/enemy/off.
FeatureSet generate_atomic_features(const Game& game);

/// Merges instance j's pattern into instance i's frame. nullopt means the two
/// are incompatible.
std::optional<Feature> combine_instances(const CompiledFeatureSet& cfs, const FeatureInstance& i,
                                         const FeatureInstance& j);

/// Re-expresses `w`, read under (rotation, reflect), as the walk that reaches
/// the same positions under rotation 0 without reflection.
Walk to_base_frame(const Walk& w, Turn rotation, bool reflect);
/// Inverse of to_base_frame.
Walk from_base_frame(const Walk& w, Turn rotation, bool reflect);

// Feature files (.feat) -------------------------------------------------------

class FeatureFileError : public std::runtime_error {
public:
    FeatureFileError(int line, int column, const std::string& what);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct WeightedFeatures {
    FeatureSet features;
    std::vector<double> weights;
};

std::string serialize_features(const FeatureSet& fs, std::span<const double> weights);
WeightedFeatures parse_feature_set(std::string_view text);

WeightedFeatures read_feature_file(const std::string& path);
void write_feature_file(const std::string& path, const FeatureSet& fs, std::span<const double> weights);

/// The three hand-made Yavalath features: immediate win (+3000) and the two
/// immediate-loss shapes (-1000 each).
WeightedFeatures handcrafted_yavalath();

/// ASCII picture of `f` grounded near the middle of `board`.
std::string render_feature(const Feature& f, const BoardGraph& board);

} // namespace fmcts
