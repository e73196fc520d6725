#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fmcts/features.hpp"
#include "fmcts/game.hpp"
#include "fmcts/policy.hpp"
#include "fmcts/rng.hpp"
#include "fmcts/search.hpp"

namespace fmcts {

/// FIFO store of self-play samples; the oldest tuple goes first once full.
class ExperienceBuffer {
public:
    explicit ExperienceBuffer(std::size_t capacity = 200);

    void push(ExperienceTuple t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }
    const ExperienceTuple& operator[](std::size_t i) const { return items_[i]; }

    /// min(k, size) distinct indices, uniformly at random.
    std::vector<std::size_t> sample(std::size_t k, Rng& rng) const;

private:
    std::size_t capacity_;
    std::deque<ExperienceTuple> items_;
};

enum class DiscoveryStrategy { AddRandom, CombineRandom, CombineMax, CorrelationBased };

std::string strategy_name(DiscoveryStrategy s);
/// Accepts random, combine-random, combine-max, correlation.
std::optional<DiscoveryStrategy> parse_strategy(const std::string& name);

struct TrainConfig {
    std::string game = "tictactoe";
    DiscoveryStrategy strategy = DiscoveryStrategy::CorrelationBased;
    double step_size = 0.05;
    double l2 = 1e-6;
    std::size_t sgd_batch = 20;
    std::size_t discovery_batch = 30;
    std::size_t buffer_capacity = 200;
    SearchBudget budget = SearchBudget::iterations(1000);
    double exploration = kDefaultExploration;
    int games = 200;
    std::uint64_t seed = 0;
    /// Games after which a checkpoint is taken; the last game always is.
    std::vector<int> checkpoints{1, 25, 50, 100, 200};
    /// Keep the starting feature set fixed (no discovery).
    bool freeze_features = false;
    /// Starting features and weights; atomic features with zero weights if unset.
    std::optional<WeightedFeatures> initial;
    /// Directory for checkpoint-<g>.feat and train_log.csv; nothing is written if empty.
    std::string out_dir;
};

/// A discovered feature plus the two features whose instances produced it.
struct Discovery {
    Feature feature;
    std::uint32_t first = 0;
    std::uint32_t second = 0;
    double score = 0.0;
};

struct GameLog {
    int game = 0;
    std::size_t buffer_size = 0;
    std::size_t feature_count = 0;
    double mean_batch_loss = 0.0;
    int moves = 0;
    std::string discovered; ///< empty if nothing was added
};

struct Checkpoint {
    int game = 0;
    FeatureSet features;
    std::vector<double> theta;
};

struct TrainingArtifacts {
    FeatureSet features;
    LinearPolicy policy;
    ExperienceBuffer buffer;
    std::vector<Checkpoint> checkpoints;
    std::vector<Discovery> discoveries;
    std::vector<GameLog> log;
};

/// Sample Pearson correlation; 0 when either side has zero variance.
/// Throws std::invalid_argument on a length mismatch.
double pearson(std::span<const double> u, std::span<const double> v);

/// Score of a candidate pair over a batch: |corr(errors, together)| times
/// (1 - the larger |corr(together, constituent)|). Arguments are per (s, a).
double combination_score(std::span<const double> errors, std::span<const double> together,
                         std::span<const double> first, std::span<const double> second);

/// Proposes one new feature from a batch of buffered samples, or nullopt when
/// no co-active pair yields a compatible feature that is not already present.
std::optional<Discovery> discover_feature(DiscoveryStrategy strategy, const ExperienceBuffer& buffer,
                                          const LinearPolicy& policy, const CompiledFeatureSet& cfs,
                                          std::size_t batch_size, Rng& rng);

struct PruneResult {
    FeatureSet features;
    std::vector<double> theta;
    bool pruned = false; ///< false when the set was already small enough
};

/// Keeps the k features with the largest |weight| (lower index wins ties), in
/// their original order. Warns on `warn` and returns the input when |fs| < k.
PruneResult prune(const FeatureSet& fs, std::span<const double> theta, std::size_t k, std::ostream* warn = nullptr);

TrainingArtifacts run_self_play(const TrainConfig& config, std::ostream* progress = nullptr);

/// Mean cross-entropy against the stored targets over the whole buffer.
double mean_cross_entropy(const FeatureSet& fs, std::span<const double> theta, const BoardGraph& board,
                          const ExperienceBuffer& buffer);

void write_training_log(const std::string& path, std::span<const GameLog> log);

} // namespace fmcts
