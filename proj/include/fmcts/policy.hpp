#pragma once

#include <span>
#include <vector>

#include "fmcts/features.hpp"
#include "fmcts/game.hpp"

namespace fmcts {

/// One self-play sample: a state, its legal moves, and the expert's
/// distribution over them.
struct ExperienceTuple {
    GameState state;
    std::vector<Move> moves;
    std::vector<double> pi;
};

/// A state's legal moves with their apprentice probabilities.
struct ActionDistribution {
    std::vector<Move> moves;
    std::vector<double> probabilities;
};

/// Linear softmax policy over a feature set; theta[i] weighs feature i.
struct LinearPolicy {
    std::vector<double> theta;
    double step_size = 0.05;
    double l2 = 1e-6;

    /// New features start at weight 0, leaving every distribution unchanged.
    void append_feature() { theta.push_back(0.0); }
};

/// Feature vectors for every legal move of one sample, plus its target.
struct FeatureSample {
    std::vector<SparseVector> phis;
    std::vector<double> pi;
};

double logit(std::span<const double> theta, const SparseVector& phi);

/// Numerically stable softmax. Throws std::invalid_argument on empty input.
std::vector<double> softmax(std::span<const double> logits);

ActionDistribution distribution(const LinearPolicy& policy, const CompiledFeatureSet& cfs, const GameState& s,
                                std::span<const Move> legal);

FeatureSample feature_sample(const CompiledFeatureSet& cfs, const ExperienceTuple& t);

/// -pi . log p for one sample (no regularisation).
double cross_entropy(std::span<const double> theta, const FeatureSample& sample);

/// Sum over moves of (p - pi) * phi for one sample, dense over theta.
std::vector<double> cross_entropy_gradient(std::span<const double> theta, const FeatureSample& sample);

/// Mean data gradient over a batch.
std::vector<double> batch_gradient(std::span<const double> theta, std::span<const FeatureSample> batch);

/// Cross-entropy plus (l2 / 2) * ||theta||^2 for one experience tuple.
double loss(const LinearPolicy& policy, const ExperienceTuple& sample, const CompiledFeatureSet& cfs);

/// One SGD step on the batch-mean cross-entropy gradient, with a single L2
/// decay of step_size * l2 * theta per update.
LinearPolicy sgd_update(LinearPolicy policy, std::span<const ExperienceTuple> batch, const CompiledFeatureSet& cfs);
LinearPolicy sgd_update(LinearPolicy policy, std::span<const FeatureSample> batch);

} // namespace fmcts
