#include "fmcts/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fmcts {

namespace {

void check_target(std::span<const double> pi, std::size_t moves) {
    if (pi.size() != moves)
        throw std::invalid_argument("target distribution length does not match the legal moves");
    const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-6)
        throw std::invalid_argument("target distribution does not sum to 1");
}

std::vector<double> logits_of(std::span<const double> theta, const FeatureSample& sample) {
    std::vector<double> out;
    out.reserve(sample.phis.size());
    for (const SparseVector& phi : sample.phis)
        out.push_back(logit(theta, phi));
    return out;
}

} // namespace

double logit(std::span<const double> theta, const SparseVector& phi) {
    double sum = 0.0;
    for (std::uint32_t i : phi) {
        if (i >= theta.size())
            throw std::out_of_range("feature index " + std::to_string(i) + " beyond weight vector of size " +
                                    std::to_string(theta.size()));
        sum += theta[i];
    }
    return sum;
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty())
        throw std::invalid_argument("softmax of an empty vector");
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i)
        total += out[i] = std::exp(logits[i] - top);
    for (double& v : out)
        v /= total;
    return out;
}

ActionDistribution distribution(const LinearPolicy& policy, const CompiledFeatureSet& cfs, const GameState& s,
                                std::span<const Move> legal) {
    if (legal.empty())
        throw std::invalid_argument("distribution over an empty move list");
    std::vector<double> logits;
    logits.reserve(legal.size());
    thread_local SparseVector phi;
    for (const Move& m : legal) {
        cfs.feature_vector(s, m, phi);
        logits.push_back(logit(policy.theta, phi));
    }
    return {std::vector<Move>(legal.begin(), legal.end()), softmax(logits)};
}

FeatureSample feature_sample(const CompiledFeatureSet& cfs, const ExperienceTuple& t) {
    FeatureSample out;
    out.phis.reserve(t.moves.size());
    for (const Move& m : t.moves)
        out.phis.push_back(cfs.feature_vector(t.state, m));
    out.pi = t.pi;
    return out;
}

double cross_entropy(std::span<const double> theta, const FeatureSample& sample) {
    check_target(sample.pi, sample.phis.size());
    const std::vector<double> p = softmax(logits_of(theta, sample));
    double ce = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a)
        if (sample.pi[a] > 0.0)
            ce -= sample.pi[a] * std::log(p[a]);
    return ce;
}

std::vector<double> cross_entropy_gradient(std::span<const double> theta, const FeatureSample& sample) {
    check_target(sample.pi, sample.phis.size());
    const std::vector<double> p = softmax(logits_of(theta, sample));
    std::vector<double> grad(theta.size(), 0.0);
    for (std::size_t a = 0; a < p.size(); ++a) {
        const double err = p[a] - sample.pi[a];
        for (std::uint32_t i : sample.phis[a])
            grad[i] += err;
    }
    return grad;
}

std::vector<double> batch_gradient(std::span<const double> theta, std::span<const FeatureSample> batch) {
    if (batch.empty())
        throw std::invalid_argument("gradient of an empty batch");
    std::vector<double> grad(theta.size(), 0.0);
    for (const FeatureSample& s : batch) {
        const std::vector<double> g = cross_entropy_gradient(theta, s);
        for (std::size_t i = 0; i < grad.size(); ++i)
            grad[i] += g[i];
    }
    for (double& g : grad)
        g /= static_cast<double>(batch.size());
    return grad;
}

double loss(const LinearPolicy& policy, const ExperienceTuple& sample, const CompiledFeatureSet& cfs) {
    double sq = 0.0;
    for (double w : policy.theta)
        sq += w * w;
    return cross_entropy(policy.theta, feature_sample(cfs, sample)) + 0.5 * policy.l2 * sq;
}

LinearPolicy sgd_update(LinearPolicy policy, std::span<const FeatureSample> batch) {
    const std::vector<double> grad = batch_gradient(policy.theta, batch);
    for (std::size_t i = 0; i < policy.theta.size(); ++i)
        policy.theta[i] -= policy.step_size * grad[i] + policy.step_size * policy.l2 * policy.theta[i];
    return policy;
}

LinearPolicy sgd_update(LinearPolicy policy, std::span<const ExperienceTuple> batch, const CompiledFeatureSet& cfs) {
    if (policy.theta.size() != cfs.features().size())
        throw std::logic_error("weight vector and feature set are out of sync");
    std::vector<FeatureSample> samples;
    samples.reserve(batch.size());
    for (const ExperienceTuple& t : batch)
        samples.push_back(feature_sample(cfs, t));
    return sgd_update(std::move(policy), samples);
}

} // namespace fmcts
