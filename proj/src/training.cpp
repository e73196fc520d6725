#include "fmcts/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "fmcts/game_dsl.hpp"

namespace fmcts {

ExperienceBuffer::ExperienceBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0)
        throw std::invalid_argument("experience buffer capacity must be positive");
}

void ExperienceBuffer::push(ExperienceTuple t) {
    if (t.pi.size() != t.moves.size())
        throw std::invalid_argument("experience tuple has mismatched move and target lengths");
    if (items_.size() == capacity_)
        items_.pop_front();
    items_.push_back(std::move(t));
}

std::vector<std::size_t> ExperienceBuffer::sample(std::size_t k, Rng& rng) const {
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    k = std::min(k, idx.size());
    for (std::size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    idx.resize(k);
    return idx;
}

std::string strategy_name(DiscoveryStrategy s) {
    switch (s) {
    case DiscoveryStrategy::AddRandom:
        return "random";
    case DiscoveryStrategy::CombineRandom:
        return "combine-random";
    case DiscoveryStrategy::CombineMax:
        return "combine-max";
    case DiscoveryStrategy::CorrelationBased:
        return "correlation";
    }
    return "?";
}

std::optional<DiscoveryStrategy> parse_strategy(const std::string& name) {
    for (auto s : {DiscoveryStrategy::AddRandom, DiscoveryStrategy::CombineRandom, DiscoveryStrategy::CombineMax,
                   DiscoveryStrategy::CorrelationBased})
        if (strategy_name(s) == name)
            return s;
    return std::nullopt;
}

double pearson(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = u.size();
    if (n == 0)
        return 0.0;
    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= static_cast<double>(n);
    mv /= static_cast<double>(n);
    double suv = 0.0, suu = 0.0, svv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double du = u[i] - mu, dv = v[i] - mv;
        suv += du * dv;
        suu += du * du;
        svv += dv * dv;
    }
    if (suu <= 0.0 || svv <= 0.0)
        return 0.0;
    return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

double combination_score(std::span<const double> errors, std::span<const double> together,
                         std::span<const double> first, std::span<const double> second) {
    const double r_err = pearson(errors, together);
    const double r_a = pearson(together, first);
    const double r_b = pearson(together, second);
    const double r_const = std::max(std::abs(r_a), std::abs(r_b));
    return std::abs(r_err) * (1.0 - r_const);
}

namespace {

// One (state, move) pair of the discovery batch.
struct Entry {
    double error = 0.0;
    std::vector<std::uint32_t> active; ///< instance indices, ascending
    SparseVector phi;
};

struct PairRef {
    std::uint32_t entry;
    std::uint32_t first;
    std::uint32_t second;
};

class Combiner {
public:
    explicit Combiner(const CompiledFeatureSet& cfs) : cfs_(cfs) {}

    // The new feature from two instances, or nullopt if incompatible or known.
    const std::optional<Feature>& operator()(std::uint32_t a, std::uint32_t b) {
        auto [it, inserted] = memo_.try_emplace({a, b});
        if (inserted) {
            auto f = combine_instances(cfs_, cfs_.instances()[a], cfs_.instances()[b]);
            if (f && !cfs_.features().contains(*f))
                it->second = std::move(f);
        }
        return it->second;
    }

private:
    const CompiledFeatureSet& cfs_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::optional<Feature>> memo_;
};

Discovery make_discovery(const CompiledFeatureSet& cfs, const Feature& f, std::uint32_t a, std::uint32_t b,
                         double score) {
    return {f, cfs.instances()[a].feature, cfs.instances()[b].feature, score};
}

// Tries pairs in uniformly random order until one combines.
std::optional<Discovery> first_random(std::vector<PairRef> pairs, const CompiledFeatureSet& cfs, Combiner& combine,
                                      Rng& rng) {
    for (std::size_t left = pairs.size(); left > 0; --left) {
        std::swap(pairs[rng.index(left)], pairs[left - 1]);
        const PairRef& p = pairs[left - 1];
        if (const auto& f = combine(p.first, p.second))
            return make_discovery(cfs, *f, p.first, p.second, 0.0);
    }
    return std::nullopt;
}

std::vector<PairRef> pairs_at(const Entry& e, std::uint32_t index) {
    std::vector<PairRef> out;
    for (std::size_t x = 0; x < e.active.size(); ++x)
        for (std::size_t y = x + 1; y < e.active.size(); ++y)
            out.push_back({index, e.active[x], e.active[y]});
    return out;
}

std::vector<std::uint32_t> by_decreasing_error(const std::vector<Entry>& entries) {
    std::vector<std::uint32_t> order(entries.size());
    for (std::uint32_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::abs(entries[a].error) > std::abs(entries[b].error);
    });
    return order;
}

std::optional<Discovery> correlation_based(const std::vector<Entry>& entries, const CompiledFeatureSet& cfs,
                                           Combiner& combine) {
    struct Candidate {
        Feature feature;
        std::uint32_t a, b;
        std::vector<double> indicator;
    };
    const std::size_t m = entries.size();
    std::vector<Candidate> candidates;
    std::map<Feature, std::size_t> index;
    for (std::uint32_t k = 0; k < m; ++k) {
        const Entry& e = entries[k];
        for (std::size_t x = 0; x < e.active.size(); ++x) {
            for (std::size_t y = x + 1; y < e.active.size(); ++y) {
                const auto& f = combine(e.active[x], e.active[y]);
                if (!f)
                    continue;
                auto [it, inserted] = index.try_emplace(*f, candidates.size());
                if (inserted)
                    candidates.push_back({*f, e.active[x], e.active[y], std::vector<double>(m, 0.0)});
                candidates[it->second].indicator[k] = 1.0;
            }
        }
    }
    if (candidates.empty())
        return std::nullopt;

    std::vector<double> errors(m);
    for (std::size_t k = 0; k < m; ++k)
        errors[k] = entries[k].error;
    std::map<std::uint32_t, std::vector<double>> activity;
    auto activity_of = [&](std::uint32_t feature) -> const std::vector<double>& {
        auto [it, inserted] = activity.try_emplace(feature);
        if (inserted) {
            it->second.resize(m);
            for (std::size_t k = 0; k < m; ++k)
                it->second[k] = std::binary_search(entries[k].phi.begin(), entries[k].phi.end(), feature) ? 1.0 : 0.0;
        }
        return it->second;
    };

    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const Candidate& cand = candidates[c];
        const double score = combination_score(errors, cand.indicator, activity_of(cfs.instances()[cand.a].feature),
                                               activity_of(cfs.instances()[cand.b].feature));
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    const Candidate& win = candidates[best];
    return make_discovery(cfs, win.feature, win.a, win.b, best_score);
}

} // namespace

std::optional<Discovery> discover_feature(DiscoveryStrategy strategy, const ExperienceBuffer& buffer,
                                          const LinearPolicy& policy, const CompiledFeatureSet& cfs,
                                          std::size_t batch_size, Rng& rng) {
    if (buffer.empty())
        throw std::invalid_argument("feature discovery needs a non-empty buffer");
    std::vector<Entry> entries;
    for (std::size_t t : buffer.sample(batch_size, rng)) {
        const ExperienceTuple& tuple = buffer[t];
        const ActionDistribution d = distribution(policy, cfs, tuple.state, tuple.moves);
        for (std::size_t a = 0; a < tuple.moves.size(); ++a) {
            Entry e;
            e.error = d.probabilities[a] - tuple.pi[a];
            e.active = cfs.active_instances(tuple.state, tuple.moves[a]);
            std::sort(e.active.begin(), e.active.end());
            cfs.feature_vector(tuple.state, tuple.moves[a], e.phi);
            entries.push_back(std::move(e));
        }
    }

    Combiner combine(cfs);
    switch (strategy) {
    case DiscoveryStrategy::AddRandom: {
        std::vector<PairRef> all;
        for (std::uint32_t k = 0; k < entries.size(); ++k) {
            auto p = pairs_at(entries[k], k);
            all.insert(all.end(), p.begin(), p.end());
        }
        return first_random(std::move(all), cfs, combine, rng);
    }
    case DiscoveryStrategy::CombineRandom:
        for (std::uint32_t k : by_decreasing_error(entries))
            if (auto d = first_random(pairs_at(entries[k], k), cfs, combine, rng))
                return d;
        return std::nullopt;
    case DiscoveryStrategy::CombineMax:
        for (std::uint32_t k : by_decreasing_error(entries)) {
            const Entry& e = entries[k];
            if (e.phi.empty())
                continue;
            std::uint32_t heaviest = e.phi.front();
            for (std::uint32_t f : e.phi)
                if (std::abs(policy.theta[f]) > std::abs(policy.theta[heaviest]))
                    heaviest = f;
            std::vector<PairRef> pairs;
            for (std::uint32_t x : e.active) {
                if (cfs.instances()[x].feature != heaviest)
                    continue;
                for (std::uint32_t y : e.active)
                    if (y != x)
                        pairs.push_back({k, x, y});
            }
            if (auto d = first_random(std::move(pairs), cfs, combine, rng))
                return d;
        }
        return std::nullopt;
    case DiscoveryStrategy::CorrelationBased:
        return correlation_based(entries, cfs, combine);
    }
    return std::nullopt;
}

PruneResult prune(const FeatureSet& fs, std::span<const double> theta, std::size_t k, std::ostream* warn) {
    if (theta.size() != fs.size())
        throw std::invalid_argument("prune: weight count does not match feature count");
    if (fs.size() < k) {
        if (warn)
            *warn << "warning: feature set has " << fs.size() << " features, fewer than k = " << k
                  << "; left unchanged\n";
        return {fs, std::vector<double>(theta.begin(), theta.end()), false};
    }
    std::vector<std::size_t> order(fs.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(theta[a]) > std::abs(theta[b]); });
    order.resize(k);
    std::sort(order.begin(), order.end());
    std::vector<Feature> kept;
    PruneResult out;
    for (std::size_t i : order) {
        kept.push_back(fs[i]);
        out.theta.push_back(theta[i]);
    }
    out.features = FeatureSet(std::move(kept));
    out.pruned = true;
    return out;
}

double mean_cross_entropy(const FeatureSet& fs, std::span<const double> theta, const BoardGraph& board,
                          const ExperienceBuffer& buffer) {
    if (buffer.empty())
        throw std::invalid_argument("mean cross-entropy of an empty buffer");
    const CompiledFeatureSet cfs(fs, board);
    double total = 0.0;
    for (std::size_t i = 0; i < buffer.size(); ++i)
        total += cross_entropy(theta, feature_sample(cfs, buffer[i]));
    return total / static_cast<double>(buffer.size());
}

void write_training_log(const std::string& path, std::span<const GameLog> log) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "game,buffer_size,feature_count,mean_batch_loss,moves,discovered\n";
    for (const GameLog& g : log) {
        std::string quoted = g.discovered;
        for (std::size_t p = 0; (p = quoted.find('"', p)) != std::string::npos; p += 2)
            quoted.insert(p, "\"");
        out << g.game << ',' << g.buffer_size << ',' << g.feature_count << ',' << g.mean_batch_loss << ','
            << g.moves << ",\"" << quoted << "\"\n";
    }
}

TrainingArtifacts run_self_play(const TrainConfig& config, std::ostream* progress) {
    if (config.games < 1)
        throw std::invalid_argument("self-play needs at least one game");
    const Game game(load_game_rules(config.game));

    TrainingArtifacts out{FeatureSet{}, LinearPolicy{}, ExperienceBuffer(config.buffer_capacity), {}, {}, {}};
    if (config.initial) {
        out.features = config.initial->features;
        out.policy.theta = config.initial->weights;
    } else {
        out.features = generate_atomic_features(game);
        out.policy.theta.assign(out.features.size(), 0.0);
    }
    out.policy.step_size = config.step_size;
    out.policy.l2 = config.l2;
    auto cfs = std::make_unique<CompiledFeatureSet>(out.features, game.board());

    if (!config.out_dir.empty())
        std::filesystem::create_directories(config.out_dir);
    const std::set<int> schedule(config.checkpoints.begin(), config.checkpoints.end());
    const Rng root(config.seed);

    for (int g = 1; g <= config.games; ++g) {
        Rng search_rng = root.derive("search", g);
        Rng sgd_rng = root.derive("sgd", g);
        Rng move_rng = root.derive("move", g);
        Rng discover_rng = root.derive("discover", g);

        SearchTree tree;
        GameState state = game.initial_state();
        double loss_sum = 0.0;
        int moves = 0;
        while (!state.terminal()) {
            const SearchResult r =
                biased_search(game, tree, state, config.budget, out.policy, *cfs, config.exploration, search_rng);
            const std::vector<double> pi = expert_distribution(r.visits);
            out.buffer.push({state, r.moves, pi});

            std::vector<FeatureSample> batch;
            for (std::size_t i : out.buffer.sample(config.sgd_batch, sgd_rng))
                batch.push_back(feature_sample(*cfs, out.buffer[i]));
            double sq = 0.0;
            for (double w : out.policy.theta)
                sq += w * w;
            double batch_loss = 0.0;
            for (const FeatureSample& s : batch)
                batch_loss += cross_entropy(out.policy.theta, s);
            loss_sum += batch_loss / static_cast<double>(batch.size()) + 0.5 * out.policy.l2 * sq;
            out.policy = sgd_update(std::move(out.policy), batch);

            const Move m = final_move(r, FinalMoveMode::SampleExpert, move_rng);
            tree.advance(m);
            state = game.apply(state, m);
            ++moves;
        }

        GameLog entry;
        entry.game = g;
        entry.moves = moves;
        entry.mean_batch_loss = moves > 0 ? loss_sum / moves : 0.0;
        if (!config.freeze_features) {
            if (auto d = discover_feature(config.strategy, out.buffer, out.policy, *cfs, config.discovery_batch,
                                          discover_rng)) {
                if (out.features.append(d->feature)) {
                    out.policy.append_feature();
                    entry.discovered = feature_to_string(d->feature);
                    out.discoveries.push_back(*d);
                    cfs = std::make_unique<CompiledFeatureSet>(out.features, game.board());
                }
            }
        }
        entry.buffer_size = out.buffer.size();
        entry.feature_count = out.features.size();
        out.log.push_back(entry);

        if (schedule.count(g) || g == config.games) {
            out.checkpoints.push_back({g, out.features, out.policy.theta});
            if (!config.out_dir.empty())
                write_feature_file(config.out_dir + "/checkpoint-" + std::to_string(g) + ".feat", out.features,
                                   out.policy.theta);
        }
        if (progress)
            *progress << "game " << g << ": " << moves << " moves, " << out.features.size() << " features, loss "
                      << entry.mean_batch_loss << (entry.discovered.empty() ? "" : ", added " + entry.discovered)
                      << '\n';
    }
    if (!config.out_dir.empty())
        write_training_log(config.out_dir + "/train_log.csv", out.log);
    return out;
}

} // namespace fmcts
