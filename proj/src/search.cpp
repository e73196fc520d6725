#include "fmcts/search.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>

namespace fmcts {

SearchBudget SearchBudget::iterations(std::int64_t n) {
    if (n < 1)
        throw std::invalid_argument("iteration budget must be at least 1");
    return {Mode::Iterations, n};
}

SearchBudget SearchBudget::wall_clock_ms(std::int64_t ms) {
    if (ms < 1)
        throw std::invalid_argument("time budget must be at least 1 ms");
    return {Mode::WallClock, ms};
}

SearchNode::SearchNode(const Game& game, GameState s, PlayerId by, bool with_moves)
    : state(std::move(s)), moved_by(by) {
    if (with_moves)
        generate_moves(game);
}

void SearchNode::generate_moves(const Game& game) {
    if (moves_ready_)
        return;
    moves_ready_ = true;
    if (!state.terminal()) {
        game.legal_moves(state, moves);
        children.resize(moves.size());
        edge_visits.assign(moves.size(), 0);
        edge_total.assign(moves.size(), 0.0);
    }
}

SearchNode& SearchTree::prepare(const Game& game, const GameState& s) {
    if (!root_ || root_->state != s)
        root_ = std::make_unique<SearchNode>(game, s, opponent(s.mover));
    root_->generate_moves(game);
    return *root_;
}

void SearchTree::advance(std::span<const Move> played) {
    for (const Move& m : played) {
        if (!root_)
            return;
        if (!root_->has_moves()) {
            root_.reset();
            return;
        }
        auto it = std::find(root_->moves.begin(), root_->moves.end(), m);
        if (it == root_->moves.end()) {
            root_.reset();
            return;
        }
        auto& child = root_->children[static_cast<std::size_t>(it - root_->moves.begin())];
        if (!child || child->visits == 0) {
            root_.reset();
            return;
        }
        std::unique_ptr<SearchNode> next = std::move(child);
        root_ = std::move(next);
    }
}

std::size_t ucb1_select(std::span<const double> q, std::span<const std::int64_t> n, double c) {
    std::int64_t sum = 0;
    for (std::size_t a = 0; a < n.size(); ++a) {
        if (n[a] == 0)
            return a;
        sum += n[a];
    }
    const double log_sum = std::log(static_cast<double>(sum));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n.size(); ++a) {
        const double score = q[a] + c * std::sqrt(log_sum / static_cast<double>(n[a]));
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

std::size_t puct_select(std::span<const double> q, std::span<const std::int64_t> n, std::span<const double> priors,
                        double c) {
    const std::int64_t sum = std::accumulate(n.begin(), n.end(), std::int64_t{0});
    const double root_sum = std::sqrt(static_cast<double>(sum));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n.size(); ++a) {
        const double value = n[a] > 0 ? q[a] : 0.0;
        const double score = value + c * priors[a] * root_sum / (1.0 + static_cast<double>(n[a]));
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

namespace {

std::size_t puct_index(const SearchNode& node, double c) {
    if (node.priors.size() != node.moves.size())
        throw ContractViolation("PUCT selection at a node without priors");
    const double scale = c * std::sqrt(static_cast<double>(node.child_visits));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < node.moves.size(); ++a) {
        double score = scale * node.priors[a];
        if (const std::int64_t visits = node.edge_visits[a]; visits > 0) {
            const double n = static_cast<double>(visits);
            score = node.edge_total[a] / n + score / (1.0 + n);
        }
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

std::size_t ucb1_index(const SearchNode& node, double c) {
    const double log_sum = std::log(static_cast<double>(node.child_visits));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < node.moves.size(); ++a) {
        const double n = static_cast<double>(node.edge_visits[a]);
        const double score = node.edge_total[a] / n + c * std::sqrt(log_sum / n);
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

// One iteration's route: nodes from the root and, for each but the last,
// the index of the child taken.
struct Path {
    std::vector<SearchNode*> nodes;
    std::vector<std::size_t> edges;

    void reset(SearchNode* root) {
        nodes.assign(1, root);
        edges.clear();
    }
    void push(std::size_t edge, SearchNode* child) {
        edges.push_back(edge);
        nodes.push_back(child);
    }
};

void backpropagate(Path& path, const GameState& terminal) {
    for (std::size_t k = 0; k < path.nodes.size(); ++k) {
        SearchNode* node = path.nodes[k];
        const double score = Game::score(terminal, node->moved_by);
        ++node->visits;
        node->total += score;
        if (k > 0) {
            SearchNode* parent = path.nodes[k - 1];
            const std::size_t a = path.edges[k - 1];
            ++parent->child_visits;
            ++parent->edge_visits[a];
            parent->edge_total[a] += score;
        }
    }
}

SearchNode* expand(const Game& game, SearchNode& node, std::size_t a) {
    GameState next = node.state;
    game.apply_in_place(next, node.moves[a]);
    node.children[a] = std::make_unique<SearchNode>(game, std::move(next), node.state.mover, false);
    return node.children[a].get();
}

class Clock {
public:
    explicit Clock(SearchBudget b) : budget_(b), start_(std::chrono::steady_clock::now()) {}
    bool keep_going(std::int64_t done) const {
        if (budget_.mode == SearchBudget::Mode::Iterations)
            return done < budget_.amount;
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < budget_.amount;
    }

private:
    SearchBudget budget_;
    std::chrono::steady_clock::time_point start_;
};

SearchResult collect(const SearchNode& root, std::int64_t iterations) {
    SearchResult r;
    r.moves = root.moves;
    r.iterations = iterations;
    for (std::size_t a = 0; a < root.moves.size(); ++a)
        r.visits.push_back(root.child_visit_count(a));
    return r;
}

void ensure_priors(SearchNode& node, const LinearPolicy& policy, const CompiledFeatureSet& cfs) {
    if (node.priors.empty() && !node.moves.empty())
        node.priors = distribution(policy, cfs, node.state, node.moves).probabilities;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc)
            return i;
    }
    // Rounding left a sliver above the last cumulative sum.
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0)
            return i;
    return probs.size() - 1;
}

} // namespace

Move puct_select(const SearchNode& node, double c) { return node.moves[puct_index(node, c)]; }

SearchResult uct_search(const Game& game, SearchTree& tree, const GameState& root_state, SearchBudget budget, double c,
                        Rng& rng) {
    if (root_state.terminal())
        throw ContractViolation("search from a terminal state");
    SearchNode& root = tree.prepare(game, root_state);
    Clock clock(budget);
    Path path;
    std::int64_t done = 0;
    while (clock.keep_going(done)) {
        path.reset(&root);
        SearchNode* node = &root;
        while (!node->state.terminal()) {
            node->generate_moves(game);
            auto unvisited = std::find(node->children.begin(), node->children.end(), nullptr);
            if (unvisited != node->children.end()) {
                const auto a = static_cast<std::size_t>(unvisited - node->children.begin());
                node = expand(game, *node, a);
                path.push(a, node);
                break;
            }
            const std::size_t a = ucb1_index(*node, c);
            node = node->children[a].get();
            path.push(a, node);
        }
        GameState playout = node->state;
        game.random_playout(playout, rng);
        backpropagate(path, playout);
        ++done;
    }
    return collect(root, done);
}

SearchResult biased_search(const Game& game, SearchTree& tree, const GameState& root_state, SearchBudget budget,
                           const LinearPolicy& policy, const CompiledFeatureSet& cfs, double c, Rng& rng) {
    if (root_state.terminal())
        throw ContractViolation("search from a terminal state");
    SearchNode& root = tree.prepare(game, root_state);
    Clock clock(budget);
    Path path;
    std::int64_t done = 0;
    while (clock.keep_going(done)) {
        path.reset(&root);
        SearchNode* node = &root;
        while (!node->state.terminal()) {
            node->generate_moves(game);
            ensure_priors(*node, policy, cfs);
            const std::size_t a = puct_index(*node, c);
            const bool fresh = !node->children[a];
            node = fresh ? expand(game, *node, a) : node->children[a].get();
            path.push(a, node);
            if (fresh)
                break;
        }
        if (!node->state.terminal()) {
            node->generate_moves(game);
            ensure_priors(*node, policy, cfs);
            const std::size_t a = sample_index(node->priors, rng);
            node = node->children[a] ? node->children[a].get() : expand(game, *node, a);
            path.push(a, node);
        }
        GameState playout = node->state;
        game.random_playout(playout, rng);
        backpropagate(path, playout);
        ++done;
    }
    return collect(root, done);
}

std::vector<double> expert_distribution(std::span<const std::int64_t> visits) {
    const std::int64_t total = std::accumulate(visits.begin(), visits.end(), std::int64_t{0});
    if (total <= 0)
        throw std::invalid_argument("expert distribution needs at least one visit");
    std::vector<double> pi;
    pi.reserve(visits.size());
    for (std::int64_t n : visits)
        pi.push_back(static_cast<double>(n) / static_cast<double>(total));
    return pi;
}

Move final_move(const SearchResult& result, FinalMoveMode mode, Rng& rng) {
    if (result.moves.empty())
        throw ContractViolation("final move from an empty search result");
    if (mode == FinalMoveMode::MaxVisits) {
        auto best = std::max_element(result.visits.begin(), result.visits.end());
        return result.moves[static_cast<std::size_t>(best - result.visits.begin())];
    }
    const std::vector<double> pi = expert_distribution(result.visits);
    return result.moves[sample_index(pi, rng)];
}

Move greedy_move(const Game& game, const LinearPolicy& policy, const CompiledFeatureSet& cfs, const GameState& s) {
    const std::vector<Move> moves = game.legal_moves(s);
    const ActionDistribution d = distribution(policy, cfs, s, moves);
    auto best = std::max_element(d.probabilities.begin(), d.probabilities.end());
    return moves[static_cast<std::size_t>(best - d.probabilities.begin())];
}

// Agents ---------------------------------------------------------------------

UctAgent::UctAgent(const Game& game, MctsConfig config, Rng rng) : game_(game), config_(config), rng_(rng) {}

Move UctAgent::choose(const GameState& s) {
    last_ = uct_search(game_, tree_, s, config_.budget, config_.exploration, rng_);
    return final_move(last_, config_.final_move, rng_);
}

void UctAgent::observe(Move m) {
    if (config_.reuse_tree)
        tree_.advance(m);
    else
        tree_.clear();
}

BiasedAgent::BiasedAgent(const Game& game, const LinearPolicy& policy, const CompiledFeatureSet& cfs, MctsConfig config,
                         Rng rng)
    : game_(game), policy_(policy), cfs_(cfs), config_(config), rng_(rng) {}

Move BiasedAgent::choose(const GameState& s) {
    last_ = biased_search(game_, tree_, s, config_.budget, policy_, cfs_, config_.exploration, rng_);
    return final_move(last_, config_.final_move, rng_);
}

void BiasedAgent::observe(Move m) {
    if (config_.reuse_tree)
        tree_.advance(m);
    else
        tree_.clear();
}

Move RandomAgent::choose(const GameState& s) {
    const std::vector<Move> moves = game_.legal_moves(s);
    return moves[rng_.index(moves.size())];
}

} // namespace fmcts
