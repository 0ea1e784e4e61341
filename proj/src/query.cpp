#include "termgraph/query.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace termgraph {

namespace {

std::string unknown_term_message(const std::string& token, const Lexicon& lexicon) {
    std::string msg = "unknown term '" + token + "'";
    auto near = lexicon.nearest_names(token, 3);
    if (!near.empty()) {
        msg += "; closest lexicon names:";
        for (const auto& n : near) msg += " '" + n + "'";
    }
    return msg;
}

} // namespace

Query parse_query(const std::string& text, const Lexicon& lexicon) {
    std::string body = trim(text);
    if (body.size() >= 2 && body.front() == '(' && body.back() == ')')
        body = trim(body.substr(1, body.size() - 2));
    if (body.empty()) throw std::runtime_error("empty query");

    // split into signed tokens; the first token is implicitly positive and a
    // leading sign is allowed ("- C" parses, then fails the positives check)
    std::vector<std::pair<char, std::string>> tokens;
    char sign = '+';
    bool pending_op = false;
    std::string cur;
    for (char c : body) {
        if (c == '+' || c == '-') {
            if (!trim(cur).empty()) {
                tokens.emplace_back(sign, trim(cur));
                cur.clear();
            } else if (pending_op) {
                throw std::runtime_error("dangling operator in query");
            }
            sign = c;
            pending_op = true;
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) tokens.emplace_back(sign, trim(cur));
    else if (pending_op) throw std::runtime_error("query ends with an operator");

    Query q;
    std::set<std::string> seen_pos, seen_neg;
    for (const auto& [s, token] : tokens) {
        const LexiconTerm* term = lexicon.match(token);
        if (!term) throw std::runtime_error(unknown_term_message(token, lexicon));
        auto& mine = s == '+' ? seen_pos : seen_neg;
        const auto& other = s == '+' ? seen_neg : seen_pos;
        if (other.count(term->id))
            throw std::runtime_error("term '" + term->id + "' appears with both signs");
        if (!mine.insert(term->id).second) continue; // idempotent repeat of same sign
        (s == '+' ? q.positives : q.negatives).push_back(term->id);
    }
    if (q.positives.empty()) throw std::runtime_error("query has no positive terms");
    return q;
}

std::vector<ScoredTerm> recommend_tasks(const Query& query, const NodeEmbeddingStore& store,
                                        const Lexicon& lexicon) {
    auto mean_of = [&](const std::vector<std::string>& ids) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(store.dim());
        for (const auto& id : ids) {
            const Eigen::VectorXd* v = store.find(id);
            if (!v) throw std::runtime_error("term '" + id + "' has no embedding");
            acc += *v;
        }
        return Eigen::VectorXd(acc / static_cast<double>(ids.size()));
    };

    Eigen::VectorXd qv = mean_of(query.positives);
    if (!query.negatives.empty()) qv -= mean_of(query.negatives);
    double qn = qv.norm();
    if (qn < 1e-12) throw std::runtime_error("degenerate query: zero query vector");

    std::set<std::string> in_query(query.positives.begin(), query.positives.end());
    in_query.insert(query.negatives.begin(), query.negatives.end());

    std::vector<ScoredTerm> scored;
    for (const auto& [id, v] : store.input_vectors()) {
        const LexiconTerm* term = lexicon.find(id);
        if (!term || term->kind != TermKind::Task) continue;
        if (in_query.count(id)) continue;
        double vn = v.norm();
        double sim = vn == 0.0 ? 0.0 : qv.dot(v) / (qn * vn);
        scored.push_back({id, sim});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.term < b.term;
    });
    if (query.top_k > 0 && scored.size() > static_cast<std::size_t>(query.top_k))
        scored.resize(static_cast<std::size_t>(query.top_k));
    return scored;
}

namespace {

struct TreeEdge {
    int u, v;
    double d;
};

std::vector<TreeEdge> mst_over(const std::vector<std::string>& nodes, const TermGraph& graph) {
    const int n = static_cast<int>(nodes.size());
    std::vector<TreeEdge> tree;
    if (n <= 1) return tree;
    std::vector<int> gi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        gi[static_cast<std::size_t>(i)] = graph.index_of(nodes[static_cast<std::size_t>(i)]);
        if (gi[static_cast<std::size_t>(i)] < 0)
            throw std::runtime_error("task '" + nodes[static_cast<std::size_t>(i)] +
                                     "' is not in the graph");
    }
    std::vector<bool> in_tree(static_cast<std::size_t>(n), false);
    std::vector<double> key(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    key[0] = 0.0;
    for (int it = 0; it < n; ++it) {
        int u = -1;
        for (int i = 0; i < n; ++i)
            if (!in_tree[static_cast<std::size_t>(i)] &&
                (u == -1 || key[static_cast<std::size_t>(i)] < key[static_cast<std::size_t>(u)]))
                u = i;
        in_tree[static_cast<std::size_t>(u)] = true;
        if (parent[static_cast<std::size_t>(u)] >= 0)
            tree.push_back({parent[static_cast<std::size_t>(u)], u, key[static_cast<std::size_t>(u)]});
        for (int v = 0; v < n; ++v) {
            if (in_tree[static_cast<std::size_t>(v)]) continue;
            double d = graph.divergence()(gi[static_cast<std::size_t>(u)],
                                          gi[static_cast<std::size_t>(v)]);
            if (d < key[static_cast<std::size_t>(v)]) {
                key[static_cast<std::size_t>(v)] = d;
                parent[static_cast<std::size_t>(v)] = u;
            }
        }
    }
    return tree;
}

} // namespace

Battery build_battery(const std::set<std::string>& constructs, const Hypergraph& hypergraph,
                      const TermGraph& graph) {
    if (constructs.empty()) throw std::runtime_error("build_battery: no constructs queried");

    std::vector<std::string> empties;
    std::set<std::string> candidate_set;
    std::vector<std::set<std::string>> required;
    for (const auto& c : constructs) {
        const auto& edge = hypergraph.hyperedge(c); // throws on unknown id
        if (edge.empty()) {
            empties.push_back(c);
            continue;
        }
        required.push_back(edge);
        candidate_set.insert(edge.begin(), edge.end());
    }
    if (!empties.empty()) {
        std::string msg = "constructs with empty hyperedges:";
        for (const auto& c : empties) msg += " '" + c + "'";
        throw std::runtime_error(msg);
    }

    std::vector<std::string> candidates(candidate_set.begin(), candidate_set.end());
    auto mst = mst_over(candidates, graph);

    std::map<std::string, double> total_membership;
    std::map<std::string, int> coverage_count; // queried hyperedges the task sits in
    for (const auto& t : candidates) {
        double total = 0.0;
        int cover = 0;
        for (const auto& c : constructs) total += hypergraph.membership(c, t);
        for (const auto& req : required) cover += req.count(t) ? 1 : 0;
        total_membership[t] = total;
        coverage_count[t] = cover;
    }

    // Greedy leaf pruning is order-sensitive, so run it under two priorities
    // (largest-distance-first and least-useful-first) and keep the cheaper
    // survivor set.
    enum class PruneOrder { DistanceFirst, LeastUsefulFirst };
    auto prune = [&](PruneOrder order) {
        auto tree = mst;
        std::set<std::string> kept(candidates.begin(), candidates.end());
        auto covered_without = [&](const std::string& victim) {
            for (const auto& req : required) {
                bool ok = false;
                for (const auto& t : req)
                    if (t != victim && kept.count(t)) {
                        ok = true;
                        break;
                    }
                if (!ok) return false;
            }
            return true;
        };
        bool pruned = true;
        while (pruned && kept.size() > 1) {
            pruned = false;
            std::vector<int> degree(candidates.size(), 0);
            for (const auto& e : tree) {
                ++degree[static_cast<std::size_t>(e.u)];
                ++degree[static_cast<std::size_t>(e.v)];
            }
            int best = -1;
            double best_d = -1.0;
            std::size_t best_edge = 0;
            auto better = [&](double d, const std::string& name) {
                if (best < 0) return true;
                const std::string& cur = candidates[static_cast<std::size_t>(best)];
                if (order == PruneOrder::LeastUsefulFirst &&
                    coverage_count[name] != coverage_count[cur])
                    return coverage_count[name] < coverage_count[cur];
                if (d != best_d) return d > best_d;
                if (total_membership[name] != total_membership[cur])
                    return total_membership[name] < total_membership[cur];
                return name < cur;
            };
            for (std::size_t k = 0; k < tree.size(); ++k) {
                for (int end : {tree[k].u, tree[k].v}) {
                    if (degree[static_cast<std::size_t>(end)] != 1) continue;
                    const std::string& name = candidates[static_cast<std::size_t>(end)];
                    if (!kept.count(name) || !covered_without(name)) continue;
                    if (better(tree[k].d, name)) {
                        best = end;
                        best_d = tree[k].d;
                        best_edge = k;
                    }
                }
            }
            if (best >= 0) {
                kept.erase(candidates[static_cast<std::size_t>(best)]);
                tree.erase(tree.begin() + static_cast<std::ptrdiff_t>(best_edge));
                pruned = true;
            }
        }
        return std::make_pair(kept, tree);
    };

    auto tree_weight = [](const std::vector<TreeEdge>& t) {
        double w = 0.0;
        for (const auto& e : t) w += e.d;
        return w;
    };

    auto [kept, tree] = prune(PruneOrder::DistanceFirst);
    auto [kept_b, tree_b] = prune(PruneOrder::LeastUsefulFirst);
    if (tree_weight(tree_b) < tree_weight(tree)) {
        kept = std::move(kept_b);
        tree = std::move(tree_b);
    }

    // The pruner only reaches subtrees of the MST. Minimal hitting sets (one
    // task per hyperedge) often beat it, so enumerate their unions when the
    // product is small and keep whichever tree is cheapest. A task covering
    // everything wins outright (weight 0) with membership breaking ties.
    const std::size_t n_req = required.size();
    std::string best_single;
    for (const auto& t : candidates) {
        if (coverage_count[t] != static_cast<int>(n_req)) continue;
        if (best_single.empty() || total_membership[t] > total_membership[best_single] ||
            (total_membership[t] == total_membership[best_single] && t < best_single))
            best_single = t;
    }
    if (!best_single.empty()) {
        kept = {best_single};
        tree.clear();
    } else {
        std::size_t combos = 1;
        for (const auto& req : required) {
            combos *= req.size();
            if (combos > 4096) break;
        }
        if (combos <= 4096) {
            std::vector<std::vector<std::string>> choices;
            for (const auto& req : required) choices.emplace_back(req.begin(), req.end());
            std::vector<std::size_t> idx(choices.size(), 0);
            double best_w = tree_weight(tree);
            while (true) {
                std::set<std::string> subset;
                for (std::size_t r = 0; r < choices.size(); ++r) subset.insert(choices[r][idx[r]]);
                std::vector<std::string> sub(subset.begin(), subset.end());
                auto sub_tree = mst_over(sub, graph);
                double w = 0.0;
                for (const auto& e : sub_tree) w += e.d;
                if (w < best_w) {
                    best_w = w;
                    kept = subset;
                    tree.clear();
                    for (const auto& e : sub_tree) {
                        int iu = -1, iv = -1;
                        for (std::size_t k = 0; k < candidates.size(); ++k) {
                            if (candidates[k] == sub[static_cast<std::size_t>(e.u)])
                                iu = static_cast<int>(k);
                            if (candidates[k] == sub[static_cast<std::size_t>(e.v)])
                                iv = static_cast<int>(k);
                        }
                        tree.push_back({iu, iv, e.d});
                    }
                }
                std::size_t r = 0;
                while (r < idx.size() && ++idx[r] == choices[r].size()) {
                    idx[r] = 0;
                    ++r;
                }
                if (r == idx.size()) break;
            }
        }
    }

    Battery battery;
    std::vector<std::pair<double, std::string>> ordered;
    for (const auto& t : kept) ordered.emplace_back(total_membership[t], t);
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (auto& [total, t] : ordered) battery.tasks.push_back(t);
    for (const auto& e : tree) {
        battery.tree_edges.emplace_back(candidates[static_cast<std::size_t>(e.u)],
                                        candidates[static_cast<std::size_t>(e.v)], e.d);
        battery.total_distance += e.d;
    }
    return battery;
}

double task_distance(const std::string& t1, const std::string& t2, const TermGraph& graph) {
    for (const auto& t : {t1, t2})
        if (graph.kind_of(t) != TermKind::Task)
            throw std::runtime_error("'" + t + "' is not a task");
    return graph.divergence()(graph.index_of(t1), graph.index_of(t2));
}

std::vector<ScoredTerm> nearest_tasks(const std::string& task_id, std::size_t k,
                                      const TermGraph& graph) {
    if (graph.kind_of(task_id) != TermKind::Task)
        throw std::runtime_error("'" + task_id + "' is not a task");
    std::vector<ScoredTerm> out;
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const std::string& other = graph.ids()[i];
        if (other == task_id || graph.kinds()[i] != TermKind::Task) continue;
        out.push_back({other, graph.divergence()(graph.index_of(task_id), static_cast<int>(i))});
    }
    std::sort(out.begin(), out.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.term < b.term;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

} // namespace termgraph
