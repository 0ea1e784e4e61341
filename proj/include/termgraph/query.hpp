#pragma once

#include "termgraph/hypergraph.hpp"
#include "termgraph/lexicon.hpp"
#include "termgraph/metapath.hpp"
#include "termgraph/term_graph.hpp"

#include <set>
#include <string>
#include <vector>

namespace termgraph {

struct Query {
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
    int top_k = 10;
};

// Grammar: expr := term (('+'|'-') term)*, optional outer parentheses.
// Terms match lexicon ids/names case- and whitespace-insensitively.
Query parse_query(const std::string& text, const Lexicon& lexicon);

struct ScoredTerm {
    std::string term;
    double score;
};

// Query vector = mean(positives) - mean(negatives); task nodes outside the
// query ranked by cosine similarity, ties by id.
std::vector<ScoredTerm> recommend_tasks(const Query& query, const NodeEmbeddingStore& store,
                                        const Lexicon& lexicon);

struct Battery {
    std::vector<std::string> tasks; // ordered by total membership, descending
    std::vector<std::tuple<std::string, std::string, double>> tree_edges;
    double total_distance = 0.0;
};

// Candidate tasks = union of the queried hyperedges; MST over JS distances,
// then leaves pruned greedily (largest distance first) while every queried
// hyperedge keeps at least one task.
Battery build_battery(const std::set<std::string>& constructs, const Hypergraph& hypergraph,
                      const TermGraph& graph);

double task_distance(const std::string& t1, const std::string& t2, const TermGraph& graph);
std::vector<ScoredTerm> nearest_tasks(const std::string& task_id, std::size_t k,
                                      const TermGraph& graph);

} // namespace termgraph
