#pragma once

#include "termgraph/density_cluster.hpp"
#include "termgraph/metapath.hpp"
#include "termgraph/term_graph.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace termgraph {

enum class ThresholdMode {
    Strong, // keep weight > median + 1 SD (default)
    Band    // literal reading: discard the band within 1 SD of the median
};

struct ThresholdReport {
    double median = 0.0;
    double sd = 0.0;
    std::size_t kept = 0;
    std::size_t total = 0;
    bool degenerate_all_kept = false; // sd == 0
    bool none_retained = false;
};

// Median/SD (sample, n-1) cut over edge weights. With sd == 0 every edge is
// retained.
std::vector<GraphEdge> threshold_edges(const TermGraph& graph,
                                       ThresholdMode mode = ThresholdMode::Strong,
                                       ThresholdReport* report = nullptr);

// Task nodes grouped by overlapping construct hyperedges.
class Hypergraph {
public:
    Hypergraph() = default;
    Hypergraph(std::set<std::string> task_nodes,
               std::map<std::string, std::set<std::string>> hyperedges,
               std::map<std::string, std::map<std::string, double>> memberships);

    const std::set<std::string>& task_nodes() const { return task_nodes_; }
    const std::map<std::string, std::set<std::string>>& hyperedges() const { return hyperedges_; }
    const std::set<std::string>& hyperedge(const std::string& construct_id) const;
    double membership(const std::string& construct_id, const std::string& task_id) const;
    const std::vector<std::string>& empty_constructs() const { return empty_constructs_; }

    // Jaccard overlap of two hyperedges; 0 when both are empty.
    double hypernomy(const std::string& c1, const std::string& c2) const;
    // Number of hyperedges containing the task.
    std::size_t task_impurity(const std::string& task_id) const;

    // wire format: flat {"construct_id": ["task_id", ...]} object
    void export_hyperedges_json(const std::filesystem::path& path) const;
    void export_membership_csv(const std::filesystem::path& path) const;
    void export_incidence_csv(const std::filesystem::path& path) const;

    // full state for reload (hyperedges + task nodes + memberships)
    void save(const std::filesystem::path& state_path) const;
    static Hypergraph load(const std::filesystem::path& state_path);

private:
    std::set<std::string> task_nodes_;
    std::map<std::string, std::set<std::string>> hyperedges_; // construct -> tasks
    std::map<std::string, std::map<std::string, double>> memberships_;
    std::vector<std::string> empty_constructs_;
};

struct HypergraphBuildReport {
    ThresholdReport threshold;
    int clusters = 0;
    std::size_t noise_nodes = 0;
};

// hyperedge(c) = tasks sharing a surviving edge with c, plus tasks whose
// soft-cluster membership vector lies within cosine tau of c's.
// membership(c,t) = max(edge weight / max surviving weight, membership cosine).
Hypergraph build_hypergraph(const TermGraph& graph, const NodeEmbeddingStore& embeddings,
                            const ClusterParams& cluster_params, double tau,
                            ThresholdMode mode = ThresholdMode::Strong,
                            HypergraphBuildReport* report = nullptr);

} // namespace termgraph
