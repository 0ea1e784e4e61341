#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace termgraph {

enum class Metric { Euclidean, Cosine };

struct ClusterParams {
    int min_samples = 5;
    int min_cluster_size = 15;
    Metric metric = Metric::Euclidean;
};

struct MstEdge {
    int u = 0;
    int v = 0;
    double weight = 0.0;
};

// One row of the condensed hierarchy. Children below n_points are points;
// ids >= n_points are condensed clusters (root = n_points).
struct CondensedRow {
    int parent = 0;
    int child = 0;
    double lambda = 0.0;
    int size = 0;
};

// Hierarchical density clustering with soft membership. The hierarchy comes
// from the single-linkage MST of the mutual-reachability matrix, condensed at
// min_cluster_size; flat clusters maximize summed stability (leaf-vs-parent
// rule, root allowed). Deterministic: ties break toward the lowest point index.
class ClusterModel {
public:
    int n_points() const { return n_points_; }
    int n_clusters() const { return static_cast<int>(exemplar_indices_.size()); }

    // -1 = noise, otherwise dense ids in [0, k)
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<double>& stabilities() const { return stabilities_; }
    const std::vector<CondensedRow>& condensed_tree() const { return condensed_; }
    const std::vector<MstEdge>& mst_edges() const { return mst_; }
    double mst_total_weight() const;

    const std::vector<std::vector<int>>& exemplar_indices() const { return exemplar_indices_; }

    // Requires attach_points (or cluster()). Rows are probability vectors:
    // normalized inverse distance to each cluster's exemplar set.
    Eigen::VectorXd soft_membership(const Eigen::VectorXd& point) const;
    Eigen::MatrixXd soft_membership_matrix(const Eigen::MatrixXd& points) const;

    void attach_points(const Eigen::MatrixXd& points, Metric metric);

    void export_condensed_csv(const std::filesystem::path& path) const;

private:
    friend ClusterModel build_condensed_tree(const Eigen::MatrixXd& mr, int min_cluster_size);

    int n_points_ = 0;
    Metric metric_ = Metric::Euclidean;
    std::vector<int> labels_;
    std::vector<double> stabilities_;
    std::vector<CondensedRow> condensed_;
    std::vector<MstEdge> mst_;
    std::vector<std::vector<int>> exemplar_indices_;
    std::vector<Eigen::MatrixXd> exemplar_coords_; // per cluster, one row per exemplar
};

double metric_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, Metric metric);
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points, Metric metric);

// mr(a,b) = max(core_k(a), core_k(b), d(a,b)); the core distance counts the
// point itself, so min_samples=1 reduces mr to the plain distance matrix.
Eigen::MatrixXd mutual_reachability(const Eigen::MatrixXd& points, int min_samples, Metric metric);

ClusterModel build_condensed_tree(const Eigen::MatrixXd& mr, int min_cluster_size);

// mutual_reachability + build_condensed_tree + exemplar coordinates
ClusterModel cluster(const Eigen::MatrixXd& points, const ClusterParams& params);

std::vector<int> extract_clusters(const ClusterModel& model);

} // namespace termgraph
