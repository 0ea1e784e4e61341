#pragma once

#include "termgraph/lexicon.hpp"
#include "termgraph/util.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace termgraph {

enum class CovarianceMode { Diagonal, Full };

// Gaussian fitted over a term's document topic vectors. Covariance is
// regularized so it stays positive definite even for degenerate samples.
class NodeDistribution {
public:
    NodeDistribution() = default;

    const std::string& term_id() const { return term_id_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    CovarianceMode mode() const { return mode_; }
    const Eigen::VectorXd& diagonal_variance() const { return diag_var_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    int doc_count() const { return doc_count_; }
    int dim() const { return static_cast<int>(mean_.size()); }
    bool fell_back_to_diagonal() const { return fell_back_; }

    double log_density(const Eigen::VectorXd& x) const; // natural log
    Eigen::VectorXd sample(Rng& rng) const;
    // x = mean + scale * z for a standard-normal z (shared-z sampling keeps
    // the divergence estimator exactly symmetric under argument swap)
    Eigen::VectorXd transform(const Eigen::VectorXd& z) const;

    friend NodeDistribution fit_node_distribution(const std::string& term_id,
                                                  const Eigen::MatrixXd& rows, CovarianceMode mode,
                                                  double shrinkage);
    static NodeDistribution diagonal(std::string term_id, Eigen::VectorXd mean,
                                     Eigen::VectorXd variance, int doc_count = 2);
    static NodeDistribution full(std::string term_id, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                                 int doc_count = 2);

private:
    void finalize();

    std::string term_id_;
    Eigen::VectorXd mean_;
    CovarianceMode mode_ = CovarianceMode::Diagonal;
    Eigen::VectorXd diag_var_; // Diagonal mode
    Eigen::MatrixXd cov_;      // Full mode
    int doc_count_ = 0;
    bool fell_back_ = false;

    Eigen::VectorXd sd_;      // sqrt of diag_var_
    Eigen::MatrixXd chol_;    // lower Cholesky factor of cov_
    double log_norm_ = 0.0;   // -(T/2)ln(2pi) - 0.5 logdet
};

// mean + sample covariance (n-1), regularized with
// shrinkage*(trace(S)/T)*I plus a tiny absolute floor. Full mode needs
// doc_count > T; otherwise it falls back to Diagonal.
NodeDistribution fit_node_distribution(const std::string& term_id, const Eigen::MatrixXd& rows,
                                       CovarianceMode mode, double shrinkage);

// Symmetric Jensen-Shannon divergence in bits, Monte-Carlo estimate, clamped
// to [0,1]. Deterministic for a fixed seed and exactly symmetric in (p,q).
double js_divergence(const NodeDistribution& p, const NodeDistribution& q, int n_samples,
                     std::uint64_t seed);

struct GraphEdge {
    int u = 0;
    int v = 0;
    double weight = 0.0;
};

// Heterogeneous task/construct graph: complete divergence matrix, every pair
// an edge weighted 1/(epsilon + divergence).
class TermGraph {
public:
    TermGraph() = default;

    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<TermKind>& kinds() const { return kinds_; }
    const std::vector<NodeDistribution>& distributions() const { return dists_; }
    const Eigen::MatrixXd& divergence() const { return divergence_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }
    double epsilon() const { return epsilon_; }

    int index_of(const std::string& term_id) const; // -1 when absent
    TermKind kind_of(const std::string& term_id) const;
    std::size_t size() const { return ids_.size(); }

    void export_divergence_csv(const std::filesystem::path& path) const;
    void export_edges_json(const std::filesystem::path& path) const;
    void export_graphml(const std::filesystem::path& path) const;
    void save(const std::filesystem::path& path) const;
    static TermGraph load(const std::filesystem::path& path);

    // Graph with an explicit (possibly sparse) edge list, e.g. a walk graph
    // over thresholded edges. Divergence defaults to 1/weight - epsilon.
    static TermGraph from_edges(std::vector<std::string> ids, std::vector<TermKind> kinds,
                                const std::vector<std::tuple<std::string, std::string, double>>& edges,
                                double epsilon = 1e-3);

    friend TermGraph build_graph(const std::map<std::string, std::pair<TermKind, NodeDistribution>>& nodes,
                                 double epsilon, int n_samples, std::uint64_t seed, int workers);

private:
    std::vector<std::string> ids_; // sorted
    std::vector<TermKind> kinds_;
    std::vector<NodeDistribution> dists_;
    Eigen::MatrixXd divergence_;
    std::vector<GraphEdge> edges_;
    double epsilon_ = 1e-3;
};

TermGraph build_graph(const std::map<std::string, std::pair<TermKind, NodeDistribution>>& nodes,
                      double epsilon, int n_samples, std::uint64_t seed, int workers = 1);

} // namespace termgraph
