#pragma once

#include "termgraph/density_cluster.hpp"
#include "termgraph/embedder.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace termgraph {

struct TopicParams {
    ClusterParams cluster{.min_samples = 5, .min_cluster_size = 15, .metric = Metric::Cosine};
    std::optional<int> reduce_dim = 5; // principal components before clustering
    double temperature = 0.1;          // softmax sharpness for assignment
};

// Documents mapped into a shared topic space: one centroid per document
// cluster, documents soft-assigned over centroids, low-confidence documents
// set aside as outliers.
struct TopicModel {
    Eigen::MatrixXd centroids;      // T x D, rows unit-norm, original space
    Eigen::MatrixXd doc_topic;      // N x T, row-stochastic
    std::vector<std::string> doc_ids; // row order of doc_topic
    std::vector<std::string> kept_docs;
    std::vector<std::string> outliers;
    double temperature = 0.1;

    int n_topics() const { return static_cast<int>(centroids.rows()); }
    std::optional<int> row_of(const std::string& doc_id) const;
    // kept doc_id -> its doc_topic row
    std::map<std::string, Eigen::VectorXd> kept_rows() const;

    void export_doc_topic_csv(const std::filesystem::path& path) const;
    void export_centroids(const std::filesystem::path& path) const;
    static TopicModel load(const std::filesystem::path& doc_topic_csv,
                           const std::filesystem::path& centroids_path,
                           const std::filesystem::path& kept_path,
                           const std::filesystem::path& outliers_path);
    void save(const std::filesystem::path& doc_topic_csv,
              const std::filesystem::path& centroids_path,
              const std::filesystem::path& kept_path,
              const std::filesystem::path& outliers_path) const;
};

// Deterministic principal-component projection: components ordered by
// descending eigenvalue, each sign-fixed so its largest-magnitude entry is
// positive.
Eigen::MatrixXd principal_components(const Eigen::MatrixXd& points, int dim);

TopicModel fit_topics(const EmbeddingStore& store, const TopicParams& params);

// Recomputes doc_topic rows as softmax(cos(doc, centroid)/temperature) and
// splits documents into kept/outliers; max membership >= threshold keeps.
TopicModel assign_documents(const TopicModel& model, const EmbeddingStore& store,
                            double outlier_threshold);

} // namespace termgraph
