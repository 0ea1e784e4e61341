#include "termgraph/topic_model.hpp"

#include "termgraph/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace termgraph {

std::optional<int> TopicModel::row_of(const std::string& doc_id) const {
    auto it = std::lower_bound(doc_ids.begin(), doc_ids.end(), doc_id);
    if (it == doc_ids.end() || *it != doc_id) return std::nullopt;
    return static_cast<int>(it - doc_ids.begin());
}

std::map<std::string, Eigen::VectorXd> TopicModel::kept_rows() const {
    std::map<std::string, Eigen::VectorXd> out;
    for (const auto& id : kept_docs) {
        auto r = row_of(id);
        if (r) out.emplace(id, doc_topic.row(*r).transpose());
    }
    return out;
}

Eigen::MatrixXd principal_components(const Eigen::MatrixXd& points, int dim) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    if (dim < 1 || dim > d)
        throw std::runtime_error("reduce_dim must be in [1, " + std::to_string(d) + "]");
    Eigen::RowVectorXd mean = points.colwise().mean();
    Eigen::MatrixXd centered = points.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered / std::max(1, n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    // eigenvalues ascending; take the top `dim` columns in descending order
    Eigen::MatrixXd w(d, dim);
    for (int j = 0; j < dim; ++j) {
        Eigen::VectorXd comp = es.eigenvectors().col(d - 1 - j);
        int argmax = 0;
        for (int i = 1; i < d; ++i)
            if (std::abs(comp[i]) > std::abs(comp[argmax])) argmax = i;
        if (comp[argmax] < 0) comp = -comp;
        w.col(j) = comp;
    }
    return centered * w;
}

namespace {

Eigen::VectorXd softmax_assignment(const Eigen::VectorXd& doc, const Eigen::MatrixXd& centroids,
                                   double temperature) {
    const int t = static_cast<int>(centroids.rows());
    Eigen::VectorXd scores(t);
    double dn = doc.norm();
    for (int j = 0; j < t; ++j) {
        double cn = centroids.row(j).norm();
        double sim = (dn == 0.0 || cn == 0.0) ? 0.0 : doc.dot(centroids.row(j)) / (dn * cn);
        scores[j] = sim / temperature;
    }
    double m = scores.maxCoeff();
    Eigen::VectorXd e = (scores.array() - m).exp();
    return e / e.sum();
}

} // namespace

TopicModel fit_topics(const EmbeddingStore& store, const TopicParams& params) {
    const int n = static_cast<int>(store.size());
    if (n < 2 * params.cluster.min_cluster_size)
        throw std::runtime_error("fit_topics needs at least " +
                                 std::to_string(2 * params.cluster.min_cluster_size) +
                                 " documents, got " + std::to_string(n));

    std::vector<std::string> ids;
    ids.reserve(store.size());
    Eigen::MatrixXd x(n, store.dim());
    int row = 0;
    for (const auto& [id, v] : store.vectors()) {
        ids.push_back(id);
        x.row(row++) = v.transpose();
    }

    Eigen::MatrixXd space = x;
    if (params.reduce_dim && *params.reduce_dim < store.dim())
        space = principal_components(x, *params.reduce_dim);

    ClusterModel model = cluster(space, params.cluster);
    const auto& labels = model.labels();
    int t = model.n_clusters();
    std::vector<int> counts(static_cast<std::size_t>(t), 0);
    for (int l : labels)
        if (l >= 0) ++counts[static_cast<std::size_t>(l)];
    int populated = 0;
    for (int c : counts)
        if (c > 0) ++populated;
    if (populated == 0)
        throw std::runtime_error("topic clustering labeled every document noise; loosen "
                                 "min_cluster_size/min_samples or check the embeddings");

    // centroid = mean of member vectors in the original space, re-normalized
    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(t, store.dim());
    for (int i = 0; i < n; ++i)
        if (labels[i] >= 0) centroids.row(labels[i]) += x.row(i);
    for (int j = 0; j < t; ++j) {
        if (counts[static_cast<std::size_t>(j)] == 0) continue;
        centroids.row(j) /= counts[static_cast<std::size_t>(j)];
        double nn = centroids.row(j).norm();
        if (nn > 0) centroids.row(j) /= nn;
    }

    TopicModel out;
    out.centroids = std::move(centroids);
    out.doc_ids = std::move(ids);
    out.temperature = params.temperature;
    out.doc_topic.resize(n, t);
    for (int i = 0; i < n; ++i)
        out.doc_topic.row(i) = softmax_assignment(x.row(i), out.centroids, out.temperature).transpose();
    out.kept_docs = out.doc_ids;
    return out;
}

TopicModel assign_documents(const TopicModel& model, const EmbeddingStore& store,
                            double outlier_threshold) {
    if (model.n_topics() < 1) throw std::runtime_error("assign_documents: model not fitted");
    if (outlier_threshold <= 0.0 || outlier_threshold > 1.0)
        throw std::runtime_error("outlier_threshold must be in (0, 1]");

    TopicModel out = model;
    out.doc_ids.clear();
    for (const auto& [id, v] : store.vectors()) out.doc_ids.push_back(id);
    const int n = static_cast<int>(out.doc_ids.size());
    out.doc_topic.resize(n, model.n_topics());
    out.kept_docs.clear();
    out.outliers.clear();
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd& v = *store.find(out.doc_ids[i]);
        Eigen::VectorXd row = softmax_assignment(v, model.centroids, model.temperature);
        out.doc_topic.row(i) = row.transpose();
        if (row.maxCoeff() >= outlier_threshold) out.kept_docs.push_back(out.doc_ids[i]);
        else out.outliers.push_back(out.doc_ids[i]);
    }
    return out;
}

void TopicModel::export_doc_topic_csv(const std::filesystem::path& path) const {
    std::string out = "doc_id";
    for (int j = 0; j < n_topics(); ++j) out += ",t" + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
        out += doc_ids[i];
        for (int j = 0; j < n_topics(); ++j)
            out += "," + format_double(doc_topic(static_cast<int>(i), j));
        out += '\n';
    }
    write_file(path, out);
}

void TopicModel::export_centroids(const std::filesystem::path& path) const {
    EmbeddingStore s(static_cast<int>(centroids.cols()));
    for (int j = 0; j < n_topics(); ++j)
        s.put("topic_" + std::to_string(j), centroids.row(j).transpose());
    s.save(path);
}

void TopicModel::save(const std::filesystem::path& doc_topic_csv,
                      const std::filesystem::path& centroids_path,
                      const std::filesystem::path& kept_path,
                      const std::filesystem::path& outliers_path) const {
    export_doc_topic_csv(doc_topic_csv);
    export_centroids(centroids_path);
    std::string kept, outl;
    for (const auto& id : kept_docs) kept += id + "\n";
    for (const auto& id : outliers) outl += id + "\n";
    write_file(kept_path, kept);
    write_file(outliers_path, outl);
}

TopicModel TopicModel::load(const std::filesystem::path& doc_topic_csv,
                            const std::filesystem::path& centroids_path,
                            const std::filesystem::path& kept_path,
                            const std::filesystem::path& outliers_path) {
    TopicModel m;
    EmbeddingStore cent = EmbeddingStore::load(centroids_path);
    m.centroids.resize(static_cast<int>(cent.size()), cent.dim());
    int row = 0;
    for (const auto& [id, v] : cent.vectors()) m.centroids.row(row++) = v.transpose();

    std::ifstream in(doc_topic_csv);
    if (!in) throw std::runtime_error("cannot open " + doc_topic_csv.string());
    std::string line;
    std::getline(in, line); // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto parts = split(line, ',');
        m.doc_ids.push_back(parts[0]);
        std::vector<double> r;
        for (std::size_t i = 1; i < parts.size(); ++i) r.push_back(parse_double(parts[i]));
        rows.push_back(std::move(r));
    }
    m.doc_topic.resize(static_cast<int>(rows.size()), m.n_topics());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < m.n_topics(); ++j) m.doc_topic(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];

    for (const auto& file_and_list :
         {std::pair{kept_path, &m.kept_docs}, std::pair{outliers_path, &m.outliers}}) {
        std::ifstream f(file_and_list.first);
        if (!f) throw std::runtime_error("cannot open " + file_and_list.first.string());
        std::string id;
        while (std::getline(f, id))
            if (!id.empty()) file_and_list.second->push_back(id);
    }
    return m;
}

} // namespace termgraph
