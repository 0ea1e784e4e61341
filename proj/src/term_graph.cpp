#include "termgraph/term_graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace termgraph {

using nlohmann::json;

namespace {
constexpr double kLn2Pi = 1.8378770664093454836; // ln(2*pi)
constexpr double kLn2 = 0.6931471805599453094;
constexpr double kAbsFloor = 1e-9; // keeps degenerate covariances positive definite
} // namespace

void NodeDistribution::finalize() {
    const int t = dim();
    if (mode_ == CovarianceMode::Diagonal) {
        sd_ = diag_var_.cwiseSqrt();
        double logdet = 0.0;
        for (int i = 0; i < t; ++i) {
            if (!(diag_var_[i] > 0.0))
                throw std::runtime_error("non-positive variance in distribution '" + term_id_ + "'");
            logdet += std::log(diag_var_[i]);
        }
        log_norm_ = -0.5 * t * kLn2Pi - 0.5 * logdet;
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt(cov_);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("covariance for '" + term_id_ + "' is not positive definite");
        chol_ = llt.matrixL();
        double logdet = 0.0;
        for (int i = 0; i < t; ++i) logdet += 2.0 * std::log(chol_(i, i));
        log_norm_ = -0.5 * t * kLn2Pi - 0.5 * logdet;
    }
}

NodeDistribution NodeDistribution::diagonal(std::string term_id, Eigen::VectorXd mean,
                                            Eigen::VectorXd variance, int doc_count) {
    NodeDistribution d;
    d.term_id_ = std::move(term_id);
    d.mean_ = std::move(mean);
    d.diag_var_ = std::move(variance);
    d.mode_ = CovarianceMode::Diagonal;
    d.doc_count_ = doc_count;
    d.finalize();
    return d;
}

NodeDistribution NodeDistribution::full(std::string term_id, Eigen::VectorXd mean,
                                        Eigen::MatrixXd cov, int doc_count) {
    NodeDistribution d;
    d.term_id_ = std::move(term_id);
    d.mean_ = std::move(mean);
    d.cov_ = std::move(cov);
    d.mode_ = CovarianceMode::Full;
    d.doc_count_ = doc_count;
    d.finalize();
    return d;
}

double NodeDistribution::log_density(const Eigen::VectorXd& x) const {
    if (x.size() != mean_.size())
        throw std::runtime_error("log_density: dimension mismatch for '" + term_id_ + "'");
    Eigen::VectorXd d = x - mean_;
    double quad;
    if (mode_ == CovarianceMode::Diagonal) {
        quad = (d.array().square() / diag_var_.array()).sum();
    } else {
        Eigen::VectorXd y = chol_.triangularView<Eigen::Lower>().solve(d);
        quad = y.squaredNorm();
    }
    return log_norm_ - 0.5 * quad;
}

Eigen::VectorXd NodeDistribution::transform(const Eigen::VectorXd& z) const {
    if (mode_ == CovarianceMode::Diagonal) return mean_ + sd_.cwiseProduct(z);
    return mean_ + chol_ * z;
}

Eigen::VectorXd NodeDistribution::sample(Rng& rng) const {
    Eigen::VectorXd z(dim());
    for (int i = 0; i < dim(); ++i) z[i] = rng.next_normal();
    return transform(z);
}

NodeDistribution fit_node_distribution(const std::string& term_id, const Eigen::MatrixXd& rows,
                                       CovarianceMode mode, double shrinkage) {
    const int m = static_cast<int>(rows.rows());
    const int t = static_cast<int>(rows.cols());
    if (m < 2)
        throw std::runtime_error("term '" + term_id + "' has " + std::to_string(m) +
                                 " documents; at least 2 are required (should have been pruned)");
    if (shrinkage < 0.0) throw std::runtime_error("shrinkage must be >= 0");

    NodeDistribution d;
    d.term_id_ = term_id;
    d.doc_count_ = m;
    d.mean_ = rows.colwise().mean().transpose();
    Eigen::MatrixXd centered = rows.rowwise() - d.mean_.transpose();

    d.mode_ = mode;
    if (mode == CovarianceMode::Full && m <= t) {
        d.mode_ = CovarianceMode::Diagonal;
        d.fell_back_ = true;
    }

    if (d.mode_ == CovarianceMode::Full) {
        Eigen::MatrixXd s = centered.transpose() * centered / (m - 1);
        double jitter = shrinkage * (s.trace() / t) + kAbsFloor;
        d.cov_ = s + jitter * Eigen::MatrixXd::Identity(t, t);
    } else {
        Eigen::VectorXd var = centered.array().square().colwise().sum().transpose() / (m - 1);
        double jitter = shrinkage * (var.sum() / t) + kAbsFloor;
        d.diag_var_ = var.array() + jitter;
    }
    d.finalize();
    return d;
}

double js_divergence(const NodeDistribution& p, const NodeDistribution& q, int n_samples,
                     std::uint64_t seed) {
    if (p.dim() != q.dim())
        throw std::runtime_error("js_divergence: dimension mismatch (" + std::to_string(p.dim()) +
                                 " vs " + std::to_string(q.dim()) + ")");
    if (n_samples < 1000) throw std::runtime_error("js_divergence needs n_samples >= 1000");

    Rng rng(seed);
    const int t = p.dim();
    Eigen::VectorXd z(t);
    // log m(x) = logsumexp(log p, log q) - ln 2
    auto log_mix = [](double lp, double lq) {
        double hi = std::max(lp, lq), lo = std::min(lp, lq);
        return hi + std::log1p(std::exp(lo - hi)) - kLn2;
    };
    double acc_p = 0.0, acc_q = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        for (int i = 0; i < t; ++i) z[i] = rng.next_normal();
        Eigen::VectorXd xp = p.transform(z);
        Eigen::VectorXd xq = q.transform(z);
        double lp = p.log_density(xp), lq = q.log_density(xp);
        double lp2 = p.log_density(xq), lq2 = q.log_density(xq);
        if (!std::isfinite(lp) || !std::isfinite(lq) || !std::isfinite(lp2) || !std::isfinite(lq2))
            throw std::runtime_error("js_divergence: non-finite log-density (broken covariance?)");
        acc_p += lp - log_mix(lp, lq);
        acc_q += lq2 - log_mix(lp2, lq2);
    }
    double nats = 0.5 * (acc_p + acc_q) / n_samples;
    double bits = nats / kLn2;
    return std::clamp(bits, 0.0, 1.0);
}

TermGraph TermGraph::from_edges(std::vector<std::string> ids, std::vector<TermKind> kinds,
                                const std::vector<std::tuple<std::string, std::string, double>>& edges,
                                double epsilon) {
    if (ids.size() != kinds.size()) throw std::runtime_error("from_edges: ids/kinds size mismatch");
    TermGraph g;
    g.epsilon_ = epsilon;
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    for (std::size_t k : order) {
        g.ids_.push_back(ids[k]);
        g.kinds_.push_back(kinds[k]);
    }
    const int n = static_cast<int>(g.ids_.size());
    g.divergence_ = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [u, v, w] : edges) {
        int i = g.index_of(u), j = g.index_of(v);
        if (i < 0 || j < 0) throw std::runtime_error("from_edges: unknown node in edge list");
        if (w <= 0.0) throw std::runtime_error("from_edges: edge weights must be positive");
        g.edges_.push_back({std::min(i, j), std::max(i, j), w});
        double d = std::max(0.0, 1.0 / w - epsilon);
        g.divergence_(i, j) = d;
        g.divergence_(j, i) = d;
    }
    return g;
}

int TermGraph::index_of(const std::string& term_id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), term_id);
    if (it == ids_.end() || *it != term_id) return -1;
    return static_cast<int>(it - ids_.begin());
}

TermKind TermGraph::kind_of(const std::string& term_id) const {
    int i = index_of(term_id);
    if (i < 0) throw std::runtime_error("unknown term '" + term_id + "'");
    return kinds_[static_cast<std::size_t>(i)];
}

TermGraph build_graph(const std::map<std::string, std::pair<TermKind, NodeDistribution>>& nodes,
                      double epsilon, int n_samples, std::uint64_t seed, int workers) {
    if (nodes.size() < 2) throw std::runtime_error("build_graph needs at least 2 nodes");
    if (epsilon <= 0.0) throw std::runtime_error("epsilon must be > 0");

    TermGraph g;
    g.epsilon_ = epsilon;
    for (const auto& [id, node] : nodes) {
        g.ids_.push_back(id);
        g.kinds_.push_back(node.first);
        g.dists_.push_back(node.second);
    }
    std::size_t tasks = std::count(g.kinds_.begin(), g.kinds_.end(), TermKind::Task);
    if (tasks == 0 || tasks == g.kinds_.size())
        throw std::runtime_error("build_graph needs at least one node of each kind");

    const int n = static_cast<int>(g.ids_.size());
    g.divergence_ = Eigen::MatrixXd::Zero(n, n);

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    // Per-pair seeds derive from the sorted ids, so worker scheduling cannot
    // change any estimate.
    auto run_pair = [&](std::size_t k) {
        auto [i, j] = pairs[k];
        std::uint64_t s = mix_seed(seed, fnv1a64(g.ids_[i]), fnv1a64(g.ids_[j]));
        double d = js_divergence(g.dists_[i], g.dists_[j], n_samples, s);
        g.divergence_(i, j) = d;
        g.divergence_(j, i) = d;
    };

    int nw = std::max(1, workers);
    if (nw == 1 || pairs.size() < 4) {
        for (std::size_t k = 0; k < pairs.size(); ++k) run_pair(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next.fetch_add(1); k < pairs.size(); k = next.fetch_add(1))
                    run_pair(k);
            });
        for (auto& th : pool) th.join();
    }

    for (auto [i, j] : pairs)
        g.edges_.push_back({i, j, 1.0 / (epsilon + g.divergence_(i, j))});
    return g;
}

void TermGraph::export_divergence_csv(const std::filesystem::path& path) const {
    std::string out = "term";
    for (const auto& id : ids_) out += "," + id;
    out += '\n';
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        out += ids_[i];
        for (std::size_t j = 0; j < ids_.size(); ++j)
            out += "," + format_double(divergence_(static_cast<int>(i), static_cast<int>(j)));
        out += '\n';
    }
    write_file(path, out);
}

void TermGraph::export_edges_json(const std::filesystem::path& path) const {
    json arr = json::array();
    for (const auto& e : edges_) {
        json o;
        o["u"] = ids_[static_cast<std::size_t>(e.u)];
        o["v"] = ids_[static_cast<std::size_t>(e.v)];
        o["weight"] = e.weight;
        arr.push_back(std::move(o));
    }
    write_file(path, arr.dump(2) + "\n");
}

void TermGraph::export_graphml(const std::filesystem::path& path) const {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        "  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n"
        "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        "  <graph id=\"G\" edgedefault=\"undirected\">\n";
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        out += "    <node id=\"" + ids_[i] + "\"><data key=\"kind\">" +
               to_string(kinds_[i]) + "</data></node>\n";
    }
    for (const auto& e : edges_) {
        out += "    <edge source=\"" + ids_[static_cast<std::size_t>(e.u)] + "\" target=\"" +
               ids_[static_cast<std::size_t>(e.v)] + "\"><data key=\"weight\">" +
               format_double(e.weight) + "</data></edge>\n";
    }
    out += "  </graph>\n</graphml>\n";
    write_file(path, out);
}

void TermGraph::save(const std::filesystem::path& path) const {
    json doc;
    doc["epsilon"] = epsilon_;
    json nodes = json::array();
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        const NodeDistribution& d = dists_[i];
        json nd;
        nd["id"] = ids_[i];
        nd["kind"] = to_string(kinds_[i]);
        nd["doc_count"] = d.doc_count();
        nd["mean"] = std::vector<double>(d.mean().data(), d.mean().data() + d.mean().size());
        if (d.mode() == CovarianceMode::Diagonal) {
            nd["variance"] = std::vector<double>(d.diagonal_variance().data(),
                                                 d.diagonal_variance().data() +
                                                     d.diagonal_variance().size());
        } else {
            json cov = json::array();
            for (int r = 0; r < d.dim(); ++r) {
                json row = json::array();
                for (int c = 0; c < d.dim(); ++c) row.push_back(d.covariance()(r, c));
                cov.push_back(std::move(row));
            }
            nd["covariance"] = std::move(cov);
        }
        nodes.push_back(std::move(nd));
    }
    doc["nodes"] = std::move(nodes);
    json div = json::array();
    for (int i = 0; i < divergence_.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < divergence_.cols(); ++j) row.push_back(divergence_(i, j));
        div.push_back(std::move(row));
    }
    doc["divergence"] = std::move(div);
    write_file(path, doc.dump() + "\n");
}

TermGraph TermGraph::load(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path));
    TermGraph g;
    g.epsilon_ = doc.at("epsilon").get<double>();
    for (const auto& nd : doc.at("nodes")) {
        g.ids_.push_back(nd.at("id").get<std::string>());
        g.kinds_.push_back(term_kind_from_string(nd.at("kind").get<std::string>()));
        auto mean_v = nd.at("mean").get<std::vector<double>>();
        Eigen::VectorXd mean = Eigen::Map<Eigen::VectorXd>(mean_v.data(),
                                                           static_cast<int>(mean_v.size()));
        if (nd.contains("variance")) {
            auto var_v = nd.at("variance").get<std::vector<double>>();
            Eigen::VectorXd var = Eigen::Map<Eigen::VectorXd>(var_v.data(),
                                                              static_cast<int>(var_v.size()));
            g.dists_.push_back(NodeDistribution::diagonal(nd.at("id").get<std::string>(),
                                                          std::move(mean), std::move(var),
                                                          nd.at("doc_count").get<int>()));
        } else {
            auto cov_rows = nd.at("covariance");
            int t = static_cast<int>(cov_rows.size());
            Eigen::MatrixXd cov(t, t);
            for (int r = 0; r < t; ++r)
                for (int c = 0; c < t; ++c) cov(r, c) = cov_rows[r][c].get<double>();
            g.dists_.push_back(NodeDistribution::full(nd.at("id").get<std::string>(),
                                                      std::move(mean), std::move(cov),
                                                      nd.at("doc_count").get<int>()));
        }
    }
    const auto& div = doc.at("divergence");
    const int n = static_cast<int>(g.ids_.size());
    g.divergence_.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.divergence_(i, j) = div[i][j].get<double>();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            g.edges_.push_back({i, j, 1.0 / (g.epsilon_ + g.divergence_(i, j))});
    return g;
}

} // namespace termgraph
