#include "termgraph/density_cluster.hpp"

#include "termgraph/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace termgraph {

namespace {
// Finite stand-in for 1/0: splits at distance zero cannot separate points.
constexpr double kLambdaCap = 1e12;

double to_lambda(double dist) { return dist > 1.0 / kLambdaCap ? 1.0 / dist : kLambdaCap; }
} // namespace

double metric_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, Metric metric) {
    if (metric == Metric::Euclidean) return (a - b).norm();
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 1.0;
    double sim = a.dot(b) / (na * nb);
    sim = std::clamp(sim, -1.0, 1.0);
    return 1.0 - sim;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points, Metric metric) {
    const int n = static_cast<int>(points.rows());
    Eigen::MatrixXd d(n, n);
    auto rows = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            d(i, i) = 0.0;
            for (int j = i + 1; j < n; ++j) {
                double v = metric_distance(points.row(i), points.row(j), metric);
                d(i, j) = v;
                d(j, i) = v;
            }
        }
    };
    unsigned hw = std::thread::hardware_concurrency();
    int workers = n >= 512 ? static_cast<int>(std::min<unsigned>(hw ? hw : 2, 8)) : 1;
    if (workers <= 1) {
        rows(0, n);
    } else {
        // row blocks write disjoint cells; results do not depend on scheduling
        std::vector<std::thread> pool;
        int chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(rows, std::min(w * chunk, n), std::min((w + 1) * chunk, n));
        for (auto& t : pool) t.join();
    }
    return d;
}

Eigen::MatrixXd mutual_reachability(const Eigen::MatrixXd& points, int min_samples, Metric metric) {
    const int n = static_cast<int>(points.rows());
    if (min_samples < 1) throw std::runtime_error("min_samples must be >= 1");
    if (n < min_samples)
        throw std::runtime_error("need at least min_samples=" + std::to_string(min_samples) +
                                 " points, got " + std::to_string(n));
    Eigen::MatrixXd d = pairwise_distances(points, metric);

    // core_k(i) = k-th smallest distance from i, self included
    Eigen::VectorXd core(n);
    std::vector<double> row(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) row[j] = d(i, j);
        std::nth_element(row.begin(), row.begin() + (min_samples - 1), row.end());
        core[i] = row[min_samples - 1];
    }

    Eigen::MatrixXd mr(n, n);
    for (int i = 0; i < n; ++i) {
        mr(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            double v = std::max({core[i], core[j], d(i, j)});
            mr(i, j) = v;
            mr(j, i) = v;
        }
    }
    return mr;
}

namespace {

// Prim over a dense matrix; ties resolved toward the lowest vertex index.
std::vector<MstEdge> prim_mst(const Eigen::MatrixXd& w) {
    const int n = static_cast<int>(w.rows());
    std::vector<MstEdge> mst;
    if (n <= 1) return mst;
    std::vector<bool> in_tree(n, false);
    std::vector<double> key(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    key[0] = 0.0;
    for (int it = 0; it < n; ++it) {
        int u = -1;
        for (int i = 0; i < n; ++i)
            if (!in_tree[i] && (u == -1 || key[i] < key[u])) u = i;
        in_tree[u] = true;
        if (parent[u] >= 0) mst.push_back({std::min(parent[u], u), std::max(parent[u], u), key[u]});
        for (int v = 0; v < n; ++v)
            if (!in_tree[v] && w(u, v) < key[v]) {
                key[v] = w(u, v);
                parent[v] = u;
            }
    }
    return mst;
}

struct DendroNode {
    int left = -1;
    int right = -1;
    double dist = 0.0;
    int size = 1;
};

// Single-linkage dendrogram over the MST edges; node ids n..2n-2, root last.
std::vector<DendroNode> build_dendrogram(std::vector<MstEdge> edges, int n) {
    std::sort(edges.begin(), edges.end(), [](const MstEdge& a, const MstEdge& b) {
        if (a.weight != b.weight) return a.weight < b.weight;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    std::vector<DendroNode> nodes(static_cast<std::size_t>(2 * n - 1));
    std::vector<int> find(static_cast<std::size_t>(2 * n - 1));
    std::iota(find.begin(), find.end(), 0);
    auto root_of = [&](int x) {
        while (find[x] != x) {
            find[x] = find[find[x]];
            x = find[x];
        }
        return x;
    };
    int next = n;
    for (const auto& e : edges) {
        int a = root_of(e.u), b = root_of(e.v);
        DendroNode nd;
        nd.left = a;
        nd.right = b;
        nd.dist = e.weight;
        nd.size = nodes[a].size + nodes[b].size;
        nodes[next] = nd;
        find[a] = next;
        find[b] = next;
        ++next;
    }
    return nodes;
}

void collect_points(const std::vector<DendroNode>& dendro, int node, int n, std::vector<int>& out) {
    if (node < n) {
        out.push_back(node);
        return;
    }
    collect_points(dendro, dendro[node].left, n, out);
    collect_points(dendro, dendro[node].right, n, out);
}

} // namespace

ClusterModel build_condensed_tree(const Eigen::MatrixXd& mr, int min_cluster_size) {
    const int n = static_cast<int>(mr.rows());
    if (n < 1) throw std::runtime_error("cannot cluster zero points");
    if (min_cluster_size < 2) throw std::runtime_error("min_cluster_size must be >= 2");

    ClusterModel model;
    model.n_points_ = n;
    model.labels_.assign(n, -1);
    model.mst_ = prim_mst(mr);

    const int root_cluster = n;
    if (n == 1) {
        model.condensed_.push_back({root_cluster, 0, kLambdaCap, 1});
        model.labels_[0] = 0;
        model.stabilities_ = {kLambdaCap};
        model.exemplar_indices_ = {{0}};
        return model;
    }

    auto dendro = build_dendrogram(model.mst_, n);
    const int dendro_root = 2 * n - 2;

    // Top-down condensation. A split is real only when both sides reach
    // min_cluster_size; otherwise the small side's points fall out and the
    // cluster id carries on down the big side.
    std::vector<CondensedRow>& rows = model.condensed_;
    int next_cluster = root_cluster + 1;
    std::vector<std::pair<int, int>> stack; // (dendrogram node, condensed cluster)
    stack.emplace_back(dendro_root, root_cluster);
    while (!stack.empty()) {
        auto [nd, cl] = stack.back();
        stack.pop_back();
        if (nd < n) { // singleton component: the point exits immediately
            rows.push_back({cl, nd, kLambdaCap, 1});
            continue;
        }
        const DendroNode& node = dendro[nd];
        double lambda = to_lambda(node.dist);
        int ls = node.left < n ? 1 : dendro[node.left].size;
        int rs = node.right < n ? 1 : dendro[node.right].size;
        if (ls >= min_cluster_size && rs >= min_cluster_size) {
            int cl_left = next_cluster++;
            int cl_right = next_cluster++;
            rows.push_back({cl, cl_left, lambda, ls});
            rows.push_back({cl, cl_right, lambda, rs});
            stack.emplace_back(node.left, cl_left);
            stack.emplace_back(node.right, cl_right);
        } else if (ls < min_cluster_size && rs < min_cluster_size) {
            std::vector<int> pts;
            collect_points(dendro, nd, n, pts);
            for (int p : pts) rows.push_back({cl, p, lambda, 1});
        } else {
            int small = ls < min_cluster_size ? node.left : node.right;
            int big = ls < min_cluster_size ? node.right : node.left;
            std::vector<int> pts;
            collect_points(dendro, small, n, pts);
            for (int p : pts) rows.push_back({cl, p, lambda, 1});
            stack.emplace_back(big, cl);
        }
    }

    // Stability per condensed cluster: sum of (lambda_exit - lambda_birth) * size.
    std::map<int, double> birth;
    std::map<int, std::vector<int>> children; // cluster -> child clusters
    birth[root_cluster] = 0.0;
    for (const auto& r : rows)
        if (r.child >= n) {
            birth[r.child] = r.lambda;
            children[r.parent].push_back(r.child);
        }
    std::map<int, double> stability;
    for (const auto& [c, b] : birth) stability[c] = 0.0;
    for (const auto& r : rows) stability[r.parent] += (r.lambda - birth[r.parent]) * r.size;

    // Excess-of-mass selection, processed deepest-first (child ids are always
    // larger than their parent's). The root may win, so a degenerate tree
    // yields a single all-points cluster instead of all-noise.
    std::map<int, double> subtree;
    std::map<int, bool> selected;
    std::vector<int> order;
    for (const auto& [c, b] : birth) order.push_back(c);
    std::sort(order.rbegin(), order.rend());
    for (int c : order) {
        auto ch = children.find(c);
        if (ch == children.end() || ch->second.empty()) {
            selected[c] = true;
            subtree[c] = stability[c];
        } else {
            double child_sum = 0.0;
            for (int d : ch->second) child_sum += subtree[d];
            if (stability[c] >= child_sum) {
                selected[c] = true;
                subtree[c] = stability[c];
            } else {
                selected[c] = false;
                subtree[c] = child_sum;
            }
        }
    }

    // Final flat clusters: highest selected clusters, descendants suppressed.
    std::vector<int> final_clusters;
    std::vector<int> bfs{root_cluster};
    while (!bfs.empty()) {
        int c = bfs.back();
        bfs.pop_back();
        if (selected[c]) {
            final_clusters.push_back(c);
            continue;
        }
        for (int d : children[c]) bfs.push_back(d);
    }
    std::sort(final_clusters.begin(), final_clusters.end());

    std::map<int, int> dense_id;
    for (std::size_t i = 0; i < final_clusters.size(); ++i)
        dense_id[final_clusters[i]] = static_cast<int>(i);

    // Map every condensed cluster to the final cluster covering it (or -1).
    std::map<int, int> owner;
    owner[root_cluster] = dense_id.count(root_cluster) ? dense_id[root_cluster] : -1;
    std::vector<int> walk{root_cluster};
    while (!walk.empty()) {
        int c = walk.back();
        walk.pop_back();
        for (int d : children[c]) {
            owner[d] = dense_id.count(d) ? dense_id[d] : owner[c];
            walk.push_back(d);
        }
    }

    for (const auto& r : rows)
        if (r.child < n) model.labels_[r.child] = owner[r.parent];

    model.stabilities_.assign(final_clusters.size(), 0.0);
    for (std::size_t i = 0; i < final_clusters.size(); ++i)
        model.stabilities_[i] = stability[final_clusters[i]];

    // Exemplars: the longest-surviving points of each flat cluster.
    model.exemplar_indices_.assign(final_clusters.size(), {});
    std::vector<double> best_lambda(final_clusters.size(), -1.0);
    for (const auto& r : rows) {
        if (r.child >= n) continue;
        int f = owner[r.parent];
        if (f < 0) continue;
        if (r.lambda > best_lambda[f]) {
            best_lambda[f] = r.lambda;
            model.exemplar_indices_[f].clear();
        }
        if (r.lambda == best_lambda[f]) model.exemplar_indices_[f].push_back(r.child);
    }
    for (auto& ex : model.exemplar_indices_) std::sort(ex.begin(), ex.end());

    return model;
}

void ClusterModel::attach_points(const Eigen::MatrixXd& points, Metric metric) {
    if (points.rows() != n_points_)
        throw std::runtime_error("attach_points: row count does not match the clustered set");
    metric_ = metric;
    exemplar_coords_.clear();
    for (const auto& idx : exemplar_indices_) {
        Eigen::MatrixXd coords(static_cast<int>(idx.size()), points.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) coords.row(static_cast<int>(i)) = points.row(idx[i]);
        exemplar_coords_.push_back(std::move(coords));
    }
}

double ClusterModel::mst_total_weight() const {
    // summed in ascending order so the total is reproducible bit-for-bit
    std::vector<double> ws;
    ws.reserve(mst_.size());
    for (const auto& e : mst_) ws.push_back(e.weight);
    std::sort(ws.begin(), ws.end());
    double total = 0.0;
    for (double w : ws) total += w;
    return total;
}

Eigen::VectorXd ClusterModel::soft_membership(const Eigen::VectorXd& point) const {
    if (exemplar_coords_.empty())
        throw std::runtime_error("soft_membership requires exemplar coordinates (attach_points)");
    const int k = n_clusters();
    Eigen::VectorXd m(k);
    constexpr double kEps = 1e-12;
    for (int j = 0; j < k; ++j) {
        const Eigen::MatrixXd& ex = exemplar_coords_[j];
        if (ex.cols() != point.size())
            throw std::runtime_error("soft_membership: point dimension mismatch");
        double dmin = std::numeric_limits<double>::infinity();
        for (int r = 0; r < ex.rows(); ++r)
            dmin = std::min(dmin, metric_distance(point, ex.row(r), metric_));
        m[j] = 1.0 / (kEps + dmin);
    }
    return m / m.sum();
}

Eigen::MatrixXd ClusterModel::soft_membership_matrix(const Eigen::MatrixXd& points) const {
    Eigen::MatrixXd out(points.rows(), n_clusters());
    for (int i = 0; i < points.rows(); ++i) out.row(i) = soft_membership(points.row(i)).transpose();
    return out;
}

void ClusterModel::export_condensed_csv(const std::filesystem::path& path) const {
    std::string out = "parent,child,lambda,size\n";
    for (const auto& r : condensed_) {
        out += std::to_string(r.parent) + "," + std::to_string(r.child) + "," +
               format_double(r.lambda) + "," + std::to_string(r.size) + "\n";
    }
    write_file(path, out);
}

ClusterModel cluster(const Eigen::MatrixXd& points, const ClusterParams& params) {
    Eigen::MatrixXd mr = mutual_reachability(points, params.min_samples, params.metric);
    ClusterModel model = build_condensed_tree(mr, params.min_cluster_size);
    model.attach_points(points, params.metric);
    return model;
}

std::vector<int> extract_clusters(const ClusterModel& model) { return model.labels(); }

} // namespace termgraph
