#include "termgraph/hypergraph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace termgraph {

using nlohmann::json;

std::vector<GraphEdge> threshold_edges(const TermGraph& graph, ThresholdMode mode,
                                       ThresholdReport* report) {
    const auto& edges = graph.edges();
    if (edges.size() < 2) throw std::runtime_error("threshold_edges needs at least 2 edges");

    std::vector<double> ws;
    ws.reserve(edges.size());
    for (const auto& e : edges) ws.push_back(e.weight);
    std::sort(ws.begin(), ws.end());
    const std::size_t n = ws.size();
    double median = (n % 2 == 1) ? ws[n / 2] : 0.5 * (ws[n / 2 - 1] + ws[n / 2]);
    double mean = 0.0;
    for (double w : ws) mean += w;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double w : ws) ss += (w - mean) * (w - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));

    ThresholdReport rep;
    rep.median = median;
    rep.sd = sd;
    rep.total = n;

    std::vector<GraphEdge> kept;
    if (sd == 0.0) {
        kept = edges;
        rep.degenerate_all_kept = true;
    } else {
        for (const auto& e : edges) {
            bool keep = mode == ThresholdMode::Strong
                            ? e.weight > median + sd
                            : (e.weight > median + sd || e.weight < median - sd);
            if (keep) kept.push_back(e);
        }
    }
    rep.kept = kept.size();
    rep.none_retained = kept.empty();
    if (report) *report = rep;
    return kept;
}

Hypergraph::Hypergraph(std::set<std::string> task_nodes,
                       std::map<std::string, std::set<std::string>> hyperedges,
                       std::map<std::string, std::map<std::string, double>> memberships)
    : task_nodes_(std::move(task_nodes)), hyperedges_(std::move(hyperedges)),
      memberships_(std::move(memberships)) {
    for (const auto& [c, tasks] : hyperedges_) {
        if (tasks.empty()) empty_constructs_.push_back(c);
        for (const auto& t : tasks) {
            if (!task_nodes_.count(t))
                throw std::runtime_error("hyperedge '" + c + "' references unknown task '" + t + "'");
            if (!memberships_.count(c) || !memberships_.at(c).count(t))
                throw std::runtime_error("missing membership for (" + c + ", " + t + ")");
        }
    }
}

const std::set<std::string>& Hypergraph::hyperedge(const std::string& construct_id) const {
    auto it = hyperedges_.find(construct_id);
    if (it == hyperedges_.end())
        throw std::runtime_error("unknown construct '" + construct_id + "'");
    return it->second;
}

double Hypergraph::membership(const std::string& construct_id, const std::string& task_id) const {
    if (!hyperedges_.count(construct_id))
        throw std::runtime_error("unknown construct '" + construct_id + "'");
    auto it = memberships_.find(construct_id);
    if (it == memberships_.end()) return 0.0;
    auto jt = it->second.find(task_id);
    return jt == it->second.end() ? 0.0 : jt->second;
}

double Hypergraph::hypernomy(const std::string& c1, const std::string& c2) const {
    const auto& e1 = hyperedge(c1);
    const auto& e2 = hyperedge(c2);
    if (e1.empty() && e2.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : e1) inter += e2.count(t);
    std::size_t uni = e1.size() + e2.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t Hypergraph::task_impurity(const std::string& task_id) const {
    if (!task_nodes_.count(task_id))
        throw std::runtime_error("unknown task '" + task_id + "'");
    std::size_t n = 0;
    for (const auto& [c, tasks] : hyperedges_) n += tasks.count(task_id);
    return n;
}

Hypergraph build_hypergraph(const TermGraph& graph, const NodeEmbeddingStore& embeddings,
                            const ClusterParams& cluster_params, double tau, ThresholdMode mode,
                            HypergraphBuildReport* report) {
    HypergraphBuildReport rep;
    std::vector<GraphEdge> surviving = threshold_edges(graph, mode, &rep.threshold);

    const int n = static_cast<int>(graph.size());
    Eigen::MatrixXd points(n, embeddings.dim());
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd* v = embeddings.find(graph.ids()[static_cast<std::size_t>(i)]);
        if (!v)
            throw std::runtime_error("no embedding for node '" +
                                     graph.ids()[static_cast<std::size_t>(i)] + "'");
        points.row(i) = v->transpose();
    }

    ClusterModel model = cluster(points, cluster_params);
    rep.clusters = model.n_clusters();
    for (int l : model.labels())
        if (l < 0) ++rep.noise_nodes;
    if (rep.noise_nodes == static_cast<std::size_t>(n))
        throw std::runtime_error("hypergraph clustering labeled every node noise; loosen "
                                 "cluster parameters");
    Eigen::MatrixXd memb = model.soft_membership_matrix(points);

    double max_w = 0.0;
    for (const auto& e : surviving) max_w = std::max(max_w, e.weight);
    // surviving edge weights normalized into [0,1]
    std::map<std::pair<int, int>, double> edge_norm;
    for (const auto& e : surviving) {
        double w = max_w > 0 ? e.weight / max_w : 0.0;
        edge_norm[{std::min(e.u, e.v), std::max(e.u, e.v)}] = w;
    }

    auto memb_cosine = [&](int a, int b) {
        double na = memb.row(a).norm(), nb = memb.row(b).norm();
        if (na == 0.0 || nb == 0.0) return 0.0;
        return std::clamp(memb.row(a).dot(memb.row(b)) / (na * nb), 0.0, 1.0);
    };

    std::set<std::string> task_nodes;
    std::vector<int> task_idx, construct_idx;
    for (int i = 0; i < n; ++i) {
        if (graph.kinds()[static_cast<std::size_t>(i)] == TermKind::Task) {
            task_nodes.insert(graph.ids()[static_cast<std::size_t>(i)]);
            task_idx.push_back(i);
        } else {
            construct_idx.push_back(i);
        }
    }

    std::map<std::string, std::set<std::string>> hyperedges;
    std::map<std::string, std::map<std::string, double>> memberships;
    for (int c : construct_idx) {
        const std::string& cid = graph.ids()[static_cast<std::size_t>(c)];
        auto& edge_set = hyperedges[cid]; // ensure entry even when empty
        for (int t : task_idx) {
            const std::string& tid = graph.ids()[static_cast<std::size_t>(t)];
            auto en = edge_norm.find({std::min(c, t), std::max(c, t)});
            double w_edge = en == edge_norm.end() ? 0.0 : en->second;
            double w_cos = memb_cosine(c, t);
            bool in_edge = en != edge_norm.end() || w_cos >= tau;
            if (in_edge) {
                edge_set.insert(tid);
                memberships[cid][tid] = std::max(w_edge, w_cos);
            }
        }
    }

    if (report) *report = rep;
    return Hypergraph(std::move(task_nodes), std::move(hyperedges), std::move(memberships));
}

void Hypergraph::export_hyperedges_json(const std::filesystem::path& path) const {
    json flat = json::object();
    for (const auto& [c, tasks] : hyperedges_) flat[c] = tasks;
    write_file(path, flat.dump(2) + "\n");
}

void Hypergraph::save(const std::filesystem::path& json_path) const {
    json doc;
    json edges = json::object();
    for (const auto& [c, tasks] : hyperedges_) edges[c] = tasks;
    doc["hyperedges"] = std::move(edges);
    doc["task_nodes"] = task_nodes_;
    json memb = json::object();
    for (const auto& [c, row] : memberships_) {
        json r = json::object();
        for (const auto& [t, v] : row) r[t] = v;
        memb[c] = std::move(r);
    }
    doc["memberships"] = std::move(memb);
    write_file(json_path, doc.dump(2) + "\n");
}

Hypergraph Hypergraph::load(const std::filesystem::path& json_path) {
    json doc = json::parse(read_file(json_path));
    std::set<std::string> tasks;
    for (const auto& t : doc.at("task_nodes")) tasks.insert(t.get<std::string>());
    std::map<std::string, std::set<std::string>> edges;
    for (const auto& [c, arr] : doc.at("hyperedges").items()) {
        std::set<std::string> s;
        for (const auto& t : arr) s.insert(t.get<std::string>());
        edges[c] = std::move(s);
    }
    std::map<std::string, std::map<std::string, double>> memb;
    for (const auto& [c, row] : doc.at("memberships").items())
        for (const auto& [t, v] : row.items()) memb[c][t] = v.get<double>();
    return Hypergraph(std::move(tasks), std::move(edges), std::move(memb));
}

void Hypergraph::export_membership_csv(const std::filesystem::path& path) const {
    std::string out = "construct,task,membership\n";
    for (const auto& [c, row] : memberships_)
        for (const auto& [t, v] : row) out += c + "," + t + "," + format_double(v) + "\n";
    write_file(path, out);
}

void Hypergraph::export_incidence_csv(const std::filesystem::path& path) const {
    std::string out = "task";
    for (const auto& [c, tasks] : hyperedges_) out += "," + c;
    out += '\n';
    for (const auto& t : task_nodes_) {
        out += t;
        for (const auto& [c, tasks] : hyperedges_) out += tasks.count(t) ? ",1" : ",0";
        out += '\n';
    }
    write_file(path, out);
}

} // namespace termgraph
