#include "termgraph/biblio.hpp"
#include "termgraph/density_cluster.hpp"
#include "termgraph/embedder.hpp"
#include "termgraph/hypergraph.hpp"
#include "termgraph/metapath.hpp"
#include "termgraph/pipeline.hpp"
#include "termgraph/query.hpp"
#include "termgraph/term_graph.hpp"
#include "termgraph/topic_model.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace termgraph;

namespace {

Metric metric_from(const std::string& name) {
    if (name == "euclidean") return Metric::Euclidean;
    if (name == "cosine") return Metric::Cosine;
    throw std::runtime_error("metric must be 'euclidean' or 'cosine'");
}

py::dict cluster_points(const Eigen::MatrixXd& points, int min_samples, int min_cluster_size,
                        const std::string& metric) {
    ClusterParams params{min_samples, min_cluster_size, metric_from(metric)};
    ClusterModel model = cluster(points, params);
    py::dict out;
    out["labels"] = model.labels();
    out["stabilities"] = model.stabilities();
    out["n_clusters"] = model.n_clusters();
    out["mst_weight"] = model.mst_total_weight();
    out["membership"] = model.soft_membership_matrix(points);
    return out;
}

double js_divergence_diag(const Eigen::VectorXd& mean_p, const Eigen::VectorXd& var_p,
                          const Eigen::VectorXd& mean_q, const Eigen::VectorXd& var_q,
                          int n_samples, std::uint64_t seed) {
    auto p = NodeDistribution::diagonal("p", mean_p, var_p);
    auto q = NodeDistribution::diagonal("q", mean_q, var_q);
    return js_divergence(p, q, n_samples, seed);
}

py::dict run_stage_py(const std::filesystem::path& config_path, const std::string& stage,
                      bool force, const std::string& output_dir) {
    RunConfig cfg = RunConfig::load(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    Pipeline pipeline(cfg);
    StageResult r = pipeline.run_stage(stage_from_string(stage), force);
    py::dict out;
    out["stage"] = std::string(to_string(r.stage));
    out["recomputed"] = r.recomputed;
    out["message"] = r.message;
    return out;
}

py::list run_pipeline_py(const std::filesystem::path& config_path, const std::string& through,
                         bool force, const std::string& output_dir) {
    RunConfig cfg = RunConfig::load(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    Pipeline pipeline(cfg);
    py::list out;
    for (const auto& r : pipeline.run_through(stage_from_string(through), force)) {
        py::dict d;
        d["stage"] = std::string(to_string(r.stage));
        d["recomputed"] = r.recomputed;
        out.append(d);
    }
    return out;
}

py::dict parse_query_py(const std::string& text, const std::filesystem::path& lexicon_path) {
    Lexicon lexicon = Lexicon::load(lexicon_path);
    Query q = parse_query(text, lexicon);
    py::dict out;
    out["positives"] = q.positives;
    out["negatives"] = q.negatives;
    return out;
}

py::list query_tasks_py(const std::filesystem::path& output_dir, const std::string& text,
                        int top_k) {
    Lexicon lexicon = Lexicon::load(output_dir / "lexicon.json");
    NodeEmbeddingStore store = NodeEmbeddingStore::load(output_dir / "node_embeddings.w2v",
                                                        output_dir / "node_embeddings_out.w2v");
    Query q = parse_query(text, lexicon);
    q.top_k = top_k;
    py::list out;
    for (const auto& r : recommend_tasks(q, store, lexicon))
        out.append(py::make_tuple(r.term, r.score));
    return out;
}

py::dict battery_py(const std::filesystem::path& output_dir,
                    const std::vector<std::string>& constructs) {
    TermGraph graph = TermGraph::load(output_dir / "graph.json");
    Hypergraph h = Hypergraph::load(output_dir / "hypergraph_state.json");
    Battery b = build_battery(std::set<std::string>(constructs.begin(), constructs.end()), h,
                              graph);
    py::dict out;
    out["tasks"] = b.tasks;
    py::list edges;
    for (const auto& [u, v, d] : b.tree_edges) edges.append(py::make_tuple(u, v, d));
    out["tree_edges"] = edges;
    out["total_distance"] = b.total_distance;
    return out;
}

double task_distance_py(const std::filesystem::path& output_dir, const std::string& a,
                        const std::string& b) {
    TermGraph graph = TermGraph::load(output_dir / "graph.json");
    return task_distance(a, b, graph);
}

py::dict hypergraph_metrics_py(const std::filesystem::path& output_dir) {
    Hypergraph h = Hypergraph::load(output_dir / "hypergraph_state.json");
    py::dict edges;
    for (const auto& [c, tasks] : h.hyperedges())
        edges[py::str(c)] = std::vector<std::string>(tasks.begin(), tasks.end());
    py::dict impurity;
    for (const auto& t : h.task_nodes()) impurity[py::str(t)] = h.task_impurity(t);
    py::dict out;
    out["hyperedges"] = edges;
    out["task_impurity"] = impurity;
    return out;
}

} // namespace

PYBIND11_MODULE(_termgraph, m) {
    m.doc() = "task-construct graph engine: embeddings, clustering, divergence, queries";

    m.def("mock_embed", &mock_embed, py::arg("text"), py::arg("seed"), py::arg("dim"),
          "Deterministic unit-norm embedding of a string.");
    m.def("mutual_reachability",
          [](const Eigen::MatrixXd& pts, int min_samples, const std::string& metric) {
              return mutual_reachability(pts, min_samples, metric_from(metric));
          },
          py::arg("points"), py::arg("min_samples"), py::arg("metric") = "euclidean");
    m.def("cluster", &cluster_points, py::arg("points"), py::arg("min_samples") = 5,
          py::arg("min_cluster_size") = 15, py::arg("metric") = "euclidean",
          "Density clustering; returns labels, stabilities, and soft memberships.");
    m.def("js_divergence", &js_divergence_diag, py::arg("mean_p"), py::arg("var_p"),
          py::arg("mean_q"), py::arg("var_q"), py::arg("n_samples") = 8192, py::arg("seed") = 7,
          "Monte-Carlo Jensen-Shannon divergence (bits) between diagonal Gaussians.");
    m.def("principal_components", &principal_components, py::arg("points"), py::arg("dim"));

    m.def("run_stage", &run_stage_py, py::arg("config"), py::arg("stage"),
          py::arg("force") = false, py::arg("output_dir") = "");
    m.def("run_pipeline", &run_pipeline_py, py::arg("config"), py::arg("through") = "stats",
          py::arg("force") = false, py::arg("output_dir") = "");

    m.def("parse_query", &parse_query_py, py::arg("text"), py::arg("lexicon"));
    m.def("query_tasks", &query_tasks_py, py::arg("output_dir"), py::arg("text"),
          py::arg("top_k") = 10);
    m.def("battery", &battery_py, py::arg("output_dir"), py::arg("constructs"));
    m.def("task_distance", &task_distance_py, py::arg("output_dir"), py::arg("task_a"),
          py::arg("task_b"));
    m.def("hypergraph_metrics", &hypergraph_metrics_py, py::arg("output_dir"));
}
