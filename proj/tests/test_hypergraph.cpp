#include "termgraph/hypergraph.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

using namespace termgraph;

namespace {

TermGraph graph_with_weights(const std::vector<double>& weights) {
    // chain c0-t0, c0-t1, ... enough nodes for |weights| edges
    std::vector<std::string> ids = {"c0"};
    std::vector<TermKind> kinds = {TermKind::Construct};
    std::vector<std::tuple<std::string, std::string, double>> edges;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        ids.push_back("t" + std::to_string(i));
        kinds.push_back(TermKind::Task);
        edges.emplace_back("c0", "t" + std::to_string(i), weights[i]);
    }
    return TermGraph::from_edges(ids, kinds, edges);
}

} // namespace

TEST_CASE("threshold arithmetic: weights {1,2,3,4,5} keep only 5") {
    TermGraph g = graph_with_weights({1, 2, 3, 4, 5});
    ThresholdReport rep;
    auto kept = threshold_edges(g, ThresholdMode::Strong, &rep);
    CHECK(rep.median == doctest::Approx(3.0));
    CHECK(rep.sd == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].weight == doctest::Approx(5.0));
}

TEST_CASE("threshold arithmetic: equal weights keep everything (sd = 0)") {
    TermGraph g = graph_with_weights({2, 2, 2, 2});
    ThresholdReport rep;
    auto kept = threshold_edges(g, ThresholdMode::Strong, &rep);
    CHECK(rep.degenerate_all_kept);
    CHECK(kept.size() == 4);
}

TEST_CASE("threshold arithmetic: weights {1,10} retain nothing, flagged") {
    TermGraph g = graph_with_weights({1, 10});
    ThresholdReport rep;
    auto kept = threshold_edges(g, ThresholdMode::Strong, &rep);
    CHECK(rep.median == doctest::Approx(5.5));
    CHECK(rep.sd == doctest::Approx(std::sqrt(40.5)).epsilon(1e-12));
    CHECK(kept.empty());
    CHECK(rep.none_retained);
}

TEST_CASE("band mode keeps both tails") {
    TermGraph g = graph_with_weights({1, 2, 3, 4, 5});
    auto kept = threshold_edges(g, ThresholdMode::Band);
    // median 3, sd 1.5811: keep w < 1.4189 or w > 4.5811 -> {1, 5}
    REQUIRE(kept.size() == 2);
    std::vector<double> ws = {kept[0].weight, kept[1].weight};
    std::sort(ws.begin(), ws.end());
    CHECK(ws[0] == doctest::Approx(1.0));
    CHECK(ws[1] == doctest::Approx(5.0));
}

TEST_CASE("thresholding returns a subset of the edges") {
    Rng rng(3);
    std::vector<double> ws;
    for (int i = 0; i < 12; ++i) ws.push_back(0.5 + 10.0 * rng.next_double());
    TermGraph g = graph_with_weights(ws);
    auto kept = threshold_edges(g, ThresholdMode::Strong);
    CHECK(kept.size() <= g.edges().size());
    for (const auto& e : kept) {
        bool found = false;
        for (const auto& orig : g.edges())
            if (orig.u == e.u && orig.v == e.v && orig.weight == e.weight) found = true;
        CHECK(found);
    }
    CHECK_THROWS(threshold_edges(graph_with_weights({1.0}))); // needs >= 2 edges
}

TEST_CASE("hypernomy and impurity metrics") {
    std::set<std::string> tasks = {"a", "b", "c", "d"};
    std::map<std::string, std::set<std::string>> edges = {
        {"c1", {"a", "b", "c"}}, {"c2", {"b", "c", "d"}}, {"c3", {"a", "b", "c"}}, {"c4", {}}};
    std::map<std::string, std::map<std::string, double>> memb;
    for (const auto& [c, ts] : edges)
        for (const auto& t : ts) memb[c][t] = 0.5;
    Hypergraph h(tasks, edges, memb);

    CHECK(h.hypernomy("c1", "c3") == doctest::Approx(1.0));
    CHECK(h.hypernomy("c1", "c2") == doctest::Approx(0.5)); // |{b,c}| / |{a,b,c,d}|
    CHECK(h.hypernomy("c4", "c4") == 0.0);                  // both empty
    CHECK(h.hypernomy("c1", "c2") == h.hypernomy("c2", "c1"));

    CHECK(h.task_impurity("b") == 3);
    CHECK(h.task_impurity("d") == 1);
    CHECK_THROWS(h.task_impurity("zz"));
    CHECK_THROWS(h.hypernomy("zz", "c1"));

    // double-counting identity
    std::size_t impurity_sum = 0;
    for (const auto& t : tasks) impurity_sum += h.task_impurity(t);
    std::size_t edge_sum = 0;
    for (const auto& [c, ts] : edges) edge_sum += ts.size();
    CHECK(impurity_sum == edge_sum);

    CHECK(h.empty_constructs() == std::vector<std::string>{"c4"});
}

namespace {

struct PlantedHyper {
    TermGraph graph;
    NodeEmbeddingStore embeddings;
    std::vector<std::vector<std::string>> communities; // tasks per community
    std::vector<std::string> constructs;
};

PlantedHyper planted_hypergraph_fixture(int communities = 3, int tasks_per = 5,
                                        std::uint64_t seed = 19) {
    PlantedHyper out;
    std::vector<std::string> ids;
    std::vector<TermKind> kinds;
    std::vector<int> node_comm;
    for (int c = 0; c < communities; ++c) {
        std::string construct = "c" + std::to_string(c);
        out.constructs.push_back(construct);
        ids.push_back(construct);
        kinds.push_back(TermKind::Construct);
        node_comm.push_back(c);
        std::vector<std::string> tasks;
        for (int t = 0; t < tasks_per; ++t) {
            std::string task = "t" + std::to_string(c) + "_" + std::to_string(t);
            tasks.push_back(task);
            ids.push_back(task);
            kinds.push_back(TermKind::Task);
            node_comm.push_back(c);
        }
        out.communities.push_back(tasks);
    }
    const int n = static_cast<int>(ids.size());
    // sorted order for divergence construction
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    std::vector<std::string> sids;
    std::vector<TermKind> skinds;
    std::vector<int> scomm;
    for (std::size_t k : order) {
        sids.push_back(ids[k]);
        skinds.push_back(kinds[k]);
        scomm.push_back(node_comm[k]);
    }
    Eigen::MatrixXd div(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            div(i, j) = i == j ? 0.0 : (scomm[static_cast<std::size_t>(i)] ==
                                                scomm[static_cast<std::size_t>(j)]
                                            ? 0.05
                                            : 0.9);
    out.graph = fixtures::graph_from_divergence(sids, skinds, div);

    // embedding vectors: community center + jitter
    Rng rng(seed);
    std::map<std::string, Eigen::VectorXd> in, outv;
    for (std::size_t k = 0; k < sids.size(); ++k) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
        v[scomm[k]] = 4.0;
        for (int j = 0; j < 8; ++j) v[j] += 0.1 * rng.next_normal();
        in.emplace(sids[k], v);
        outv.emplace(sids[k], Eigen::VectorXd::Zero(8));
    }
    out.embeddings = NodeEmbeddingStore(std::move(in), std::move(outv));
    return out;
}

} // namespace

TEST_CASE("planted communities become matching hyperedges") {
    PlantedHyper p = planted_hypergraph_fixture();
    ClusterParams cp{.min_samples = 2, .min_cluster_size = 4, .metric = Metric::Euclidean};
    HypergraphBuildReport report;
    Hypergraph h = build_hypergraph(p.graph, p.embeddings, cp, 0.7, ThresholdMode::Strong,
                                    &report);

    CHECK(report.clusters == 3);
    // hyperedge (c) == planted community tasks: score with ARI over task labels
    std::vector<int> truth, predicted;
    for (std::size_t c = 0; c < p.communities.size(); ++c) {
        const auto& edge = h.hyperedge(p.constructs[c]);
        for (std::size_t cc = 0; cc < p.communities.size(); ++cc)
            for (const auto& t : p.communities[cc])
                if (edge.count(t)) {
                    truth.push_back(static_cast<int>(cc));
                    predicted.push_back(static_cast<int>(c));
                }
    }
    REQUIRE(!truth.empty());
    CHECK(oracle::adjusted_rand_index(truth, predicted) >= 0.9);

    // memberships recorded, in range
    for (const auto& c : p.constructs)
        for (const auto& t : h.hyperedge(c)) {
            double m = h.membership(c, t);
            CHECK(m >= 0.0);
            CHECK(m <= 1.0);
        }
}

TEST_CASE("an isolated construct yields an empty hyperedge, reported") {
    PlantedHyper p = planted_hypergraph_fixture();
    // add a construct far from everything with its own direction
    std::vector<std::string> ids = p.graph.ids();
    std::vector<TermKind> kinds = p.graph.kinds();
    ids.push_back("zz_loner");
    kinds.push_back(TermKind::Construct);
    const int n = static_cast<int>(ids.size());
    Eigen::MatrixXd div(n, n);
    div.setConstant(0.98);
    div.topLeftCorner(n - 1, n - 1) = p.graph.divergence();
    for (int i = 0; i < n; ++i) div(i, i) = 0.0;
    // ids stay sorted because "zz_" sorts last
    TermGraph g2 = fixtures::graph_from_divergence(ids, kinds, div);

    std::map<std::string, Eigen::VectorXd> in = p.embeddings.input_vectors();
    std::map<std::string, Eigen::VectorXd> out = p.embeddings.output_vectors();
    Eigen::VectorXd lone = Eigen::VectorXd::Zero(8);
    lone[7] = 9.0;
    in.emplace("zz_loner", lone);
    out.emplace("zz_loner", Eigen::VectorXd::Zero(8));
    NodeEmbeddingStore store(std::move(in), std::move(out));

    ClusterParams cp{.min_samples = 2, .min_cluster_size = 4, .metric = Metric::Euclidean};
    Hypergraph h = build_hypergraph(g2, store, cp, 0.7);
    CHECK(h.hyperedge("zz_loner").empty());
    CHECK(std::find(h.empty_constructs().begin(), h.empty_constructs().end(), "zz_loner") !=
          h.empty_constructs().end());
}

TEST_CASE("twin constructs get identical hyperedges (hypernomy signature)") {
    PlantedHyper p = planted_hypergraph_fixture(2, 4);
    // duplicate construct c0 as c0twin: same divergences, same embedding
    std::vector<std::string> ids = p.graph.ids();
    std::vector<TermKind> kinds = p.graph.kinds();
    int c0 = p.graph.index_of("c0");
    ids.push_back("c0twin");
    kinds.push_back(TermKind::Construct);
    const int n = static_cast<int>(ids.size());
    Eigen::MatrixXd div(n, n);
    div.topLeftCorner(n - 1, n - 1) = p.graph.divergence();
    for (int i = 0; i < n - 1; ++i) {
        div(i, n - 1) = p.graph.divergence()(i, c0);
        div(n - 1, i) = div(i, n - 1);
    }
    div(c0, n - 1) = div(n - 1, c0) = 0.02;
    div(n - 1, n - 1) = 0.0;
    // "c0twin" sorts right after "c0" and before "c1": rebuild sorted
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    std::vector<std::string> sids;
    std::vector<TermKind> skinds;
    Eigen::MatrixXd sdiv(n, n);
    for (int i = 0; i < n; ++i) {
        sids.push_back(ids[order[static_cast<std::size_t>(i)]]);
        skinds.push_back(kinds[order[static_cast<std::size_t>(i)]]);
        for (int j = 0; j < n; ++j)
            sdiv(i, j) = div(static_cast<int>(order[static_cast<std::size_t>(i)]),
                             static_cast<int>(order[static_cast<std::size_t>(j)]));
    }
    TermGraph g2 = fixtures::graph_from_divergence(sids, skinds, sdiv);

    auto in = p.embeddings.input_vectors();
    auto out = p.embeddings.output_vectors();
    in.emplace("c0twin", in.at("c0"));
    out.emplace("c0twin", out.at("c0"));
    NodeEmbeddingStore store(std::move(in), std::move(out));

    ClusterParams cp{.min_samples = 2, .min_cluster_size = 4, .metric = Metric::Euclidean};
    Hypergraph h = build_hypergraph(g2, store, cp, 0.7);
    CHECK(h.hyperedge("c0twin") == h.hyperedge("c0"));
    CHECK(h.hypernomy("c0", "c0twin") == doctest::Approx(1.0));
}

TEST_CASE("hypergraph save/load and csv exports") {
    fixtures::TempDir dir("hyper_rt");
    PlantedHyper p = planted_hypergraph_fixture();
    ClusterParams cp{.min_samples = 2, .min_cluster_size = 4, .metric = Metric::Euclidean};
    Hypergraph h = build_hypergraph(p.graph, p.embeddings, cp, 0.7);

    h.save(dir.file("h.json"));
    Hypergraph loaded = Hypergraph::load(dir.file("h.json"));
    CHECK(loaded.hyperedges() == h.hyperedges());
    CHECK(loaded.task_nodes() == h.task_nodes());
    for (const auto& c : p.constructs)
        for (const auto& t : loaded.hyperedge(c))
            CHECK(loaded.membership(c, t) == h.membership(c, t));

    // wire format: flat construct -> task list object
    h.export_hyperedges_json(dir.file("flat.json"));
    auto flat = nlohmann::json::parse(read_file(dir.file("flat.json")));
    REQUIRE(flat.is_object());
    CHECK(flat.size() == p.constructs.size());
    for (const auto& c : p.constructs) {
        REQUIRE(flat.contains(c));
        CHECK(flat[c].is_array());
        CHECK(flat[c].size() == h.hyperedge(c).size());
    }

    h.export_membership_csv(dir.file("m.csv"));
    h.export_incidence_csv(dir.file("i.csv"));
    std::string inc = read_file(dir.file("i.csv"));
    CHECK(inc.rfind("task,", 0) == 0);
    CHECK(std::count(inc.begin(), inc.end(), '\n') == 16); // header + 15 tasks
    std::string mem = read_file(dir.file("m.csv"));
    CHECK(mem.rfind("construct,task,membership", 0) == 0);
}

TEST_CASE("missing node embeddings are fatal") {
    PlantedHyper p = planted_hypergraph_fixture();
    auto in = p.embeddings.input_vectors();
    auto out = p.embeddings.output_vectors();
    in.erase("c0");
    out.erase("c0");
    NodeEmbeddingStore store(std::move(in), std::move(out));
    ClusterParams cp{.min_samples = 2, .min_cluster_size = 4, .metric = Metric::Euclidean};
    CHECK_THROWS_WITH_AS(build_hypergraph(p.graph, store, cp, 0.7),
                         doctest::Contains("no embedding"), std::runtime_error);
}
