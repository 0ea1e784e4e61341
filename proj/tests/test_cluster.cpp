#include "termgraph/density_cluster.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

using namespace termgraph;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> xs) {
    Eigen::MatrixXd m(static_cast<int>(xs.size()), 1);
    int i = 0;
    for (double x : xs) m(i++, 0) = x;
    return m;
}

} // namespace

TEST_CASE("mutual reachability on collinear points, hand-computed cores") {
    Eigen::MatrixXd pts = column({0.0, 1.0, 10.0});
    Eigen::MatrixXd mr = mutual_reachability(pts, 2, Metric::Euclidean);
    // core_2: self counts, so core(0)=1, core(1)=1, core(10)=9
    CHECK(mr(0, 1) == doctest::Approx(1.0));
    CHECK(mr(1, 2) == doctest::Approx(9.0));
    CHECK(mr(0, 2) == doctest::Approx(10.0));
    for (int i = 0; i < 3; ++i) CHECK(mr(i, i) == 0.0);
    CHECK(mr == mr.transpose().eval());
}

TEST_CASE("min_samples=1 reduces mutual reachability to the distance matrix") {
    fixtures::Blobs b = fixtures::make_blobs(
        {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)}, 6, 0.3, 5);
    Eigen::MatrixXd mr = mutual_reachability(b.points, 1, Metric::Euclidean);
    Eigen::MatrixXd d = pairwise_distances(b.points, Metric::Euclidean);
    CHECK((mr - d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mutual reachability entries dominate the distance") {
    fixtures::Blobs b = fixtures::make_blobs({Eigen::VectorXd::Zero(2)}, 12, 1.0, 8);
    Eigen::MatrixXd mr = mutual_reachability(b.points, 4, Metric::Euclidean);
    Eigen::MatrixXd d = pairwise_distances(b.points, Metric::Euclidean);
    for (int i = 0; i < mr.rows(); ++i)
        for (int j = 0; j < mr.cols(); ++j)
            if (i != j) CHECK(mr(i, j) >= d(i, j) - 1e-15);
}

TEST_CASE("duplicate points keep a nonzero mutual reachability via core distance") {
    Eigen::MatrixXd pts = column({0.0, 0.0, 5.0, 5.0});
    Eigen::MatrixXd mr = mutual_reachability(pts, 3, Metric::Euclidean);
    // distances from either 0: {0, 0, 5, 5} -> 3rd smallest = 5
    CHECK(mr(0, 1) == doctest::Approx(5.0));
    CHECK(mr(2, 3) == doctest::Approx(5.0));
}

TEST_CASE("mutual reachability rejects N < min_samples") {
    Eigen::MatrixXd pts = column({0.0, 1.0});
    CHECK_THROWS(mutual_reachability(pts, 3, Metric::Euclidean));
    CHECK_THROWS(mutual_reachability(pts, 0, Metric::Euclidean));
}

TEST_CASE("two well-separated blobs condense to exactly two leaf clusters") {
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd c2 = Eigen::VectorXd::Constant(2, 10.0);
    fixtures::Blobs b = fixtures::make_blobs({c1, c2}, 5, 0.2, 3);
    ClusterModel model = cluster(b.points, {.min_samples = 2, .min_cluster_size = 3,
                                            .metric = Metric::Euclidean});
    CHECK(model.n_clusters() == 2);
    for (int l : model.labels()) CHECK(l >= 0);
    CHECK(oracle::adjusted_rand_index(model.labels(), b.labels) == doctest::Approx(1.0));
}

TEST_CASE("identical points form one cluster with no noise") {
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(10, 3);
    ClusterModel model = cluster(pts, {.min_samples = 2, .min_cluster_size = 3,
                                       .metric = Metric::Euclidean});
    CHECK(model.n_clusters() == 1);
    for (int l : model.labels()) CHECK(l == 0);
}

TEST_CASE("N <= min_cluster_size degenerates to a single root cluster") {
    Eigen::MatrixXd pts = column({0.0, 4.0, 9.0});
    ClusterModel model = cluster(pts, {.min_samples = 1, .min_cluster_size = 5,
                                       .metric = Metric::Euclidean});
    CHECK(model.n_clusters() == 1);
    for (int l : model.labels()) CHECK(l == 0);
}

TEST_CASE("planted three-blob fixture is recovered exactly") {
    std::vector<Eigen::VectorXd> centers;
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
        v[c] = 8.0;
        centers.push_back(v);
    }
    fixtures::Blobs b = fixtures::make_blobs(centers, 12, 0.3, 11);
    ClusterModel model = cluster(b.points, {.min_samples = 3, .min_cluster_size = 5,
                                            .metric = Metric::Euclidean});
    CHECK(model.n_clusters() == 3);
    CHECK(oracle::adjusted_rand_index(model.labels(), b.labels) == doctest::Approx(1.0));
}

TEST_CASE("MST weight equals the brute-force oracle on random fixtures") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        Rng rng(seed);
        int n = 10 + static_cast<int>(rng.next_below(41)); // up to 50
        Eigen::MatrixXd pts(n, 3);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 3; ++j) pts(i, j) = rng.next_normal();
        Eigen::MatrixXd mr = mutual_reachability(pts, 3, Metric::Euclidean);
        ClusterModel model = build_condensed_tree(mr, 4);
        CHECK(model.mst_total_weight() == oracle::brute_force_mst_weight(mr));
    }
}

TEST_CASE("clustering is deterministic") {
    fixtures::Blobs b = fixtures::make_blobs(
        {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 6.0)}, 8, 0.4, 21);
    ClusterParams params{.min_samples = 2, .min_cluster_size = 4, .metric = Metric::Euclidean};
    ClusterModel a = cluster(b.points, params);
    ClusterModel m2 = cluster(b.points, params);
    CHECK(a.labels() == m2.labels());
    CHECK(a.mst_total_weight() == m2.mst_total_weight());
}

TEST_CASE("stabilities are non-negative and cluster ids dense") {
    fixtures::Blobs b = fixtures::make_blobs(
        {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 7.0)}, 9, 0.5, 13);
    ClusterModel model = cluster(b.points, {.min_samples = 2, .min_cluster_size = 4,
                                            .metric = Metric::Euclidean});
    for (double s : model.stabilities()) CHECK(s >= 0.0);
    int k = model.n_clusters();
    for (int l : model.labels()) {
        CHECK(l >= -1);
        CHECK(l < k);
    }
}

TEST_CASE("soft membership rows are probability vectors") {
    fixtures::Blobs b = fixtures::make_blobs(
        {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 9.0)}, 7, 0.3, 17);
    ClusterModel model = cluster(b.points, {.min_samples = 2, .min_cluster_size = 3,
                                            .metric = Metric::Euclidean});
    REQUIRE(model.n_clusters() == 2);
    Eigen::MatrixXd memb = model.soft_membership_matrix(b.points);
    for (int i = 0; i < memb.rows(); ++i) {
        CHECK(memb.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
        for (int j = 0; j < memb.cols(); ++j) CHECK(memb(i, j) >= 0.0);
    }
}

TEST_CASE("a point at an exemplar belongs to that exemplar's cluster") {
    fixtures::Blobs b = fixtures::make_blobs(
        {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 9.0),
         Eigen::VectorXd::Constant(2, -9.0)},
        8, 0.3, 29);
    ClusterModel model = cluster(b.points, {.min_samples = 2, .min_cluster_size = 4,
                                            .metric = Metric::Euclidean});
    REQUIRE(model.n_clusters() == 3);
    for (int j = 0; j < model.n_clusters(); ++j) {
        REQUIRE(!model.exemplar_indices()[j].empty());
        int exemplar = model.exemplar_indices()[j][0];
        Eigen::VectorXd m = model.soft_membership(b.points.row(exemplar));
        int argmax = 0;
        m.maxCoeff(&argmax);
        CHECK(argmax == j);
    }
}

TEST_CASE("equidistant point splits membership 50/50") {
    // two tight pairs at x=0 and x=10; probe at x=5
    Eigen::MatrixXd pts = column({0.0, 0.01, 0.02, 10.0, 10.01, 10.02});
    ClusterModel model = cluster(pts, {.min_samples = 1, .min_cluster_size = 2,
                                       .metric = Metric::Euclidean});
    REQUIRE(model.n_clusters() == 2);
    // exemplar sets are symmetric around 5 up to the 0.01 jitter
    Eigen::VectorXd probe(1);
    double mid = 0.0;
    for (int j = 0; j < 2; ++j) {
        const auto& ex = model.exemplar_indices()[j];
        double closest = 1e9;
        for (int e : ex) closest = std::min(closest, pts(e, 0));
        mid += closest;
    }
    probe[0] = mid / 2.0 + 0.005; // halfway between the two closest exemplars
    Eigen::VectorXd m = model.soft_membership(probe);
    CHECK(m[0] == doctest::Approx(0.5).epsilon(0.02));
    CHECK(m[1] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("exactly equidistant probe splits membership 0.5/0.5 to 1e-9") {
    // binary-representable coordinates so both distances are bit-identical
    Eigen::MatrixXd pts = column({0.0, 0.25, 8.0, 8.25});
    ClusterModel model = cluster(pts, {.min_samples = 1, .min_cluster_size = 2,
                                       .metric = Metric::Euclidean});
    REQUIRE(model.n_clusters() == 2);
    // exemplar sets are {0, 0.25} and {8, 8.25}; 4.125 is 3.875 from both
    Eigen::VectorXd probe(1);
    probe[0] = 4.125;
    Eigen::VectorXd m = model.soft_membership(probe);
    CHECK(std::abs(m[0] - 0.5) <= 1e-9);
    CHECK(std::abs(m[1] - 0.5) <= 1e-9);
}

TEST_CASE("soft membership validates dimensions") {
    fixtures::Blobs b = fixtures::make_blobs({Eigen::VectorXd::Zero(3)}, 6, 0.5, 7);
    ClusterModel model = cluster(b.points, {.min_samples = 2, .min_cluster_size = 3,
                                            .metric = Metric::Euclidean});
    Eigen::VectorXd wrong(5);
    wrong.setZero();
    CHECK_THROWS(model.soft_membership(wrong));
}

TEST_CASE("condensed tree exports as csv") {
    fixtures::TempDir dir("tree_csv");
    fixtures::Blobs b = fixtures::make_blobs(
        {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 8.0)}, 6, 0.4, 23);
    ClusterModel model = cluster(b.points, {.min_samples = 2, .min_cluster_size = 3,
                                            .metric = Metric::Euclidean});
    model.export_condensed_csv(dir.file("tree.csv"));
    std::string body = read_file(dir.file("tree.csv"));
    CHECK(body.rfind("parent,child,lambda,size", 0) == 0);
    CHECK(std::count(body.begin(), body.end(), '\n') >= 12); // header + one row per point
}

TEST_CASE("cosine metric clusters direction groups") {
    Rng rng(41);
    Eigen::MatrixXd pts(16, 3);
    for (int i = 0; i < 8; ++i) {
        pts.row(i) = Eigen::RowVector3d(1.0, 0.0, 0.0) * (1.0 + rng.next_double());
        pts.row(8 + i) = Eigen::RowVector3d(0.0, 1.0, 0.0) * (1.0 + rng.next_double());
        pts(i, 1) = 0.05 * rng.next_double();
        pts(8 + i, 0) = 0.05 * rng.next_double();
    }
    ClusterModel model = cluster(pts, {.min_samples = 2, .min_cluster_size = 4,
                                       .metric = Metric::Cosine});
    CHECK(model.n_clusters() == 2);
    std::vector<int> planted(16, 0);
    for (int i = 8; i < 16; ++i) planted[static_cast<std::size_t>(i)] = 1;
    CHECK(oracle::adjusted_rand_index(model.labels(), planted) == doctest::Approx(1.0));
}
