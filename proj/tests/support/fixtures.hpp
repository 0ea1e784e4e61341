#pragma once

#include "termgraph/corpus.hpp"
#include "termgraph/term_graph.hpp"
#include "termgraph/util.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

namespace fixtures {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path() / "termgraph_tests";
        std::filesystem::create_directories(base);
        static std::atomic<unsigned> counter{0};
        path_ = base / (tag + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path write_lexicon_file(const TempDir& dir, const std::string& name,
                                                const std::string& body) {
    auto path = dir.file(name);
    termgraph::write_file(path, body);
    return path;
}

// Three terms: tasks "stroop", "nback"; construct "attention".
inline std::filesystem::path small_lexicon(const TempDir& dir) {
    return write_lexicon_file(dir, "lexicon.json", R"([
  {"id": "stroop", "name": "Stroop Task", "kind": "task", "queries": ["stroop[tiab]"]},
  {"id": "nback", "name": "N-Back Task", "kind": "task", "queries": ["n-back[tiab]"]},
  {"id": "attention", "name": "Attentional Control", "kind": "construct", "queries": ["attentional control[tiab]"]}
])");
}

inline std::string doc_line(const std::string& id, const std::vector<std::string>& labels,
                            int year = 2001, const std::string& journal = "Nature",
                            const std::string& title = "t", const std::string& abs = "a") {
    termgraph::Document d;
    d.doc_id = id;
    d.title = title;
    d.abstract_text = abs;
    d.year = year;
    d.journal = journal;
    d.labels.insert(labels.begin(), labels.end());
    return termgraph::document_to_json(d) + "\n";
}

// Gaussian point blobs with planted labels.
struct Blobs {
    Eigen::MatrixXd points;
    std::vector<int> labels;
};

inline Blobs make_blobs(const std::vector<Eigen::VectorXd>& centers, int per_blob, double sigma,
                        std::uint64_t seed) {
    termgraph::Rng rng(seed);
    const int dim = static_cast<int>(centers.front().size());
    Blobs b;
    b.points.resize(static_cast<int>(centers.size()) * per_blob, dim);
    int row = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (int i = 0; i < per_blob; ++i) {
            for (int j = 0; j < dim; ++j)
                b.points(row, j) = centers[c][j] + sigma * rng.next_normal();
            b.labels.push_back(static_cast<int>(c));
            ++row;
        }
    }
    return b;
}

// Test-only construction of a TermGraph with a prescribed divergence matrix
// (weights derive from it as in the real build).
inline termgraph::TermGraph graph_from_divergence(const std::vector<std::string>& ids,
                                                  const std::vector<termgraph::TermKind>& kinds,
                                                  const Eigen::MatrixXd& divergence,
                                                  double epsilon = 1e-3) {
    using namespace termgraph;
    const int n = static_cast<int>(ids.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd var = Eigen::VectorXd::Ones(2);
    nlohmann::json doc;
    doc["epsilon"] = epsilon;
    auto nodes = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
        nlohmann::json nd;
        nd["id"] = ids[static_cast<std::size_t>(i)];
        nd["kind"] = to_string(kinds[static_cast<std::size_t>(i)]);
        nd["doc_count"] = 2;
        nd["mean"] = std::vector<double>{0.0, 0.0};
        nd["variance"] = std::vector<double>{1.0, 1.0};
        nodes.push_back(nd);
    }
    doc["nodes"] = nodes;
    auto div = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
        auto row = nlohmann::json::array();
        for (int j = 0; j < n; ++j) row.push_back(divergence(i, j));
        div.push_back(row);
    }
    doc["divergence"] = div;

    TempDir tmp("graph_fixture");
    auto path = tmp.file("graph.json");
    write_file(path, doc.dump());
    return TermGraph::load(path);
}

// ---------------------------------------------------------------------------
// Planted-structure corpus for the end-to-end tests: `communities` groups,
// each one construct plus `tasks_per` tasks; every document's text is drawn
// from the community's pool of exact strings so the hash-based mock embedder
// produces a finite, community-specific set of vectors.

struct PlantedCorpus {
    std::filesystem::path lexicon_path;
    std::filesystem::path corpus_path;
    std::vector<std::vector<std::string>> community_tasks;
    std::vector<std::string> community_constructs;
};

inline PlantedCorpus write_planted_corpus(const TempDir& dir, int communities = 3,
                                          int tasks_per = 5, int docs_per_term = 40,
                                          std::uint64_t seed = 99, int pool_size = 4) {
    using termgraph::Rng;
    Rng rng(seed);
    PlantedCorpus out;

    nlohmann::json lex = nlohmann::json::array();
    std::vector<std::vector<std::string>> pools;
    const char* journals[] = {"Journal of Social Psychology", "Psychological Review",
                              "Nature Neuroscience", "Cognitive Science Quarterly", "Plain Letters"};
    for (int c = 0; c < communities; ++c) {
        std::vector<std::string> pool;
        for (int p = 0; p < pool_size; ++p)
            pool.push_back("community " + std::to_string(c) + " canonical sentence " +
                           std::to_string(p));
        pools.push_back(pool);

        std::string construct = "construct_c" + std::to_string(c);
        out.community_constructs.push_back(construct);
        lex.push_back({{"id", construct},
                       {"name", "Construct C" + std::to_string(c)},
                       {"kind", "construct"},
                       {"queries", {construct + "[tiab]"}}});
        std::vector<std::string> tasks;
        for (int t = 0; t < tasks_per; ++t) {
            std::string task = "task_c" + std::to_string(c) + "_" + std::to_string(t);
            tasks.push_back(task);
            lex.push_back({{"id", task},
                           {"name", "Task C" + std::to_string(c) + " " + std::to_string(t)},
                           {"kind", "task"},
                           {"queries", {task + "[tiab]"}}});
        }
        out.community_tasks.push_back(tasks);
    }
    out.lexicon_path = dir.file("planted_lexicon.json");
    termgraph::write_file(out.lexicon_path, lex.dump(2));

    std::string jsonl;
    int doc_no = 0;
    for (int c = 0; c < communities; ++c) {
        std::vector<std::string> terms = out.community_tasks[static_cast<std::size_t>(c)];
        terms.push_back(out.community_constructs[static_cast<std::size_t>(c)]);
        for (const auto& term : terms) {
            for (int d = 0; d < docs_per_term; ++d) {
                termgraph::Document doc;
                doc.doc_id = "pmid" + std::to_string(100000 + doc_no++);
                const auto& pool = pools[static_cast<std::size_t>(c)];
                // one pool pick per document so each community embeds onto a
                // small fixed set of points
                const std::string& text = pool[rng.next_below(pool.size())];
                doc.title = text;
                doc.abstract_text = text;
                doc.year = 1980 + static_cast<int>(rng.next_below(40));
                doc.journal = journals[rng.next_below(5)];
                doc.labels = {term};
                // occasional task+construct co-label inside the community
                if (rng.next_double() < 0.25)
                    doc.labels.insert(out.community_constructs[static_cast<std::size_t>(c)]);
                jsonl += termgraph::document_to_json(doc) + "\n";
            }
        }
    }
    out.corpus_path = dir.file("planted_corpus.jsonl");
    termgraph::write_file(out.corpus_path, jsonl);
    return out;
}

} // namespace fixtures
