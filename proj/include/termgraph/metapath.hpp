#pragma once

#include "termgraph/term_graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace termgraph {

struct WalkConfig {
    int walks_per_node = 1000;
    int walk_length = 100; // nodes per walk, start included
    std::uint64_t seed = 1;
    int workers = 1;
};

struct WalkReport {
    std::size_t walks = 0;
    std::size_t truncated = 0; // ended early: no opposite-kind neighbor
};

// Sequences of graph node indices; kinds strictly alternate along each walk.
using WalkCorpus = std::vector<std::vector<int>>;

// Metapath-constrained weighted random walks: every step moves to an
// opposite-kind neighbor sampled proportionally to edge weight. Walks that
// cannot continue are truncated, not restarted. Deterministic: the seed of
// walk w from node v is derived from (seed, v, w), independent of scheduling.
WalkCorpus generate_walks(const TermGraph& graph, const WalkConfig& cfg,
                          WalkReport* report = nullptr);

void write_walks(const WalkCorpus& corpus, const TermGraph& graph,
                 const std::filesystem::path& path);

struct SgnsConfig {
    int dim = 128;
    int window = 5; // maximum window; effective window uniform in [1, window]
    int negatives = 5;
    int epochs = 5;
    double lr_initial = 0.025;
    double lr_final = 1e-4;
    std::uint64_t seed = 1;
    int workers = 1; // 1 = deterministic; >1 = lock-free hogwild, run-dependent
};

// Input/output parameter tables plus the negative-sampling table
// (unigram^0.75 over the walk corpus).
struct SgnsModel {
    Eigen::MatrixXd input;  // V x dim, init uniform(-0.5/dim, 0.5/dim)
    Eigen::MatrixXd output; // V x dim, init zero
    std::vector<double> neg_cumulative;

    int vocab_size() const { return static_cast<int>(input.rows()); }
    int sample_negative(Rng& rng) const;
};

SgnsModel init_sgns(const std::vector<std::size_t>& counts, const SgnsConfig& cfg);

// loss = -log sigmoid(u_ctx . v_c) - sum_k log sigmoid(-u_nk . v_c), nats
double sgns_pair_loss(const SgnsModel& m, int center, int context,
                      const std::vector<int>& negatives);

struct SgnsGradients {
    Eigen::VectorXd center;                 // d loss / d input[center]
    std::map<int, Eigen::VectorXd> outputs; // d loss / d output[id], duplicates summed
};

SgnsGradients sgns_pair_gradients(const SgnsModel& m, int center, int context,
                                  const std::vector<int>& negatives);

// One SGD step; returns the pre-update loss.
double sgns_pair_update(SgnsModel& m, int center, int context, const std::vector<int>& negatives,
                        double lr);

struct TrainReport {
    std::vector<double> epoch_loss; // mean pair loss per epoch
    std::size_t pairs = 0;
};

// Node vectors from metapath walks. Query operations read input vectors only.
class NodeEmbeddingStore {
public:
    NodeEmbeddingStore() = default;
    NodeEmbeddingStore(std::map<std::string, Eigen::VectorXd> input,
                       std::map<std::string, Eigen::VectorXd> output);

    const std::map<std::string, Eigen::VectorXd>& input_vectors() const { return input_; }
    const std::map<std::string, Eigen::VectorXd>& output_vectors() const { return output_; }
    const Eigen::VectorXd* find(const std::string& term_id) const;
    int dim() const { return dim_; }
    std::size_t size() const { return input_.size(); }

    // word2vec text format: "N dim" then "term_id v1 ... vdim"
    void save(const std::filesystem::path& input_path,
              const std::filesystem::path& output_path) const;
    static NodeEmbeddingStore load(const std::filesystem::path& input_path,
                                   const std::filesystem::path& output_path);

private:
    std::map<std::string, Eigen::VectorXd> input_, output_;
    int dim_ = 0;
};

NodeEmbeddingStore train_sgns(const WalkCorpus& walks, const std::vector<std::string>& node_ids,
                              const SgnsConfig& cfg, TrainReport* report = nullptr);

} // namespace termgraph
