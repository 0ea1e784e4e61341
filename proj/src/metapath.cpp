#include "termgraph/metapath.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace termgraph {

namespace {

struct AdjacencyTable {
    // per node: opposite-kind neighbors with cumulative weights
    std::vector<std::vector<int>> targets;
    std::vector<std::vector<double>> cumweight;
};

AdjacencyTable build_adjacency(const TermGraph& g) {
    const int n = static_cast<int>(g.size());
    AdjacencyTable t;
    t.targets.resize(n);
    t.cumweight.resize(n);
    std::vector<std::vector<std::pair<int, double>>> nbrs(n);
    for (const auto& e : g.edges()) {
        if (g.kinds()[static_cast<std::size_t>(e.u)] != g.kinds()[static_cast<std::size_t>(e.v)]) {
            nbrs[e.u].emplace_back(e.v, e.weight);
            nbrs[e.v].emplace_back(e.u, e.weight);
        }
    }
    for (int v = 0; v < n; ++v) {
        std::sort(nbrs[v].begin(), nbrs[v].end());
        double acc = 0.0;
        for (auto [to, w] : nbrs[v]) {
            acc += w;
            t.targets[v].push_back(to);
            t.cumweight[v].push_back(acc);
        }
    }
    return t;
}

int sample_cumulative(const std::vector<double>& cum, double r01) {
    double r = r01 * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), r);
    if (it == cum.end()) --it;
    return static_cast<int>(it - cum.begin());
}

} // namespace

WalkCorpus generate_walks(const TermGraph& graph, const WalkConfig& cfg, WalkReport* report) {
    if (cfg.walk_length < 2) throw std::runtime_error("walk_length must be >= 2");
    if (cfg.walks_per_node < 1) throw std::runtime_error("walks_per_node must be >= 1");
    std::size_t tasks = std::count(graph.kinds().begin(), graph.kinds().end(), TermKind::Task);
    if (tasks == 0 || tasks == graph.kinds().size())
        throw std::runtime_error("walks need at least one node of each kind");

    const int n = static_cast<int>(graph.size());
    AdjacencyTable adj = build_adjacency(graph);

    WalkCorpus corpus(static_cast<std::size_t>(n) * cfg.walks_per_node);
    std::atomic<std::size_t> truncated{0};

    auto run_node = [&](int v) {
        std::size_t local_trunc = 0;
        for (int w = 0; w < cfg.walks_per_node; ++w) {
            Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(v),
                             static_cast<std::uint64_t>(w)));
            std::vector<int>& walk = corpus[static_cast<std::size_t>(v) * cfg.walks_per_node + w];
            walk.reserve(static_cast<std::size_t>(cfg.walk_length));
            walk.push_back(v);
            int cur = v;
            for (int step = 1; step < cfg.walk_length; ++step) {
                const auto& cand = adj.targets[cur];
                if (cand.empty()) {
                    ++local_trunc;
                    break;
                }
                cur = cand[sample_cumulative(adj.cumweight[cur], rng.next_double())];
                walk.push_back(cur);
            }
        }
        truncated.fetch_add(local_trunc, std::memory_order_relaxed);
    };

    int nw = std::max(1, cfg.workers);
    if (nw == 1) {
        for (int v = 0; v < n; ++v) run_node(v);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < nw; ++t)
            pool.emplace_back([&] {
                for (int v = next.fetch_add(1); v < n; v = next.fetch_add(1)) run_node(v);
            });
        for (auto& th : pool) th.join();
    }

    if (report) {
        report->walks = corpus.size();
        report->truncated = truncated.load();
    }
    return corpus;
}

void write_walks(const WalkCorpus& corpus, const TermGraph& graph,
                 const std::filesystem::path& path) {
    std::string out;
    for (const auto& walk : corpus) {
        for (std::size_t i = 0; i < walk.size(); ++i) {
            if (i) out += ' ';
            out += graph.ids()[static_cast<std::size_t>(walk[i])];
        }
        out += '\n';
    }
    write_file(path, out);
}

int SgnsModel::sample_negative(Rng& rng) const {
    double r = rng.next_double() * neg_cumulative.back();
    auto it = std::upper_bound(neg_cumulative.begin(), neg_cumulative.end(), r);
    if (it == neg_cumulative.end()) --it;
    return static_cast<int>(it - neg_cumulative.begin());
}

SgnsModel init_sgns(const std::vector<std::size_t>& counts, const SgnsConfig& cfg) {
    if (cfg.dim < 2) throw std::runtime_error("sgns dim must be >= 2");
    if (cfg.window < 1) throw std::runtime_error("sgns window must be >= 1");
    if (cfg.negatives < 1) throw std::runtime_error("sgns negatives must be >= 1");
    const int v = static_cast<int>(counts.size());
    if (v == 0) throw std::runtime_error("sgns: empty vocabulary");

    SgnsModel m;
    m.input.resize(v, cfg.dim);
    m.output = Eigen::MatrixXd::Zero(v, cfg.dim);
    Rng rng(mix_seed(cfg.seed, 0x5741u));
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < cfg.dim; ++j)
            m.input(i, j) = (rng.next_double() - 0.5) / cfg.dim;

    m.neg_cumulative.resize(static_cast<std::size_t>(v));
    double acc = 0.0;
    for (int i = 0; i < v; ++i) {
        acc += std::pow(static_cast<double>(counts[static_cast<std::size_t>(i)]), 0.75);
        m.neg_cumulative[static_cast<std::size_t>(i)] = acc;
    }
    if (acc <= 0.0) throw std::runtime_error("sgns: all unigram counts are zero");
    return m;
}

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
} // namespace

double sgns_pair_loss(const SgnsModel& m, int center, int context,
                      const std::vector<int>& negatives) {
    const auto v = m.input.row(center);
    double loss = -std::log(sigmoid(m.output.row(context).dot(v)));
    for (int n : negatives) loss -= std::log(sigmoid(-m.output.row(n).dot(v)));
    return loss;
}

SgnsGradients sgns_pair_gradients(const SgnsModel& m, int center, int context,
                                  const std::vector<int>& negatives) {
    const Eigen::VectorXd v = m.input.row(center).transpose();
    SgnsGradients g;
    g.center = Eigen::VectorXd::Zero(v.size());

    double s = sigmoid(m.output.row(context).dot(v));
    g.center += (s - 1.0) * m.output.row(context).transpose();
    g.outputs[context] = (s - 1.0) * v;
    for (int n : negatives) {
        double sn = sigmoid(m.output.row(n).dot(v));
        g.center += sn * m.output.row(n).transpose();
        auto [it, fresh] = g.outputs.try_emplace(n, Eigen::VectorXd::Zero(v.size()));
        it->second += sn * v;
    }
    return g;
}

double sgns_pair_update(SgnsModel& m, int center, int context, const std::vector<int>& negatives,
                        double lr) {
    const Eigen::VectorXd v = m.input.row(center).transpose();
    double loss = 0.0;
    Eigen::VectorXd center_grad = Eigen::VectorXd::Zero(v.size());

    double s = sigmoid(m.output.row(context).dot(v));
    loss -= std::log(s);
    center_grad += (s - 1.0) * m.output.row(context).transpose();
    m.output.row(context) -= lr * (s - 1.0) * v.transpose();

    for (int n : negatives) {
        double sn = sigmoid(m.output.row(n).dot(v));
        loss -= std::log(1.0 - sn);
        center_grad += sn * m.output.row(n).transpose();
        m.output.row(n) -= lr * sn * v.transpose();
    }
    m.input.row(center) -= lr * center_grad.transpose();
    if (!std::isfinite(loss))
        throw std::runtime_error("sgns: non-finite pair loss (learning rate too high?)");
    return loss;
}

NodeEmbeddingStore::NodeEmbeddingStore(std::map<std::string, Eigen::VectorXd> input,
                                       std::map<std::string, Eigen::VectorXd> output)
    : input_(std::move(input)), output_(std::move(output)) {
    if (input_.size() != output_.size())
        throw std::runtime_error("embedding store: input/output key sets differ");
    for (const auto& [id, v] : input_) {
        if (!output_.count(id))
            throw std::runtime_error("embedding store: missing output vector for '" + id + "'");
        if (dim_ == 0) dim_ = static_cast<int>(v.size());
        if (v.size() != dim_ || output_.at(id).size() != dim_)
            throw std::runtime_error("embedding store: inconsistent dimensions");
        if (!v.allFinite() || !output_.at(id).allFinite())
            throw std::runtime_error("embedding store: non-finite vector for '" + id + "'");
    }
}

const Eigen::VectorXd* NodeEmbeddingStore::find(const std::string& term_id) const {
    auto it = input_.find(term_id);
    return it == input_.end() ? nullptr : &it->second;
}

namespace {

void save_w2v(const std::map<std::string, Eigen::VectorXd>& vecs, int dim,
              const std::filesystem::path& path) {
    std::string out = std::to_string(vecs.size()) + " " + std::to_string(dim) + "\n";
    for (const auto& [id, v] : vecs) {
        out += id;
        for (int i = 0; i < v.size(); ++i) out += " " + format_double(v[i]);
        out += '\n';
    }
    write_file(path, out);
}

std::map<std::string, Eigen::VectorXd> load_w2v(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path.string());
    std::string header;
    std::getline(in, header);
    std::size_t count = 0;
    int dim = 0;
    if (std::sscanf(header.c_str(), "%zu %d", &count, &dim) != 2 || dim < 1)
        throw std::runtime_error("bad word2vec header in " + path.string());
    std::map<std::string, Eigen::VectorXd> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto parts = split(line, ' ');
        if (static_cast<int>(parts.size()) != dim + 1)
            throw std::runtime_error("bad word2vec row in " + path.string());
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = parse_double(parts[static_cast<std::size_t>(i) + 1]);
        out.emplace(parts[0], std::move(v));
    }
    if (out.size() != count)
        throw std::runtime_error("word2vec count mismatch in " + path.string());
    return out;
}

} // namespace

void NodeEmbeddingStore::save(const std::filesystem::path& input_path,
                              const std::filesystem::path& output_path) const {
    save_w2v(input_, dim_, input_path);
    save_w2v(output_, dim_, output_path);
}

NodeEmbeddingStore NodeEmbeddingStore::load(const std::filesystem::path& input_path,
                                            const std::filesystem::path& output_path) {
    return NodeEmbeddingStore(load_w2v(input_path), load_w2v(output_path));
}

NodeEmbeddingStore train_sgns(const WalkCorpus& walks, const std::vector<std::string>& node_ids,
                              const SgnsConfig& cfg, TrainReport* report) {
    if (walks.empty()) throw std::runtime_error("sgns: empty walk corpus");

    // Vocabulary = nodes that actually occur; indices into node_ids.
    std::vector<std::size_t> full_counts(node_ids.size(), 0);
    std::size_t total_tokens_per_epoch = 0;
    for (const auto& w : walks) {
        total_tokens_per_epoch += w.size();
        for (int t : w) ++full_counts[static_cast<std::size_t>(t)];
    }
    std::vector<int> node_to_vocab(node_ids.size(), -1);
    std::vector<int> vocab_to_node;
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < node_ids.size(); ++i)
        if (full_counts[i] > 0) {
            node_to_vocab[i] = static_cast<int>(vocab_to_node.size());
            vocab_to_node.push_back(static_cast<int>(i));
            counts.push_back(full_counts[i]);
        }
    if (vocab_to_node.empty()) throw std::runtime_error("sgns: empty vocabulary");

    SgnsModel model = init_sgns(counts, cfg);
    const std::size_t total_tokens = total_tokens_per_epoch * static_cast<std::size_t>(cfg.epochs);

    std::atomic<std::size_t> tokens_done{0};
    auto current_lr = [&]() {
        double progress =
            static_cast<double>(tokens_done.load(std::memory_order_relaxed)) / total_tokens;
        return std::max(cfg.lr_final, cfg.lr_initial + (cfg.lr_final - cfg.lr_initial) * progress);
    };

    std::vector<double> epoch_loss(static_cast<std::size_t>(cfg.epochs), 0.0);
    std::vector<std::size_t> epoch_pairs(static_cast<std::size_t>(cfg.epochs), 0);

    auto train_walk = [&](const std::vector<int>& walk, Rng& rng, double& loss_acc,
                          std::size_t& pair_acc) {
        const int len = static_cast<int>(walk.size());
        for (int i = 0; i < len; ++i) {
            int center = node_to_vocab[static_cast<std::size_t>(walk[static_cast<std::size_t>(i)])];
            int b = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.window)));
            double lr = current_lr();
            for (int j = std::max(0, i - b); j <= std::min(len - 1, i + b); ++j) {
                if (j == i) continue;
                int context =
                    node_to_vocab[static_cast<std::size_t>(walk[static_cast<std::size_t>(j)])];
                std::vector<int> negs;
                negs.reserve(static_cast<std::size_t>(cfg.negatives));
                int tries = 0;
                while (static_cast<int>(negs.size()) < cfg.negatives) {
                    int n = model.sample_negative(rng);
                    if (n == context && ++tries < 1000) continue; // contradictory signal; redraw
                    negs.push_back(n);
                }
                loss_acc += sgns_pair_update(model, center, context, negs, lr);
                ++pair_acc;
            }
            tokens_done.fetch_add(1, std::memory_order_relaxed);
        }
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = 0.0;
        std::size_t pairs = 0;
        int nw = std::max(1, cfg.workers);
        if (nw == 1) {
            Rng rng(mix_seed(cfg.seed, 0x1122u, static_cast<std::uint64_t>(epoch)));
            for (const auto& walk : walks) train_walk(walk, rng, loss, pairs);
        } else {
            // hogwild: concurrent unsynchronized updates, run-dependent results
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            std::vector<double> tl(static_cast<std::size_t>(nw), 0.0);
            std::vector<std::size_t> tp(static_cast<std::size_t>(nw), 0);
            for (int t = 0; t < nw; ++t)
                pool.emplace_back([&, t] {
                    Rng rng(mix_seed(cfg.seed, 0x7700u + static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(epoch)));
                    for (std::size_t k = next.fetch_add(1); k < walks.size();
                         k = next.fetch_add(1))
                        train_walk(walks[k], rng, tl[static_cast<std::size_t>(t)],
                                   tp[static_cast<std::size_t>(t)]);
                });
            for (auto& th : pool) th.join();
            for (int t = 0; t < nw; ++t) {
                loss += tl[static_cast<std::size_t>(t)];
                pairs += tp[static_cast<std::size_t>(t)];
            }
        }
        epoch_loss[static_cast<std::size_t>(epoch)] = pairs ? loss / pairs : 0.0;
        epoch_pairs[static_cast<std::size_t>(epoch)] = pairs;
    }

    if (report) {
        report->epoch_loss = epoch_loss;
        report->pairs = 0;
        for (auto p : epoch_pairs) report->pairs += p;
    }

    std::map<std::string, Eigen::VectorXd> in, out;
    for (std::size_t vi = 0; vi < vocab_to_node.size(); ++vi) {
        const std::string& id = node_ids[static_cast<std::size_t>(vocab_to_node[vi])];
        in.emplace(id, model.input.row(static_cast<int>(vi)).transpose());
        out.emplace(id, model.output.row(static_cast<int>(vi)).transpose());
    }
    return NodeEmbeddingStore(std::move(in), std::move(out));
}

} // namespace termgraph
