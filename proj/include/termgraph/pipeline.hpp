#pragma once

#include "termgraph/metapath.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace termgraph {

enum class Stage { Fetch, Ingest, Embed, Topics, Graph, Train, Hypergraph, Stats };

const char* to_string(Stage s);
Stage stage_from_string(const std::string& s);

// Pipeline constants. Every field has an explicit default; a JSON config file
// overrides per key and CLI flags override the file.
struct RunConfig {
    std::filesystem::path lexicon_path;
    std::filesystem::path corpus_path; // fixture JSONL; empty = use fetch output
    std::filesystem::path output_dir = "out";

    std::uint64_t seed = 42; // base; per-stage seeds derive from it unless set

    struct Fetch {
        std::string base_url; // empty = env EUTILS_BASE_URL or NCBI default
        double rate_per_second = 3.0;
        std::string cache_dir; // relative to output_dir when not absolute
        std::size_t max_per_term = 10000;
    } fetch;

    struct Ingest {
        std::size_t min_docs = 5;
    } ingest;

    struct Embed {
        std::string provider = "mock"; // "mock" | "file"
        int dim = 64;                  // mock dimension; file providers declare theirs
        std::filesystem::path file;    // precomputed vectors for provider=file
        std::optional<std::uint64_t> seed;
    } embed;

    struct Topics {
        int min_samples = 5;
        int min_cluster_size = 15;
        std::optional<int> reduce_dim = 5;
        double temperature = 0.1;
        double outlier_threshold = 0.2;
    } topics;

    struct Graph {
        std::string mode = "diagonal"; // "diagonal" | "full"
        double shrinkage = 0.1;
        double epsilon = 1e-3;
        int n_samples = 8192;
        int workers = 1;
        std::optional<std::uint64_t> seed;
    } graph;

    struct Train {
        int walks_per_node = 1000;
        int walk_length = 100;
        int dim = 128;
        int window = 5;
        int negatives = 5;
        int epochs = 5;
        double lr_initial = 0.025;
        double lr_final = 1e-4;
        int workers = 1;
        bool save_walks = false;
        std::optional<std::uint64_t> seed;
    } train;

    struct Hyper {
        int min_samples = 2;
        int min_cluster_size = 3;
        double tau = 0.7;
        std::string threshold_mode = "strong"; // "strong" | "band"
    } hyper;

    struct Stats {
        std::size_t min_docs_per_discipline = 10;
        int n_samples = 4096;
        std::optional<std::uint64_t> seed;
    } stats;

    static RunConfig load(const std::filesystem::path& path);
    std::string to_json_string() const;

    std::uint64_t stage_seed(Stage s) const;
    // hash of the parameters this stage depends on (resolved seeds included,
    // paths and output_dir excluded: inputs are tracked by content)
    std::string stage_config_hash(Stage s) const;
};

struct ManifestEntry {
    std::string stage;
    std::string config_hash;
    std::map<std::string, std::string> inputs;  // path (config-relative) -> sha256
    std::map<std::string, std::string> outputs; // path (output-dir-relative) -> sha256
};

class Manifest {
public:
    static Manifest load(const std::filesystem::path& output_dir);
    void save(const std::filesystem::path& output_dir) const;

    const ManifestEntry* find(const std::string& stage) const;
    void put(ManifestEntry entry);

    // effective config echoed into the manifest (output_dir excluded so
    // reruns in different directories stay byte-identical)
    void set_effective_config(std::string config_json);
    const std::string& effective_config() const { return effective_config_; }

    const std::vector<ManifestEntry>& entries() const { return entries_; }

private:
    std::vector<ManifestEntry> entries_; // stage order of first computation
    std::string effective_config_;
};

// One pipeline per output directory.
class PipelineLock {
public:
    explicit PipelineLock(const std::filesystem::path& output_dir);
    ~PipelineLock();
    PipelineLock(const PipelineLock&) = delete;
    PipelineLock& operator=(const PipelineLock&) = delete;

private:
    std::filesystem::path path_;
};

struct StageResult {
    Stage stage;
    bool recomputed = false;
    std::string message;
    std::int64_t duration_ms = 0;
};

class Pipeline {
public:
    explicit Pipeline(RunConfig config);

    StageResult run_stage(Stage stage, bool force = false);
    std::vector<StageResult> run_through(Stage last, bool force = false);

    const RunConfig& config() const { return config_; }
    const Manifest& manifest() const { return manifest_; }
    std::filesystem::path artifact(const std::string& name) const;

private:
    bool stage_fresh(const ManifestEntry* entry, const std::string& config_hash,
                     const std::map<std::string, std::string>& inputs) const;
    void require_upstream(Stage dep) const;
    std::map<std::string, std::string> upstream_outputs(Stage dep) const;

    void do_fetch(ManifestEntry& entry);
    void do_ingest(ManifestEntry& entry);
    void do_embed(ManifestEntry& entry);
    void do_topics(ManifestEntry& entry);
    void do_graph(ManifestEntry& entry);
    void do_train(ManifestEntry& entry);
    void do_hypergraph(ManifestEntry& entry);
    void do_stats(ManifestEntry& entry);

    RunConfig config_;
    Manifest manifest_;
    PipelineLock lock_;
};

std::vector<Stage> stage_dependencies(Stage s, bool corpus_from_fetch);

} // namespace termgraph
