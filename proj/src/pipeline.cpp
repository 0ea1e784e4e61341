#include "termgraph/pipeline.hpp"

#include "termgraph/biblio.hpp"
#include "termgraph/embedder.hpp"
#include "termgraph/hypergraph.hpp"
#include "termgraph/pubmed.hpp"
#include "termgraph/term_graph.hpp"
#include "termgraph/topic_model.hpp"
#include "termgraph/util.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>

#include <fcntl.h>
#include <unistd.h>

namespace termgraph {

using nlohmann::json;

const char* to_string(Stage s) {
    switch (s) {
        case Stage::Fetch: return "fetch";
        case Stage::Ingest: return "ingest";
        case Stage::Embed: return "embed";
        case Stage::Topics: return "topics";
        case Stage::Graph: return "graph";
        case Stage::Train: return "train";
        case Stage::Hypergraph: return "hypergraph";
        case Stage::Stats: return "stats";
    }
    return "?";
}

Stage stage_from_string(const std::string& s) {
    for (Stage st : {Stage::Fetch, Stage::Ingest, Stage::Embed, Stage::Topics, Stage::Graph,
                     Stage::Train, Stage::Hypergraph, Stage::Stats})
        if (s == to_string(st)) return st;
    throw std::runtime_error("unknown stage '" + s + "'");
}

namespace {

template <typename T>
void load_if(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

void load_path_if(const json& j, const char* key, std::filesystem::path& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<std::string>();
}

void load_opt_seed(const json& j, const char* key, std::optional<std::uint64_t>& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<std::uint64_t>();
}

void load_opt_int(const json& j, const char* key, std::optional<int>& out) {
    if (j.contains(key)) {
        if (j[key].is_null()) out = std::nullopt;
        else out = j[key].get<int>();
    }
}

} // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path.string() + ": " + e.what());
    }
    RunConfig c;
    load_path_if(j, "lexicon", c.lexicon_path);
    load_path_if(j, "corpus", c.corpus_path);
    load_path_if(j, "output_dir", c.output_dir);
    load_if(j, "seed", c.seed);
    if (j.contains("fetch")) {
        const json& f = j["fetch"];
        load_if(f, "base_url", c.fetch.base_url);
        load_if(f, "rate_per_second", c.fetch.rate_per_second);
        load_if(f, "cache_dir", c.fetch.cache_dir);
        load_if(f, "max_per_term", c.fetch.max_per_term);
    }
    if (j.contains("ingest")) load_if(j["ingest"], "min_docs", c.ingest.min_docs);
    if (j.contains("embed")) {
        const json& e = j["embed"];
        load_if(e, "provider", c.embed.provider);
        load_if(e, "dim", c.embed.dim);
        load_path_if(e, "file", c.embed.file);
        load_opt_seed(e, "seed", c.embed.seed);
    }
    if (j.contains("topics")) {
        const json& t = j["topics"];
        load_if(t, "min_samples", c.topics.min_samples);
        load_if(t, "min_cluster_size", c.topics.min_cluster_size);
        load_opt_int(t, "reduce_dim", c.topics.reduce_dim);
        load_if(t, "temperature", c.topics.temperature);
        load_if(t, "outlier_threshold", c.topics.outlier_threshold);
    }
    if (j.contains("graph")) {
        const json& g = j["graph"];
        load_if(g, "mode", c.graph.mode);
        load_if(g, "shrinkage", c.graph.shrinkage);
        load_if(g, "epsilon", c.graph.epsilon);
        load_if(g, "n_samples", c.graph.n_samples);
        load_if(g, "workers", c.graph.workers);
        load_opt_seed(g, "seed", c.graph.seed);
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        load_if(t, "walks_per_node", c.train.walks_per_node);
        load_if(t, "walk_length", c.train.walk_length);
        load_if(t, "dim", c.train.dim);
        load_if(t, "window", c.train.window);
        load_if(t, "negatives", c.train.negatives);
        load_if(t, "epochs", c.train.epochs);
        load_if(t, "lr_initial", c.train.lr_initial);
        load_if(t, "lr_final", c.train.lr_final);
        load_if(t, "workers", c.train.workers);
        load_if(t, "save_walks", c.train.save_walks);
        load_opt_seed(t, "seed", c.train.seed);
    }
    if (j.contains("hypergraph")) {
        const json& h = j["hypergraph"];
        load_if(h, "min_samples", c.hyper.min_samples);
        load_if(h, "min_cluster_size", c.hyper.min_cluster_size);
        load_if(h, "tau", c.hyper.tau);
        load_if(h, "threshold_mode", c.hyper.threshold_mode);
    }
    if (j.contains("stats")) {
        const json& s = j["stats"];
        load_if(s, "min_docs_per_discipline", c.stats.min_docs_per_discipline);
        load_if(s, "n_samples", c.stats.n_samples);
        load_opt_seed(s, "seed", c.stats.seed);
    }
    return c;
}

std::uint64_t RunConfig::stage_seed(Stage s) const {
    auto derived = [&](const char* name) { return mix_seed(seed, fnv1a64(name)); };
    switch (s) {
        case Stage::Embed: return embed.seed.value_or(derived("embed"));
        case Stage::Graph: return graph.seed.value_or(derived("graph"));
        case Stage::Train: return train.seed.value_or(derived("train"));
        case Stage::Stats: return stats.seed.value_or(derived("stats"));
        default: return derived(to_string(s));
    }
}

std::string RunConfig::stage_config_hash(Stage s) const {
    json j;
    switch (s) {
        case Stage::Fetch:
            j = {{"rate_per_second", fetch.rate_per_second}, {"max_per_term", fetch.max_per_term}};
            break;
        case Stage::Ingest:
            j = {{"min_docs", ingest.min_docs}};
            break;
        case Stage::Embed:
            j = {{"provider", embed.provider},
                 {"dim", embed.dim},
                 {"seed", embed.provider == "mock" ? stage_seed(s) : 0}};
            break;
        case Stage::Topics:
            j = {{"min_samples", topics.min_samples},
                 {"min_cluster_size", topics.min_cluster_size},
                 {"reduce_dim", topics.reduce_dim ? json(*topics.reduce_dim) : json(nullptr)},
                 {"temperature", topics.temperature},
                 {"outlier_threshold", topics.outlier_threshold}};
            break;
        case Stage::Graph:
            j = {{"mode", graph.mode},
                 {"shrinkage", graph.shrinkage},
                 {"epsilon", graph.epsilon},
                 {"n_samples", graph.n_samples},
                 {"seed", stage_seed(s)}};
            break;
        case Stage::Train:
            j = {{"walks_per_node", train.walks_per_node},
                 {"walk_length", train.walk_length},
                 {"dim", train.dim},
                 {"window", train.window},
                 {"negatives", train.negatives},
                 {"epochs", train.epochs},
                 {"lr_initial", train.lr_initial},
                 {"lr_final", train.lr_final},
                 {"workers", train.workers},
                 {"save_walks", train.save_walks},
                 {"seed", stage_seed(s)}};
            break;
        case Stage::Hypergraph:
            j = {{"min_samples", hyper.min_samples},
                 {"min_cluster_size", hyper.min_cluster_size},
                 {"tau", hyper.tau},
                 {"threshold_mode", hyper.threshold_mode}};
            break;
        case Stage::Stats:
            j = {{"min_docs_per_discipline", stats.min_docs_per_discipline},
                 {"n_samples", stats.n_samples},
                 {"seed", stage_seed(s)}};
            break;
    }
    return sha256_hex(j.dump());
}

std::string RunConfig::to_json_string() const {
    json j;
    j["lexicon"] = lexicon_path.string();
    j["corpus"] = corpus_path.string();
    j["output_dir"] = output_dir.string();
    j["seed"] = seed;
    j["fetch"] = {{"base_url", fetch.base_url},
                  {"rate_per_second", fetch.rate_per_second},
                  {"cache_dir", fetch.cache_dir},
                  {"max_per_term", fetch.max_per_term}};
    j["ingest"] = {{"min_docs", ingest.min_docs}};
    j["embed"] = {{"provider", embed.provider}, {"dim", embed.dim}, {"file", embed.file.string()}};
    if (embed.seed) j["embed"]["seed"] = *embed.seed;
    j["topics"] = {{"min_samples", topics.min_samples},
                   {"min_cluster_size", topics.min_cluster_size},
                   {"reduce_dim", topics.reduce_dim ? json(*topics.reduce_dim) : json(nullptr)},
                   {"temperature", topics.temperature},
                   {"outlier_threshold", topics.outlier_threshold}};
    j["graph"] = {{"mode", graph.mode},
                  {"shrinkage", graph.shrinkage},
                  {"epsilon", graph.epsilon},
                  {"n_samples", graph.n_samples},
                  {"workers", graph.workers}};
    if (graph.seed) j["graph"]["seed"] = *graph.seed;
    j["train"] = {{"walks_per_node", train.walks_per_node},
                  {"walk_length", train.walk_length},
                  {"dim", train.dim},
                  {"window", train.window},
                  {"negatives", train.negatives},
                  {"epochs", train.epochs},
                  {"lr_initial", train.lr_initial},
                  {"lr_final", train.lr_final},
                  {"workers", train.workers},
                  {"save_walks", train.save_walks}};
    if (train.seed) j["train"]["seed"] = *train.seed;
    j["hypergraph"] = {{"min_samples", hyper.min_samples},
                       {"min_cluster_size", hyper.min_cluster_size},
                       {"tau", hyper.tau},
                       {"threshold_mode", hyper.threshold_mode}};
    j["stats"] = {{"min_docs_per_discipline", stats.min_docs_per_discipline},
                  {"n_samples", stats.n_samples}};
    if (stats.seed) j["stats"]["seed"] = *stats.seed;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

Manifest Manifest::load(const std::filesystem::path& output_dir) {
    Manifest m;
    auto path = output_dir / "manifest.json";
    if (!std::filesystem::exists(path)) return m;
    json doc = json::parse(read_file(path));
    if (doc.contains("effective_config")) m.effective_config_ = doc["effective_config"].dump();
    for (const auto& e : doc.at("stages")) {
        ManifestEntry entry;
        entry.stage = e.at("stage").get<std::string>();
        entry.config_hash = e.at("config").get<std::string>();
        for (const auto& [k, v] : e.at("inputs").items())
            entry.inputs[k] = v.get<std::string>();
        for (const auto& [k, v] : e.at("outputs").items())
            entry.outputs[k] = v.get<std::string>();
        m.entries_.push_back(std::move(entry));
    }
    return m;
}

void Manifest::save(const std::filesystem::path& output_dir) const {
    json stages = json::array();
    for (const auto& e : entries_) {
        json o;
        o["stage"] = e.stage;
        o["config"] = e.config_hash;
        o["inputs"] = e.inputs;
        o["outputs"] = e.outputs;
        stages.push_back(std::move(o));
    }
    json doc;
    doc["stages"] = std::move(stages);
    if (!effective_config_.empty()) doc["effective_config"] = json::parse(effective_config_);
    write_file(output_dir / "manifest.json", doc.dump(2) + "\n");
}

void Manifest::set_effective_config(std::string config_json) {
    effective_config_ = std::move(config_json);
}

const ManifestEntry* Manifest::find(const std::string& stage) const {
    for (const auto& e : entries_)
        if (e.stage == stage) return &e;
    return nullptr;
}

void Manifest::put(ManifestEntry entry) {
    for (auto& e : entries_)
        if (e.stage == entry.stage) {
            e = std::move(entry);
            return;
        }
    entries_.push_back(std::move(entry));
}

PipelineLock::PipelineLock(const std::filesystem::path& output_dir) {
    std::filesystem::create_directories(output_dir);
    path_ = output_dir / ".termgraph.lock";
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST)
            throw std::runtime_error("another pipeline is running in this output directory "
                                     "(found " + path_.string() + "); remove the file if stale");
        throw std::runtime_error("cannot create lock file " + path_.string());
    }
    ::close(fd);
}

PipelineLock::~PipelineLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
}

std::vector<Stage> stage_dependencies(Stage s, bool corpus_from_fetch) {
    switch (s) {
        case Stage::Fetch: return {};
        case Stage::Ingest: return corpus_from_fetch ? std::vector<Stage>{Stage::Fetch}
                                                     : std::vector<Stage>{};
        case Stage::Embed: return {Stage::Ingest};
        case Stage::Topics: return {Stage::Embed};
        case Stage::Graph: return {Stage::Ingest, Stage::Topics};
        case Stage::Train: return {Stage::Graph};
        case Stage::Hypergraph: return {Stage::Graph, Stage::Train};
        case Stage::Stats: return {Stage::Ingest, Stage::Topics};
    }
    return {};
}

Pipeline::Pipeline(RunConfig config)
    : config_(std::move(config)), manifest_(Manifest::load(config_.output_dir)),
      lock_(config_.output_dir) {
    json effective = json::parse(config_.to_json_string());
    effective.erase("output_dir");
    manifest_.set_effective_config(effective.dump());
}

std::filesystem::path Pipeline::artifact(const std::string& name) const {
    return config_.output_dir / name;
}

bool Pipeline::stage_fresh(const ManifestEntry* entry, const std::string& config_hash,
                           const std::map<std::string, std::string>& inputs) const {
    if (!entry) return false;
    if (entry->config_hash != config_hash) return false;
    if (entry->inputs != inputs) return false;
    for (const auto& [rel, hash] : entry->outputs) {
        auto path = artifact(rel);
        if (!std::filesystem::exists(path) || sha256_file(path) != hash) return false;
    }
    return true;
}

void Pipeline::require_upstream(Stage dep) const {
    const ManifestEntry* e = manifest_.find(to_string(dep));
    if (!e)
        throw std::runtime_error(std::string("missing upstream artifact: run stage '") +
                                 to_string(dep) + "' first");
    for (const auto& [rel, hash] : e->outputs) {
        auto path = artifact(rel);
        if (!std::filesystem::exists(path))
            throw std::runtime_error("stale pipeline: artifact '" + rel + "' of stage '" +
                                     e->stage + "' is missing; rerun '" + e->stage + "'");
        if (sha256_file(path) != hash)
            throw std::runtime_error("stale pipeline: artifact '" + rel + "' no longer matches "
                                     "the manifest; rerun '" + e->stage + "' (or pass --force)");
    }
}

std::map<std::string, std::string> Pipeline::upstream_outputs(Stage dep) const {
    const ManifestEntry* e = manifest_.find(to_string(dep));
    std::map<std::string, std::string> out;
    if (!e) return out;
    for (const auto& [rel, hash] : e->outputs) out["stage:" + e->stage + "/" + rel] = hash;
    return out;
}

StageResult Pipeline::run_stage(Stage stage, bool force) {
    bool corpus_from_fetch = config_.corpus_path.empty();
    StageResult result;
    result.stage = stage;

    ManifestEntry entry;
    entry.stage = to_string(stage);
    entry.config_hash = config_.stage_config_hash(stage);

    for (Stage dep : stage_dependencies(stage, corpus_from_fetch)) require_upstream(dep);

    // inputs: upstream outputs plus any external files this stage reads
    for (Stage dep : stage_dependencies(stage, corpus_from_fetch)) {
        auto up = upstream_outputs(dep);
        entry.inputs.insert(up.begin(), up.end());
    }
    auto add_external = [&](const std::filesystem::path& p) {
        if (p.empty()) return;
        if (!std::filesystem::exists(p))
            throw std::runtime_error("input file not found: " + p.string());
        entry.inputs["file:" + p.string()] = sha256_file(p);
    };
    switch (stage) {
        case Stage::Fetch: add_external(config_.lexicon_path); break;
        case Stage::Ingest:
            add_external(config_.lexicon_path);
            if (!corpus_from_fetch) add_external(config_.corpus_path);
            break;
        case Stage::Embed:
            if (config_.embed.provider == "file") add_external(config_.embed.file);
            break;
        default: break;
    }

    if (!force && stage_fresh(manifest_.find(entry.stage), entry.config_hash, entry.inputs)) {
        result.recomputed = false;
        result.message = "up-to-date";
        return result;
    }

    auto started = std::chrono::steady_clock::now();
    switch (stage) {
        case Stage::Fetch: do_fetch(entry); break;
        case Stage::Ingest: do_ingest(entry); break;
        case Stage::Embed: do_embed(entry); break;
        case Stage::Topics: do_topics(entry); break;
        case Stage::Graph: do_graph(entry); break;
        case Stage::Train: do_train(entry); break;
        case Stage::Hypergraph: do_hypergraph(entry); break;
        case Stage::Stats: do_stats(entry); break;
    }
    result.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();

    manifest_.put(std::move(entry));
    manifest_.save(config_.output_dir);

    // durations are diagnostics, kept out of the manifest so reruns are
    // byte-identical
    json timings = json::object();
    auto tpath = artifact("timings.json");
    if (std::filesystem::exists(tpath)) timings = json::parse(read_file(tpath));
    timings[to_string(stage)] = result.duration_ms;
    write_file(tpath, timings.dump(2) + "\n");

    result.recomputed = true;
    result.message = "computed";
    return result;
}

std::vector<StageResult> Pipeline::run_through(Stage last, bool force) {
    std::vector<StageResult> results;
    bool corpus_from_fetch = config_.corpus_path.empty();
    std::vector<Stage> order;
    for (Stage s : {Stage::Fetch, Stage::Ingest, Stage::Embed, Stage::Topics, Stage::Graph,
                    Stage::Train, Stage::Hypergraph, Stage::Stats}) {
        if (s == Stage::Fetch && !corpus_from_fetch) continue;
        order.push_back(s);
        if (s == last) break;
    }
    for (Stage s : order) results.push_back(run_stage(s, force));
    return results;
}

// ---------------------------------------------------------------------------
// stage bodies

namespace {

void record_output(ManifestEntry& entry, const std::filesystem::path& output_dir,
                   const std::filesystem::path& path) {
    entry.outputs[std::filesystem::relative(path, output_dir).generic_string()] =
        sha256_file(path);
}

} // namespace

void Pipeline::do_fetch(ManifestEntry& entry) {
    Lexicon lexicon = Lexicon::load(config_.lexicon_path);
    PubmedConfig pc = pubmed_config_from_env();
    if (!config_.fetch.base_url.empty()) pc.base_url = config_.fetch.base_url;
    pc.rate_per_second = config_.fetch.rate_per_second;
    if (!config_.fetch.cache_dir.empty()) {
        std::filesystem::path cd = config_.fetch.cache_dir;
        pc.cache_dir = cd.is_absolute() ? cd : config_.output_dir / cd;
    }
    EutilsClient client(pc);

    std::string jsonl;
    json report;
    std::size_t hits = 0;
    for (const auto& [term_id, term] : lexicon.terms()) {
        std::vector<std::string> ids;
        for (const auto& q : term.queries) {
            SearchRequest req;
            req.term_id = term_id;
            req.query = q;
            req.limit = config_.fetch.max_per_term;
            auto found = client.search_ids(req);
            ids.insert(ids.end(), found.begin(), found.end());
        }
        if (ids.empty()) {
            report["terms"][term_id] = 0;
            continue;
        }
        FetchReport fr;
        auto docs = client.fetch_abstracts(ids, &fr);
        for (auto& d : docs) {
            d.labels = {term_id};
            jsonl += document_to_json(d);
            jsonl += '\n';
        }
        hits += docs.size();
        report["terms"][term_id] = docs.size();
    }
    report["hits"] = hits;

    write_file(artifact("corpus_raw.jsonl"), jsonl);
    write_file(artifact("fetch_report.json"), report.dump(2) + "\n");
    record_output(entry, config_.output_dir, artifact("corpus_raw.jsonl"));
    record_output(entry, config_.output_dir, artifact("fetch_report.json"));
}

void Pipeline::do_ingest(ManifestEntry& entry) {
    Lexicon lexicon = Lexicon::load(config_.lexicon_path);
    std::filesystem::path corpus_file =
        config_.corpus_path.empty() ? artifact("corpus_raw.jsonl") : config_.corpus_path;
    auto [raw, report] = Corpus::ingest_jsonl(corpus_file, lexicon);
    auto [corpus, removed] = prune_rare_terms(raw, config_.ingest.min_docs);

    corpus.save_jsonl(artifact("corpus.jsonl"));
    corpus.lexicon().save(artifact("lexicon.json"));
    json rep;
    rep["lines_read"] = report.lines_read;
    rep["documents_before_prune"] = report.documents;
    rep["documents"] = corpus.size();
    rep["deduped"] = report.deduped;
    rep["rejected"] = report.rejected;
    rep["malformed"] = report.malformed;
    rep["removed_terms"] = removed;
    rep["tasks"] = corpus.lexicon().count(TermKind::Task);
    rep["constructs"] = corpus.lexicon().count(TermKind::Construct);
    write_file(artifact("ingest_report.json"), rep.dump(2) + "\n");

    for (const char* f : {"corpus.jsonl", "lexicon.json", "ingest_report.json"})
        record_output(entry, config_.output_dir, artifact(f));
}

void Pipeline::do_embed(ManifestEntry& entry) {
    Lexicon lexicon = Lexicon::load(artifact("lexicon.json"));
    auto [corpus, _] = Corpus::ingest_jsonl(artifact("corpus.jsonl"), lexicon);

    std::unique_ptr<EmbeddingProvider> provider;
    if (config_.embed.provider == "mock") {
        provider = std::make_unique<MockProvider>(config_.stage_seed(Stage::Embed),
                                                  config_.embed.dim);
    } else if (config_.embed.provider == "file") {
        provider = std::make_unique<PrecomputedProvider>(config_.embed.file);
    } else {
        throw std::runtime_error("unknown embedding provider '" + config_.embed.provider + "'");
    }
    auto [store, report] = embed_corpus(corpus, *provider);
    store.save(artifact("embeddings.tsv"));
    json rep;
    rep["provider"] = provider->describe();
    rep["embedded"] = report.embedded;
    rep["missing"] = report.missing;
    write_file(artifact("embed_report.json"), rep.dump(2) + "\n");

    for (const char* f : {"embeddings.tsv", "embed_report.json"})
        record_output(entry, config_.output_dir, artifact(f));
}

void Pipeline::do_topics(ManifestEntry& entry) {
    EmbeddingStore store = EmbeddingStore::load(artifact("embeddings.tsv"));
    TopicParams params;
    params.cluster.min_samples = config_.topics.min_samples;
    params.cluster.min_cluster_size = config_.topics.min_cluster_size;
    params.cluster.metric = Metric::Cosine;
    params.reduce_dim = config_.topics.reduce_dim;
    params.temperature = config_.topics.temperature;

    TopicModel model = fit_topics(store, params);
    model = assign_documents(model, store, config_.topics.outlier_threshold);
    model.save(artifact("doc_topic.csv"), artifact("centroids.tsv"), artifact("kept.txt"),
               artifact("outliers.txt"));

    json rep;
    rep["topics"] = model.n_topics();
    rep["kept"] = model.kept_docs.size();
    rep["outliers"] = model.outliers.size();
    write_file(artifact("topics_report.json"), rep.dump(2) + "\n");

    for (const char* f :
         {"doc_topic.csv", "centroids.tsv", "kept.txt", "outliers.txt", "topics_report.json"})
        record_output(entry, config_.output_dir, artifact(f));
}

void Pipeline::do_graph(ManifestEntry& entry) {
    Lexicon lexicon = Lexicon::load(artifact("lexicon.json"));
    auto [corpus, _] = Corpus::ingest_jsonl(artifact("corpus.jsonl"), lexicon);
    TopicModel topics = TopicModel::load(artifact("doc_topic.csv"), artifact("centroids.tsv"),
                                         artifact("kept.txt"), artifact("outliers.txt"));
    auto rows = topics.kept_rows();

    CovarianceMode mode =
        config_.graph.mode == "full" ? CovarianceMode::Full : CovarianceMode::Diagonal;

    std::map<std::string, std::pair<TermKind, NodeDistribution>> nodes;
    std::vector<std::string> skipped, fell_back;
    for (const auto& [term_id, term] : lexicon.terms()) {
        std::vector<const Eigen::VectorXd*> member_rows;
        for (const auto& doc_id : corpus.docs_with_label(term_id)) {
            auto it = rows.find(doc_id);
            if (it != rows.end()) member_rows.push_back(&it->second);
        }
        if (member_rows.size() < 2) {
            skipped.push_back(term_id);
            continue;
        }
        Eigen::MatrixXd m(static_cast<int>(member_rows.size()), member_rows.front()->size());
        for (std::size_t i = 0; i < member_rows.size(); ++i)
            m.row(static_cast<int>(i)) = member_rows[i]->transpose();
        NodeDistribution dist =
            fit_node_distribution(term_id, m, mode, config_.graph.shrinkage);
        if (dist.fell_back_to_diagonal()) fell_back.push_back(term_id);
        nodes.emplace(term_id, std::make_pair(term.kind, std::move(dist)));
    }

    TermGraph graph = build_graph(nodes, config_.graph.epsilon, config_.graph.n_samples,
                                  config_.stage_seed(Stage::Graph), config_.graph.workers);
    graph.save(artifact("graph.json"));
    graph.export_divergence_csv(artifact("divergence.csv"));
    graph.export_edges_json(artifact("edges.json"));
    graph.export_graphml(artifact("graph.graphml"));

    json rep;
    rep["nodes"] = graph.size();
    rep["skipped_terms"] = skipped;
    rep["diagonal_fallback_terms"] = fell_back;
    write_file(artifact("graph_report.json"), rep.dump(2) + "\n");

    for (const char* f :
         {"graph.json", "divergence.csv", "edges.json", "graph.graphml", "graph_report.json"})
        record_output(entry, config_.output_dir, artifact(f));
}

void Pipeline::do_train(ManifestEntry& entry) {
    TermGraph graph = TermGraph::load(artifact("graph.json"));

    WalkConfig wc;
    wc.walks_per_node = config_.train.walks_per_node;
    wc.walk_length = config_.train.walk_length;
    wc.seed = config_.stage_seed(Stage::Train);
    wc.workers = config_.train.workers;
    WalkReport wrep;
    WalkCorpus walks = generate_walks(graph, wc, &wrep);

    SgnsConfig sc;
    sc.dim = config_.train.dim;
    sc.window = config_.train.window;
    sc.negatives = config_.train.negatives;
    sc.epochs = config_.train.epochs;
    sc.lr_initial = config_.train.lr_initial;
    sc.lr_final = config_.train.lr_final;
    sc.seed = mix_seed(config_.stage_seed(Stage::Train), 0x5757u);
    sc.workers = config_.train.workers;
    TrainReport trep;
    NodeEmbeddingStore store = train_sgns(walks, graph.ids(), sc, &trep);

    store.save(artifact("node_embeddings.w2v"), artifact("node_embeddings_out.w2v"));
    if (config_.train.save_walks) write_walks(walks, graph, artifact("walks.txt"));

    json rep;
    rep["walks"] = wrep.walks;
    rep["truncated"] = wrep.truncated;
    rep["pairs"] = trep.pairs;
    rep["epoch_loss"] = trep.epoch_loss;
    write_file(artifact("train_report.json"), rep.dump(2) + "\n");

    for (const char* f : {"node_embeddings.w2v", "node_embeddings_out.w2v", "train_report.json"})
        record_output(entry, config_.output_dir, artifact(f));
    if (config_.train.save_walks)
        record_output(entry, config_.output_dir, artifact("walks.txt"));
}

void Pipeline::do_hypergraph(ManifestEntry& entry) {
    TermGraph graph = TermGraph::load(artifact("graph.json"));
    NodeEmbeddingStore store = NodeEmbeddingStore::load(artifact("node_embeddings.w2v"),
                                                        artifact("node_embeddings_out.w2v"));
    ClusterParams cp;
    cp.min_samples = config_.hyper.min_samples;
    cp.min_cluster_size = config_.hyper.min_cluster_size;
    cp.metric = Metric::Euclidean;
    ThresholdMode mode = config_.hyper.threshold_mode == "band" ? ThresholdMode::Band
                                                                : ThresholdMode::Strong;
    HypergraphBuildReport hrep;
    Hypergraph h = build_hypergraph(graph, store, cp, config_.hyper.tau, mode, &hrep);

    h.save(artifact("hypergraph_state.json"));
    h.export_hyperedges_json(artifact("hypergraph.json"));
    h.export_membership_csv(artifact("membership.csv"));
    h.export_incidence_csv(artifact("incidence.csv"));

    json rep;
    rep["threshold"] = {{"median", hrep.threshold.median},
                        {"sd", hrep.threshold.sd},
                        {"kept", hrep.threshold.kept},
                        {"total", hrep.threshold.total},
                        {"all_kept_degenerate", hrep.threshold.degenerate_all_kept},
                        {"none_retained", hrep.threshold.none_retained}};
    rep["clusters"] = hrep.clusters;
    rep["noise_nodes"] = hrep.noise_nodes;
    rep["empty_constructs"] = h.empty_constructs();
    write_file(artifact("hypergraph_report.json"), rep.dump(2) + "\n");

    for (const char* f : {"hypergraph_state.json", "hypergraph.json", "membership.csv",
                          "incidence.csv", "hypergraph_report.json"})
        record_output(entry, config_.output_dir, artifact(f));
}

void Pipeline::do_stats(ManifestEntry& entry) {
    Lexicon lexicon = Lexicon::load(artifact("lexicon.json"));
    auto [corpus, _] = Corpus::ingest_jsonl(artifact("corpus.jsonl"), lexicon);
    TopicModel topics = TopicModel::load(artifact("doc_topic.csv"), artifact("centroids.tsv"),
                                         artifact("kept.txt"), artifact("outliers.txt"));

    auto timelines = term_frequencies(corpus);
    export_timelines_csv(timelines, artifact("stats/timelines.csv"));
    export_innovation_csv(timelines, lexicon, artifact("stats/innovation.csv"));
    export_lags_csv(operationalization_lag(timelines, lexicon), artifact("stats/lags.csv"));
    export_histogram_csv(tasks_per_paper(corpus), artifact("stats/tasks_per_paper.csv"));

    DisciplineProfileParams dp;
    dp.min_docs_per_discipline = config_.stats.min_docs_per_discipline;
    dp.n_samples = config_.stats.n_samples;
    dp.seed = config_.stage_seed(Stage::Stats);
    auto profiles = discipline_profiles(corpus, topics.kept_rows(), dp);
    export_discipline_csv(profiles, artifact("stats/disciplines.csv"),
                          artifact("stats/overlaps.csv"));

    for (const char* f : {"stats/timelines.csv", "stats/innovation.csv", "stats/lags.csv",
                          "stats/tasks_per_paper.csv", "stats/disciplines.csv",
                          "stats/overlaps.csv"})
        record_output(entry, config_.output_dir, artifact(f));
}

} // namespace termgraph
