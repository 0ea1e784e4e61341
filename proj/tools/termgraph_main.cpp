#include "termgraph/biblio.hpp"
#include "termgraph/pipeline.hpp"
#include "termgraph/query.hpp"
#include "termgraph/util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>

using namespace termgraph;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    bool force = false;
};

RunConfig effective_config(const GlobalOpts& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg = RunConfig::load(g.config_path);
    if (!g.output_dir.empty()) cfg.output_dir = g.output_dir;
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

void print_stage_result(const StageResult& r) {
    std::printf("[%s] %s%s\n", to_string(r.stage), r.message.c_str(),
                r.recomputed ? (" (" + std::to_string(r.duration_ms) + " ms)").c_str() : "");
}

int run_stage_command(const GlobalOpts& g, Stage stage) {
    RunConfig cfg = effective_config(g);
    Pipeline pipeline(cfg);
    print_stage_result(pipeline.run_stage(stage, g.force));
    return 0;
}

void print_table(const std::vector<ScoredTerm>& rows, const char* score_name) {
    std::printf("%-32s %s\n", "term", score_name);
    for (const auto& r : rows) std::printf("%-32s %.6f\n", r.term.c_str(), r.score);
}

int query_command(const GlobalOpts& g, const std::string& text, int top_k) {
    RunConfig cfg = effective_config(g);
    Lexicon lexicon = Lexicon::load(cfg.output_dir / "lexicon.json");
    NodeEmbeddingStore store = NodeEmbeddingStore::load(cfg.output_dir / "node_embeddings.w2v",
                                                        cfg.output_dir / "node_embeddings_out.w2v");
    Query q = parse_query(text, lexicon);
    q.top_k = top_k;
    auto results = recommend_tasks(q, store, lexicon);

    print_table(results, "cosine");
    json out;
    out["query"] = {{"positives", q.positives}, {"negatives", q.negatives}, {"top_k", q.top_k}};
    json rows = json::array();
    for (const auto& r : results) rows.push_back({{"term", r.term}, {"score", r.score}});
    out["results"] = std::move(rows);
    write_file(cfg.output_dir / "query_result.json", out.dump(2) + "\n");
    return 0;
}

int battery_command(const GlobalOpts& g, const std::vector<std::string>& constructs) {
    RunConfig cfg = effective_config(g);
    Lexicon lexicon = Lexicon::load(cfg.output_dir / "lexicon.json");
    TermGraph graph = TermGraph::load(cfg.output_dir / "graph.json");
    Hypergraph h = Hypergraph::load(cfg.output_dir / "hypergraph_state.json");

    std::set<std::string> ids;
    for (const auto& c : constructs) {
        const LexiconTerm* term = lexicon.match(c);
        if (!term) throw std::runtime_error("unknown construct '" + c + "'");
        if (term->kind != TermKind::Construct)
            throw std::runtime_error("'" + c + "' is a task, not a construct");
        ids.insert(term->id);
    }
    Battery battery = build_battery(ids, h, graph);

    std::printf("battery (%zu tasks, tree distance %.4f):\n", battery.tasks.size(),
                battery.total_distance);
    for (const auto& t : battery.tasks) std::printf("  %s\n", t.c_str());
    json out;
    out["constructs"] = ids;
    out["tasks"] = battery.tasks;
    json edges = json::array();
    for (const auto& [u, v, d] : battery.tree_edges)
        edges.push_back({{"u", u}, {"v", v}, {"distance", d}});
    out["tree_edges"] = std::move(edges);
    out["total_distance"] = battery.total_distance;
    write_file(cfg.output_dir / "battery_result.json", out.dump(2) + "\n");
    return 0;
}

int distance_command(const GlobalOpts& g, const std::string& t1, const std::string& t2) {
    RunConfig cfg = effective_config(g);
    Lexicon lexicon = Lexicon::load(cfg.output_dir / "lexicon.json");
    TermGraph graph = TermGraph::load(cfg.output_dir / "graph.json");
    auto resolve = [&](const std::string& t) {
        const LexiconTerm* term = lexicon.match(t);
        if (!term) throw std::runtime_error("unknown term '" + t + "'");
        return term->id;
    };
    double d = task_distance(resolve(t1), resolve(t2), graph);
    std::printf("%.6f\n", d);
    return 0;
}

int stats_command(const GlobalOpts& g, const std::string& name) {
    RunConfig cfg = effective_config(g);
    const std::map<std::string, std::string> files = {
        {"timelines", "stats/timelines.csv"},
        {"innovation", "stats/innovation.csv"},
        {"lags", "stats/lags.csv"},
        {"histogram", "stats/tasks_per_paper.csv"},
        {"disciplines", "stats/disciplines.csv"},
        {"overlaps", "stats/overlaps.csv"},
    };
    auto it = files.find(name);
    if (it == files.end()) {
        std::string known;
        for (const auto& [k, v] : files) known += " " + k;
        throw std::runtime_error("unknown statistic '" + name + "'; available:" + known);
    }
    auto path = cfg.output_dir / it->second;
    if (!std::filesystem::exists(path))
        throw std::runtime_error("statistics not built yet: run the 'stats' stage first");
    std::string body = read_file(path);
    std::fputs(body.c_str(), stdout);

    // JSON alongside, rows as objects keyed by the CSV header
    auto lines = split(body, '\n');
    json rows = json::array();
    if (!lines.empty()) {
        auto header = split(lines[0], ',');
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            auto cells = split(lines[i], ',');
            json row;
            for (std::size_t c = 0; c < header.size() && c < cells.size(); ++c)
                row[header[c]] = cells[c];
            rows.push_back(std::move(row));
        }
    }
    write_file(cfg.output_dir / ("stats_" + name + ".json"), rows.dump(2) + "\n");
    return 0;
}

int export_command(const GlobalOpts& g, const std::string& dest) {
    RunConfig cfg = effective_config(g);
    std::filesystem::create_directories(dest);
    std::size_t copied = 0;
    for (const char* f : {"graph.graphml", "edges.json", "divergence.csv", "doc_topic.csv",
                          "centroids.tsv", "embeddings.tsv", "node_embeddings.w2v",
                          "hypergraph.json", "membership.csv", "incidence.csv", "walks.txt"}) {
        auto src = cfg.output_dir / f;
        if (!std::filesystem::exists(src)) continue;
        std::filesystem::copy_file(src, std::filesystem::path(dest) / f,
                                   std::filesystem::copy_options::overwrite_existing);
        ++copied;
    }
    std::printf("exported %zu artifacts to %s\n", copied, dest.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"task-construct graph engine over scientific abstracts"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--output-dir", g.output_dir, "override output directory");
    app.add_option("--seed", g.seed, "override base seed");
    app.add_flag("--force", g.force, "recompute even when artifacts are fresh");

    std::map<std::string, Stage> stage_cmds = {
        {"fetch", Stage::Fetch},         {"ingest", Stage::Ingest}, {"embed", Stage::Embed},
        {"topics", Stage::Topics},       {"graph", Stage::Graph},   {"train", Stage::Train},
        {"hypergraph", Stage::Hypergraph}, {"stats", Stage::Stats},
    };
    std::map<std::string, CLI::App*> stage_subs;
    for (const auto& [name, stage] : stage_cmds)
        stage_subs[name] = app.add_subcommand(name, std::string("run the ") + name + " stage");

    bool run_all = false;
    auto* all = app.add_subcommand("run", "run every stage through stats");
    (void)all;

    std::string query_text;
    int top_k = 10;
    auto* query = app.add_subcommand("query", "recommend tasks for a +/- term expression");
    query->add_option("expression", query_text, "e.g. \"A + B - C\"")->required();
    query->add_option("--top-k", top_k, "number of results");

    std::vector<std::string> battery_constructs;
    auto* battery = app.add_subcommand("battery", "covering task battery for constructs");
    battery->add_option("constructs", battery_constructs, "construct names/ids")->required();

    std::string dist_a, dist_b;
    auto* dist = app.add_subcommand("distance", "JS divergence between two tasks");
    dist->add_option("task_a", dist_a)->required();
    dist->add_option("task_b", dist_b)->required();

    std::string stats_name;
    auto* stats = app.add_subcommand("stat", "print a computed statistic as CSV");
    stats->add_option("name", stats_name, "timelines|innovation|lags|histogram|disciplines|overlaps")
        ->required();

    std::string export_dest;
    auto* exp = app.add_subcommand("export", "copy export artifacts to a directory");
    exp->add_option("--dest", export_dest, "destination directory")->required();

    CLI11_PARSE(app, argc, argv);
    (void)run_all;

    try {
        for (const auto& [name, stage] : stage_cmds)
            if (stage_subs[name]->parsed()) return run_stage_command(g, stage);
        if (all->parsed()) {
            RunConfig cfg = effective_config(g);
            Pipeline pipeline(cfg);
            for (const auto& r : pipeline.run_through(Stage::Stats, g.force))
                print_stage_result(r);
            return 0;
        }
        if (query->parsed()) return query_command(g, query_text, top_k);
        if (battery->parsed()) return battery_command(g, battery_constructs);
        if (dist->parsed()) return distance_command(g, dist_a, dist_b);
        if (stats->parsed()) return stats_command(g, stats_name);
        if (exp->parsed()) return export_command(g, export_dest);
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stdout, "%s\n", err.dump().c_str());
        return 1;
    }
    return 0;
}
