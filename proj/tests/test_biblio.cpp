#include "termgraph/biblio.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

using namespace termgraph;
using fixtures::TempDir;

namespace {

Corpus corpus_from(const TempDir& dir, const std::string& jsonl) {
    Lexicon lex = Lexicon::load(fixtures::small_lexicon(dir));
    auto path = dir.file("biblio.jsonl");
    write_file(path, jsonl);
    return Corpus::ingest_jsonl(path, lex).first;
}

} // namespace

TEST_CASE("term_frequencies counts per label per year") {
    TempDir dir("freq");
    Corpus corpus = corpus_from(dir, fixtures::doc_line("d1", {"attention"}, 2001) +
                                         fixtures::doc_line("d2", {"attention"}, 2001) +
                                         fixtures::doc_line("d3", {"attention"}, 2003));
    auto timelines = term_frequencies(corpus);
    const TermTimeline& a = timelines.at("attention");
    CHECK(a.counts_by_year.at(2001) == 2);
    CHECK(a.counts_by_year.at(2003) == 1);
    CHECK(a.first_year == 2001);
    CHECK(!a.first_cooccurrence_year.has_value()); // never co-labeled with a task
    // first_year is the min key
    CHECK(a.first_year == a.counts_by_year.begin()->first);
}

TEST_CASE("a doc with two labels contributes to both timelines") {
    TempDir dir("freq2");
    Corpus corpus = corpus_from(dir, fixtures::doc_line("d1", {"stroop", "attention"}, 1999));
    auto timelines = term_frequencies(corpus);
    CHECK(timelines.at("stroop").counts_by_year.at(1999) == 1);
    CHECK(timelines.at("attention").counts_by_year.at(1999) == 1);
    // co-label of opposite kinds in the same paper
    CHECK(timelines.at("attention").first_cooccurrence_year == 1999);
    CHECK(timelines.at("stroop").first_cooccurrence_year == 1999);
}

TEST_CASE("documents without years are excluded from time statistics") {
    TempDir dir("freq3");
    Lexicon lex = Lexicon::load(fixtures::small_lexicon(dir));
    std::string line =
        R"({"doc_id": "d1", "title": "t", "abstract": "a", "year": null, "journal": "J", "labels": ["stroop"]})"
        "\n";
    write_file(dir.file("c.jsonl"), line + fixtures::doc_line("d2", {"stroop"}, 2000));
    Corpus corpus = Corpus::ingest_jsonl(dir.file("c.jsonl"), lex).first;
    auto timelines = term_frequencies(corpus);
    std::size_t total = 0;
    for (const auto& [y, n] : timelines.at("stroop").counts_by_year) total += n;
    CHECK(total == 1); // only the dated doc counts
    CHECK(corpus.size() == 2);
}

TEST_CASE("innovation curve counts first appearances per kind") {
    TempDir dir("innov");
    // constructs first appearing 1980 x2 needs a second construct: reuse small
    // lexicon's single construct plus tasks as the task curve
    Corpus corpus = corpus_from(dir, fixtures::doc_line("d1", {"attention"}, 1980) +
                                         fixtures::doc_line("d2", {"attention"}, 1985) +
                                         fixtures::doc_line("d3", {"stroop"}, 1985) +
                                         fixtures::doc_line("d4", {"nback"}, 1985));
    auto timelines = term_frequencies(corpus);
    auto construct_curve = innovation_curve(timelines, TermKind::Construct, corpus.lexicon());
    CHECK(construct_curve == std::map<int, std::size_t>{{1980, 1}});
    auto task_curve = innovation_curve(timelines, TermKind::Task, corpus.lexicon());
    CHECK(task_curve == std::map<int, std::size_t>{{1985, 2}});

    // sum over the curve equals the number of terms of that kind that occur
    std::size_t sum = 0;
    for (const auto& [y, n] : task_curve) sum += n;
    CHECK(sum == 2);
}

TEST_CASE("innovation curve over an empty corpus is empty") {
    std::map<std::string, TermTimeline> empty;
    Lexicon lex;
    CHECK(innovation_curve(empty, TermKind::Task, lex).empty());
}

TEST_CASE("operationalization lag arithmetic") {
    TempDir dir("lag");
    // attention first appears 1980, first co-label with a task 1987 -> lag 7
    Corpus corpus = corpus_from(dir, fixtures::doc_line("d1", {"attention"}, 1980) +
                                         fixtures::doc_line("d2", {"attention"}, 1983) +
                                         fixtures::doc_line("d3", {"attention", "stroop"}, 1987) +
                                         fixtures::doc_line("d4", {"stroop"}, 1975));
    auto timelines = term_frequencies(corpus);
    LagResult lags = operationalization_lag(timelines, corpus.lexicon());
    REQUIRE(lags.lags.count("attention"));
    CHECK(lags.lags.at("attention") == 7);
    CHECK(lags.mean_lag == doctest::Approx(7.0));
    CHECK(lags.never_cooccurring.empty());
}

TEST_CASE("co-occurrence in the first paper gives lag zero") {
    TempDir dir("lag0");
    Corpus corpus = corpus_from(dir, fixtures::doc_line("d1", {"attention", "nback"}, 1990));
    auto lags = operationalization_lag(term_frequencies(corpus), corpus.lexicon());
    CHECK(lags.lags.at("attention") == 0);
}

TEST_CASE("constructs that never co-occur are excluded and listed") {
    TempDir dir("lag_never");
    Corpus corpus = corpus_from(dir, fixtures::doc_line("d1", {"attention"}, 1990) +
                                         fixtures::doc_line("d2", {"stroop"}, 1991));
    auto lags = operationalization_lag(term_frequencies(corpus), corpus.lexicon());
    CHECK(lags.lags.empty());
    CHECK(!lags.mean_lag.has_value());
    CHECK(lags.never_cooccurring == std::vector<std::string>{"attention"});
}

TEST_CASE("tasks_per_paper histogram and multi-task share") {
    TempDir dir("hist");
    Corpus corpus = corpus_from(dir, fixtures::doc_line("d1", {"stroop"}) +
                                         fixtures::doc_line("d2", {"nback"}) +
                                         fixtures::doc_line("d3", {"stroop", "nback"}) +
                                         fixtures::doc_line("d4", {"stroop", "nback", "attention"}));
    TasksPerPaper result = tasks_per_paper(corpus);
    CHECK(result.histogram == std::map<std::size_t, std::size_t>{{1, 2}, {2, 2}});
    CHECK(result.multi_task_share == doctest::Approx(0.5));

    std::size_t total = 0;
    for (const auto& [k, n] : result.histogram) total += n;
    CHECK(total == corpus.size());
}

TEST_CASE("corpus with no task labels lands in the zero bucket") {
    TempDir dir("hist0");
    Corpus corpus = corpus_from(dir, fixtures::doc_line("d1", {"attention"}) +
                                         fixtures::doc_line("d2", {"attention"}));
    TasksPerPaper result = tasks_per_paper(corpus);
    CHECK(result.histogram == std::map<std::size_t, std::size_t>{{0, 2}});
    CHECK(result.multi_task_share == 0.0);
}

TEST_CASE("stats exports are byte-identical across runs") {
    TempDir dir("stats_bytes");
    Corpus corpus = corpus_from(dir, fixtures::doc_line("d1", {"attention", "stroop"}, 1999) +
                                         fixtures::doc_line("d2", {"nback"}, 2001));
    auto timelines = term_frequencies(corpus);
    export_timelines_csv(timelines, dir.file("t1.csv"));
    export_timelines_csv(timelines, dir.file("t2.csv"));
    CHECK(read_file(dir.file("t1.csv")) == read_file(dir.file("t2.csv")));
    export_innovation_csv(timelines, corpus.lexicon(), dir.file("i1.csv"));
    std::string body = read_file(dir.file("i1.csv"));
    CHECK(body.rfind("kind,year,new_terms", 0) == 0);
}

// ---------------------------------------------------------------------------
// discipline profiles

namespace {

// Builds a corpus whose construct "attention" associates with task "stroop"
// in psychology journals and with "nback" in neuroscience journals; topic
// rows are planted directly.
struct DisciplineFixture {
    TempDir dir{"disc"};
    Corpus corpus;
    std::map<std::string, Eigen::VectorXd> rows;
};

DisciplineFixture divergent_disciplines(int docs_per_group = 20) {
    DisciplineFixture f;
    std::string body;
    Rng rng(3);
    int doc_no = 0;
    auto add_docs = [&](const std::string& journal, const std::set<std::string>& labels,
                        int topic_axis, int n) {
        for (int i = 0; i < n; ++i) {
            Document d;
            d.doc_id = "d" + std::to_string(doc_no++);
            d.title = "t";
            d.abstract_text = "a";
            d.year = 2000;
            d.journal = journal;
            d.labels = labels;
            body += document_to_json(d) + "\n";
            // generous shared spread: same-axis groups overlap, cross-axis
            // groups stay disjoint
            Eigen::VectorXd row = Eigen::VectorXd::Constant(3, 0.05);
            row[topic_axis] = 1.0;
            for (int j = 0; j < 3; ++j) row[j] += 0.2 * rng.next_double();
            row /= row.sum();
            f.rows.emplace(d.doc_id, row);
        }
    };
    // psychology: attention sits on axis 0 with stroop; nback off on axis 2
    add_docs("Psychological Review", {"attention"}, 0, docs_per_group);
    add_docs("Psychological Review", {"stroop"}, 0, docs_per_group);
    add_docs("Psychological Review", {"nback"}, 2, docs_per_group);
    // neuroscience: attention moves to axis 1 with nback; stroop off on axis 2
    add_docs("Nature Neuroscience", {"attention"}, 1, docs_per_group);
    add_docs("Nature Neuroscience", {"nback"}, 1, docs_per_group);
    add_docs("Nature Neuroscience", {"stroop"}, 2, docs_per_group);

    Lexicon lex = Lexicon::load(fixtures::small_lexicon(f.dir));
    write_file(f.dir.file("c.jsonl"), body);
    f.corpus = Corpus::ingest_jsonl(f.dir.file("c.jsonl"), lex).first;
    return f;
}

} // namespace

TEST_CASE("discipline profiles diverge when operationalization differs") {
    DisciplineFixture f = divergent_disciplines();
    DisciplineProfileParams params;
    params.min_docs_per_discipline = 5;
    params.n_samples = 2000;
    params.shrinkage = 0.3;
    auto result = discipline_profiles(f.corpus, f.rows, params);

    REQUIRE(result.profiles.size() == 2);
    bool found = false;
    for (const auto& o : result.overlaps) {
        if (o.construct != "attention") continue;
        found = true;
        CHECK(o.cosine < 0.3);
    }
    CHECK(found);
}

TEST_CASE("identical sub-corpora give overlap 1 within MC tolerance") {
    DisciplineFixture f;
    std::string body;
    Rng rng(5);
    int doc_no = 0;
    // every doc matches both "social" and "psycho": the two discipline
    // sub-corpora are the same document set
    for (int i = 0; i < 10; ++i) {
        for (auto [label, axis] : std::initializer_list<std::pair<const char*, int>>{
                 {"attention", 0}, {"stroop", 0}, {"nback", 1}}) {
            Document d;
            d.doc_id = "d" + std::to_string(doc_no++);
            d.title = "t";
            d.abstract_text = "a";
            d.year = 2000;
            d.journal = "Journal of Social Psychology";
            d.labels = {label};
            body += document_to_json(d) + "\n";
            Eigen::VectorXd row = Eigen::VectorXd::Constant(3, 0.05);
            row[axis] = 1.0;
            for (int j = 0; j < 3; ++j) row[j] += 0.01 * rng.next_double();
            row /= row.sum();
            f.rows.emplace(d.doc_id, row);
        }
    }
    Lexicon lex = Lexicon::load(fixtures::small_lexicon(f.dir));
    write_file(f.dir.file("c.jsonl"), body);
    f.corpus = Corpus::ingest_jsonl(f.dir.file("c.jsonl"), lex).first;

    DisciplineProfileParams params;
    params.min_docs_per_discipline = 5;
    params.n_samples = 4000;
    auto result = discipline_profiles(f.corpus, f.rows, params);
    REQUIRE(result.profiles.size() == 2);
    REQUIRE(!result.overlaps.empty());
    for (const auto& o : result.overlaps) CHECK(o.cosine == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("single-discipline corpora produce one profile and no comparisons") {
    DisciplineFixture f = divergent_disciplines();
    // strip neuroscience docs
    std::map<std::string, Document> docs;
    for (const auto& [id, d] : f.corpus.documents())
        if (d.journal == "Psychological Review") docs.emplace(id, d);
    Corpus psych_only(docs, f.corpus.lexicon());

    DisciplineProfileParams params;
    params.min_docs_per_discipline = 5;
    params.n_samples = 2000;
    auto result = discipline_profiles(psych_only, f.rows, params);
    CHECK(result.profiles.size() == 1);
    CHECK(result.overlaps.empty());
    CHECK(!result.skipped.empty()); // the other disciplines fell below minimum
}

TEST_CASE("discipline csv export has the documented columns") {
    DisciplineFixture f = divergent_disciplines();
    DisciplineProfileParams params;
    params.min_docs_per_discipline = 5;
    params.n_samples = 2000;
    auto result = discipline_profiles(f.corpus, f.rows, params);
    export_discipline_csv(result, f.dir.file("assoc.csv"), f.dir.file("overlap.csv"));
    std::string assoc = read_file(f.dir.file("assoc.csv"));
    CHECK(assoc.rfind("discipline,construct,task,weight", 0) == 0);
    CHECK(assoc.find("psychology,attention,stroop,") != std::string::npos);
    std::string ov = read_file(f.dir.file("overlap.csv"));
    CHECK(ov.rfind("construct,discipline_a,discipline_b,cosine", 0) == 0);
}
