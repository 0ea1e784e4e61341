#include "termgraph/biblio.hpp"

#include "termgraph/term_graph.hpp"
#include "termgraph/util.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace termgraph {

std::map<std::string, TermTimeline> term_frequencies(const Corpus& corpus) {
    std::map<std::string, TermTimeline> out;
    for (const auto& [id, term] : corpus.lexicon().terms()) {
        TermTimeline t;
        t.term_id = id;
        out.emplace(id, std::move(t));
    }
    for (const auto& [doc_id, doc] : corpus.documents()) {
        if (!doc.year) continue;
        bool has_task = false, has_construct = false;
        for (const auto& label : doc.labels) {
            const LexiconTerm* term = corpus.lexicon().find(label);
            if (term->kind == TermKind::Task) has_task = true;
            else has_construct = true;
        }
        bool mixed = has_task && has_construct;
        for (const auto& label : doc.labels) {
            TermTimeline& t = out.at(label);
            ++t.counts_by_year[*doc.year];
            if (!t.first_year || *doc.year < *t.first_year) t.first_year = *doc.year;
            if (mixed && (!t.first_cooccurrence_year || *doc.year < *t.first_cooccurrence_year))
                t.first_cooccurrence_year = *doc.year;
        }
    }
    return out;
}

std::map<int, std::size_t> innovation_curve(const std::map<std::string, TermTimeline>& timelines,
                                            TermKind kind, const Lexicon& lexicon) {
    std::map<int, std::size_t> out;
    for (const auto& [id, t] : timelines) {
        const LexiconTerm* term = lexicon.find(id);
        if (!term || term->kind != kind || !t.first_year) continue;
        ++out[*t.first_year];
    }
    return out;
}

LagResult operationalization_lag(const std::map<std::string, TermTimeline>& timelines,
                                 const Lexicon& lexicon) {
    LagResult result;
    double total = 0.0;
    for (const auto& [id, t] : timelines) {
        const LexiconTerm* term = lexicon.find(id);
        if (!term || term->kind != TermKind::Construct || !t.first_year) continue;
        if (t.first_cooccurrence_year) {
            int lag = *t.first_cooccurrence_year - *t.first_year;
            result.lags[id] = lag;
            total += lag;
        } else {
            result.never_cooccurring.push_back(id);
        }
    }
    if (!result.lags.empty()) result.mean_lag = total / static_cast<double>(result.lags.size());
    return result;
}

TasksPerPaper tasks_per_paper(const Corpus& corpus) {
    TasksPerPaper out;
    std::size_t multi = 0;
    for (const auto& [doc_id, doc] : corpus.documents()) {
        std::size_t tasks = 0;
        for (const auto& label : doc.labels)
            if (corpus.lexicon().find(label)->kind == TermKind::Task) ++tasks;
        ++out.histogram[tasks];
        if (tasks >= 2) ++multi;
    }
    out.multi_task_share =
        corpus.size() == 0 ? 0.0 : static_cast<double>(multi) / static_cast<double>(corpus.size());
    return out;
}

DisciplineProfilesResult discipline_profiles(const Corpus& corpus,
                                             const std::map<std::string, Eigen::VectorXd>& doc_topics,
                                             const DisciplineProfileParams& params) {
    DisciplineProfilesResult result;
    const std::array<Discipline, 4> all = {Discipline::Social, Discipline::Psychology,
                                           Discipline::Neuroscience, Discipline::CognitiveScience};

    for (Discipline d : all) {
        // sub-corpus: documents carrying this discipline tag and a topic row
        std::vector<const Document*> docs;
        for (const auto& [id, doc] : corpus.documents())
            if (tag_disciplines(doc).count(d) && doc_topics.count(id)) docs.push_back(&doc);
        if (docs.size() < params.min_docs_per_discipline) {
            result.skipped.push_back(to_string(d));
            continue;
        }

        // per-term topic rows within the discipline
        std::map<std::string, std::vector<const Eigen::VectorXd*>> rows_of;
        for (const Document* doc : docs)
            for (const auto& label : doc->labels)
                rows_of[label].push_back(&doc_topics.at(doc->doc_id));

        std::map<std::string, NodeDistribution> dists;
        std::vector<std::string> tasks, constructs;
        for (const auto& [term, rows] : rows_of) {
            if (rows.size() < std::max<std::size_t>(2, params.min_docs_per_term)) continue;
            Eigen::MatrixXd m(static_cast<int>(rows.size()), rows.front()->size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                m.row(static_cast<int>(i)) = rows[i]->transpose();
            dists.emplace(term, fit_node_distribution(term, m, CovarianceMode::Diagonal,
                                                      params.shrinkage));
            if (corpus.lexicon().find(term)->kind == TermKind::Task) tasks.push_back(term);
            else constructs.push_back(term);
        }
        if (tasks.empty() || constructs.empty()) {
            result.skipped.push_back(to_string(d));
            continue;
        }

        DisciplineProfile profile;
        profile.discipline = d;
        profile.docs = docs.size();
        for (const auto& c : constructs)
            for (const auto& t : tasks) {
                std::uint64_t s = mix_seed(params.seed, fnv1a64(std::string(to_string(d)) + c),
                                           fnv1a64(t));
                double div = js_divergence(dists.at(c), dists.at(t),
                                           std::max(1000, params.n_samples), s);
                profile.assoc[c][t] = 1.0 / (params.epsilon + div);
            }
        result.profiles.push_back(std::move(profile));
    }

    // pairwise overlap of each construct's association rows across disciplines
    for (std::size_t a = 0; a < result.profiles.size(); ++a) {
        for (std::size_t b = a + 1; b < result.profiles.size(); ++b) {
            const auto& pa = result.profiles[a];
            const auto& pb = result.profiles[b];
            for (const auto& [c, row_a] : pa.assoc) {
                auto it = pb.assoc.find(c);
                if (it == pb.assoc.end()) continue;
                const auto& row_b = it->second;
                std::set<std::string> tasks;
                for (const auto& [t, w] : row_a) tasks.insert(t);
                for (const auto& [t, w] : row_b) tasks.insert(t);
                double dot = 0.0, na = 0.0, nb = 0.0;
                for (const auto& t : tasks) {
                    double wa = row_a.count(t) ? row_a.at(t) : 0.0;
                    double wb = row_b.count(t) ? row_b.at(t) : 0.0;
                    dot += wa * wb;
                    na += wa * wa;
                    nb += wb * wb;
                }
                double cosine = (na == 0.0 || nb == 0.0) ? 0.0 : dot / std::sqrt(na * nb);
                result.overlaps.push_back({c, pa.discipline, pb.discipline, cosine});
            }
        }
    }
    return result;
}

void export_timelines_csv(const std::map<std::string, TermTimeline>& timelines,
                          const std::filesystem::path& path) {
    std::string out = "term,year,count\n";
    for (const auto& [id, t] : timelines)
        for (const auto& [year, count] : t.counts_by_year)
            out += id + "," + std::to_string(year) + "," + std::to_string(count) + "\n";
    write_file(path, out);
}

void export_innovation_csv(const std::map<std::string, TermTimeline>& timelines,
                           const Lexicon& lexicon, const std::filesystem::path& path) {
    std::string out = "kind,year,new_terms\n";
    for (TermKind kind : {TermKind::Task, TermKind::Construct}) {
        auto curve = innovation_curve(timelines, kind, lexicon);
        for (const auto& [year, count] : curve)
            out += std::string(to_string(kind)) + "," + std::to_string(year) + "," +
                   std::to_string(count) + "\n";
    }
    write_file(path, out);
}

void export_lags_csv(const LagResult& lags, const std::filesystem::path& path) {
    std::string out = "construct,lag_years\n";
    for (const auto& [c, lag] : lags.lags) out += c + "," + std::to_string(lag) + "\n";
    for (const auto& c : lags.never_cooccurring) out += c + ",never\n";
    if (lags.mean_lag) out += "__mean__," + format_double(*lags.mean_lag) + "\n";
    write_file(path, out);
}

void export_histogram_csv(const TasksPerPaper& hist, const std::filesystem::path& path) {
    std::string out = "tasks_per_paper,papers\n";
    for (const auto& [k, n] : hist.histogram)
        out += std::to_string(k) + "," + std::to_string(n) + "\n";
    out += "__multi_task_share__," + format_double(hist.multi_task_share) + "\n";
    write_file(path, out);
}

void export_discipline_csv(const DisciplineProfilesResult& result,
                           const std::filesystem::path& assoc_path,
                           const std::filesystem::path& overlap_path) {
    std::string out = "discipline,construct,task,weight\n";
    for (const auto& p : result.profiles)
        for (const auto& [c, row] : p.assoc)
            for (const auto& [t, w] : row)
                out += std::string(to_string(p.discipline)) + "," + c + "," + t + "," +
                       format_double(w) + "\n";
    write_file(assoc_path, out);

    std::string ov = "construct,discipline_a,discipline_b,cosine\n";
    for (const auto& o : result.overlaps)
        ov += o.construct + "," + to_string(o.a) + "," + to_string(o.b) + "," +
              format_double(o.cosine) + "\n";
    write_file(overlap_path, ov);
}

} // namespace termgraph
