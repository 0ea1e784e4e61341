#include "termgraph/corpus.hpp"

#include "termgraph/util.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace termgraph {

using nlohmann::json;

const char* to_string(Discipline d) {
    switch (d) {
        case Discipline::Social: return "social";
        case Discipline::Psychology: return "psychology";
        case Discipline::Neuroscience: return "neuroscience";
        case Discipline::CognitiveScience: return "cognitive_science";
    }
    return "?";
}

std::set<Discipline> tag_disciplines(const Document& doc) {
    std::string j = to_lower(doc.journal);
    std::set<Discipline> out;
    if (j.find("social") != std::string::npos) out.insert(Discipline::Social);
    if (j.find("psycho") != std::string::npos) out.insert(Discipline::Psychology);
    if (j.find("neur") != std::string::npos) out.insert(Discipline::Neuroscience);
    if (j.find("cognit") != std::string::npos) out.insert(Discipline::CognitiveScience);
    return out;
}

Corpus::Corpus(std::map<std::string, Document> docs, Lexicon lexicon)
    : docs_(std::move(docs)), lexicon_(std::move(lexicon)) {
    for (const auto& [id, doc] : docs_) {
        if (doc.labels.empty())
            throw std::runtime_error("document '" + id + "' has no labels");
        for (const auto& label : doc.labels)
            if (!lexicon_.contains(label))
                throw std::runtime_error("document '" + id + "' labeled with unknown term '" +
                                         label + "'");
    }
}

Document parse_document_json(const std::string& line, std::size_t line_no) {
    json e;
    try {
        e = json::parse(line);
    } catch (const json::parse_error& ex) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": " + ex.what());
    }
    Document d;
    try {
        d.doc_id = e.at("doc_id").get<std::string>();
        d.title = e.value("title", "");
        d.abstract_text = e.value("abstract", "");
        d.journal = e.value("journal", "");
        if (e.contains("year") && !e["year"].is_null()) {
            int y = e["year"].get<int>();
            if (y < 1800 || y > 2100)
                throw std::runtime_error("year " + std::to_string(y) + " out of range");
            d.year = y;
        }
        for (const auto& l : e.at("labels")) d.labels.insert(l.get<std::string>());
    } catch (const std::exception& ex) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": " + ex.what());
    }
    if (d.doc_id.empty())
        throw std::runtime_error("line " + std::to_string(line_no) + ": empty doc_id");
    return d;
}

std::string document_to_json(const Document& doc) {
    json e;
    e["doc_id"] = doc.doc_id;
    e["title"] = doc.title;
    e["abstract"] = doc.abstract_text;
    if (doc.year) e["year"] = *doc.year;
    else e["year"] = nullptr;
    e["journal"] = doc.journal;
    e["labels"] = doc.labels; // std::set serializes sorted
    return e.dump();
}

std::pair<Corpus, IngestReport> Corpus::ingest_jsonl(const std::filesystem::path& path,
                                                     const Lexicon& lexicon) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());

    IngestReport report;
    std::map<std::string, Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++report.lines_read;
        Document d;
        try {
            d = parse_document_json(line, line_no);
        } catch (const std::exception&) {
            ++report.malformed;
            continue;
        }
        bool unknown = false;
        for (const auto& label : d.labels)
            if (!lexicon.contains(label)) unknown = true;
        if (unknown || d.labels.empty()) {
            ++report.rejected;
            continue;
        }
        auto it = docs.find(d.doc_id);
        if (it == docs.end()) {
            docs.emplace(d.doc_id, std::move(d));
        } else {
            // same paper retrieved by several queries: merge label sets
            it->second.labels.insert(d.labels.begin(), d.labels.end());
            ++report.deduped;
        }
    }
    report.documents = docs.size();
    return {Corpus(std::move(docs), lexicon), report};
}

void Corpus::save_jsonl(const std::filesystem::path& path) const {
    std::string out;
    for (const auto& [id, doc] : docs_) {
        out += document_to_json(doc);
        out += '\n';
    }
    write_file(path, out);
}

std::map<std::string, std::size_t> Corpus::term_support() const {
    std::map<std::string, std::size_t> support;
    for (const auto& [id, t] : lexicon_.terms()) support[id] = 0;
    for (const auto& [id, doc] : docs_)
        for (const auto& label : doc.labels) ++support[label];
    return support;
}

std::vector<std::string> Corpus::docs_with_label(const std::string& term_id) const {
    std::vector<std::string> out;
    for (const auto& [id, doc] : docs_)
        if (doc.labels.count(term_id)) out.push_back(id);
    return out;
}

std::pair<Corpus, std::vector<std::string>> prune_rare_terms(const Corpus& corpus,
                                                             std::size_t min_docs) {
    if (min_docs < 1) throw std::runtime_error("min_docs must be >= 1");
    auto support = corpus.term_support();
    std::vector<std::string> removed;
    for (const auto& [term, n] : support)
        if (n < min_docs) removed.push_back(term);

    Lexicon pruned_lexicon = corpus.lexicon().without(removed);
    std::map<std::string, Document> docs;
    for (const auto& [id, doc] : corpus.documents()) {
        Document d = doc;
        for (const auto& term : removed) d.labels.erase(term);
        if (!d.labels.empty()) docs.emplace(id, std::move(d));
    }
    return {Corpus(std::move(docs), std::move(pruned_lexicon)), removed};
}

} // namespace termgraph
