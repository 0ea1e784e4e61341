#pragma once

#include "termgraph/lexicon.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace termgraph {

struct Document {
    std::string doc_id;
    std::string title;
    std::string abstract_text;
    std::optional<int> year; // absent year excludes the doc from time stats only
    std::string journal;
    std::set<std::string> labels;
    bool missing_abstract = false;
};

enum class Discipline { Social, Psychology, Neuroscience, CognitiveScience };

const char* to_string(Discipline d);
std::set<Discipline> tag_disciplines(const Document& doc);

struct IngestReport {
    std::size_t lines_read = 0;
    std::size_t documents = 0;
    std::size_t deduped = 0;   // records merged into an existing doc_id
    std::size_t rejected = 0;  // records with labels unknown to the lexicon
    std::size_t malformed = 0; // unparseable lines, skipped
};

// Immutable after construction; safe for shared concurrent reads.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::map<std::string, Document> docs, Lexicon lexicon);

    static std::pair<Corpus, IngestReport> ingest_jsonl(const std::filesystem::path& path,
                                                        const Lexicon& lexicon);

    // Deterministic JSONL serialization (sorted by doc_id).
    void save_jsonl(const std::filesystem::path& path) const;

    const std::map<std::string, Document>& documents() const { return docs_; }
    const Lexicon& lexicon() const { return lexicon_; }
    std::size_t size() const { return docs_.size(); }

    // doc count per term id, for every lexicon term (0 when unused)
    std::map<std::string, std::size_t> term_support() const;
    std::vector<std::string> docs_with_label(const std::string& term_id) const;

private:
    std::map<std::string, Document> docs_;
    Lexicon lexicon_;
};

// Drops lexicon terms supported by fewer than min_docs documents, removes
// their labels everywhere, and drops documents left unlabeled.
std::pair<Corpus, std::vector<std::string>> prune_rare_terms(const Corpus& corpus,
                                                             std::size_t min_docs = 5);

Document parse_document_json(const std::string& line, std::size_t line_no);
std::string document_to_json(const Document& doc);

} // namespace termgraph
