#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace termgraph {

enum class TermKind { Task, Construct };

const char* to_string(TermKind k);
TermKind term_kind_from_string(const std::string& s);

struct LexiconTerm {
    std::string id;
    std::string name;
    TermKind kind = TermKind::Task;
    std::vector<std::string> queries;
};

// The task/construct term universe. Ids are unique; lookup by id or by a
// case/whitespace-folded form of the id or display name.
class Lexicon {
public:
    Lexicon() = default;
    explicit Lexicon(std::vector<LexiconTerm> terms);

    static Lexicon load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    const LexiconTerm* find(const std::string& id) const;
    // Folded match against ids and names; nullptr when nothing matches.
    const LexiconTerm* match(const std::string& text) const;
    // Names ranked by edit distance to `text`, for error messages.
    std::vector<std::string> nearest_names(const std::string& text, std::size_t k = 3) const;

    bool contains(const std::string& id) const { return terms_.count(id) != 0; }
    std::size_t size() const { return terms_.size(); }
    std::size_t count(TermKind k) const;

    Lexicon without(const std::vector<std::string>& ids) const;

    const std::map<std::string, LexiconTerm>& terms() const { return terms_; }

private:
    std::map<std::string, LexiconTerm> terms_;      // id -> term, sorted for determinism
    std::map<std::string, std::string> fold_index_; // folded id/name -> id
};

} // namespace termgraph
