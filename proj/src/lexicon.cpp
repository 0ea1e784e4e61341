#include "termgraph/lexicon.hpp"

#include "termgraph/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace termgraph {

using nlohmann::json;

const char* to_string(TermKind k) { return k == TermKind::Task ? "task" : "construct"; }

TermKind term_kind_from_string(const std::string& s) {
    if (s == "task") return TermKind::Task;
    if (s == "construct") return TermKind::Construct;
    throw std::runtime_error("unknown term kind '" + s + "' (expected \"task\" or \"construct\")");
}

Lexicon::Lexicon(std::vector<LexiconTerm> terms) {
    for (auto& t : terms) {
        if (t.id.empty()) throw std::runtime_error("lexicon term with empty id");
        if (t.queries.empty())
            throw std::runtime_error("lexicon term '" + t.id + "' has no search queries");
        if (!terms_.emplace(t.id, t).second)
            throw std::runtime_error("duplicate lexicon id '" + t.id + "'");
    }
    for (const auto& [id, t] : terms_) {
        fold_index_.emplace(fold_key(id), id);
        fold_index_.emplace(fold_key(t.name), id);
    }
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("lexicon parse error in " + path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw std::runtime_error("lexicon file must be a JSON array of terms");

    std::vector<LexiconTerm> terms;
    terms.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& e = doc[i];
        try {
            LexiconTerm t;
            t.id = e.at("id").get<std::string>();
            t.name = e.value("name", t.id);
            t.kind = term_kind_from_string(e.at("kind").get<std::string>());
            for (const auto& q : e.at("queries")) t.queries.push_back(q.get<std::string>());
            terms.push_back(std::move(t));
        } catch (const std::exception& ex) {
            throw std::runtime_error("lexicon entry " + std::to_string(i) + ": " + ex.what());
        }
    }
    return Lexicon(std::move(terms));
}

void Lexicon::save(const std::filesystem::path& path) const {
    json arr = json::array();
    for (const auto& [id, t] : terms_) {
        json e;
        e["id"] = t.id;
        e["name"] = t.name;
        e["kind"] = to_string(t.kind);
        e["queries"] = t.queries;
        arr.push_back(std::move(e));
    }
    write_file(path, arr.dump(2) + "\n");
}

const LexiconTerm* Lexicon::find(const std::string& id) const {
    auto it = terms_.find(id);
    return it == terms_.end() ? nullptr : &it->second;
}

const LexiconTerm* Lexicon::match(const std::string& text) const {
    auto it = fold_index_.find(fold_key(text));
    return it == fold_index_.end() ? nullptr : find(it->second);
}

std::vector<std::string> Lexicon::nearest_names(const std::string& text, std::size_t k) const {
    std::string key = fold_key(text);
    std::vector<std::pair<std::size_t, std::string>> ranked;
    for (const auto& [id, t] : terms_)
        ranked.emplace_back(edit_distance(key, fold_key(t.name)), t.name);
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].second);
    return out;
}

std::size_t Lexicon::count(TermKind k) const {
    std::size_t n = 0;
    for (const auto& [id, t] : terms_)
        if (t.kind == k) ++n;
    return n;
}

Lexicon Lexicon::without(const std::vector<std::string>& ids) const {
    std::vector<LexiconTerm> keep;
    for (const auto& [id, t] : terms_)
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) keep.push_back(t);
    return Lexicon(std::move(keep));
}

} // namespace termgraph
