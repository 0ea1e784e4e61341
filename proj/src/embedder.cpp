#include "termgraph/embedder.hpp"

#include "termgraph/util.hpp"

#include <fstream>
#include <sstream>

namespace termgraph {

void EmbeddingStore::put(const std::string& doc_id, Eigen::VectorXd v) {
    if (dim_ == 0) dim_ = static_cast<int>(v.size());
    if (v.size() != dim_)
        throw std::runtime_error("embedding dimension mismatch for '" + doc_id + "': got " +
                                 std::to_string(v.size()) + ", store has " + std::to_string(dim_));
    if (!v.allFinite())
        throw std::runtime_error("non-finite embedding for '" + doc_id + "'");
    vectors_[doc_id] = std::move(v);
}

const Eigen::VectorXd* EmbeddingStore::find(const std::string& doc_id) const {
    auto it = vectors_.find(doc_id);
    return it == vectors_.end() ? nullptr : &it->second;
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
    std::string out = "dim=" + std::to_string(dim_) + " count=" + std::to_string(vectors_.size()) + "\n";
    for (const auto& [id, v] : vectors_) {
        out += id;
        out += '\t';
        for (int i = 0; i < v.size(); ++i) {
            if (i) out += ' ';
            out += format_double(v[i]);
        }
        out += '\n';
    }
    write_file(path, out);
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path.string());
    std::string header;
    std::getline(in, header);
    int dim = 0;
    std::size_t count = 0;
    if (std::sscanf(header.c_str(), "dim=%d count=%zu", &dim, &count) != 2 || dim < 1)
        throw std::runtime_error("bad embedding file header: '" + header + "'");
    EmbeddingStore store(dim);
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("embedding file line " + std::to_string(line_no) +
                                     ": missing tab separator");
        std::string id = line.substr(0, tab);
        auto parts = split(std::string_view(line).substr(tab + 1), ' ');
        if (static_cast<int>(parts.size()) != dim)
            throw std::runtime_error("embedding file line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(dim) + " values, got " + std::to_string(parts.size()));
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = parse_double(parts[i]);
        store.put(id, std::move(v));
    }
    if (store.size() != count)
        throw std::runtime_error("embedding file count mismatch: header says " +
                                 std::to_string(count) + ", read " + std::to_string(store.size()));
    return store;
}

Eigen::VectorXd mock_embed(const std::string& text, std::uint64_t seed, int dim) {
    if (dim < 2) throw std::runtime_error("mock_embed requires dim >= 2");
    Rng rng(mix_seed(seed, fnv1a64(text)));
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.next_normal();
    double n = v.norm();
    if (n == 0.0) v[0] = 1.0, n = 1.0;
    return v / n;
}

MockProvider::MockProvider(std::uint64_t seed, int dim) : seed_(seed), dim_(dim) {
    if (dim < 2) throw std::runtime_error("mock provider requires dim >= 2");
}

std::optional<Eigen::VectorXd> MockProvider::embed(const std::string&, const std::string& text) {
    return mock_embed(text, seed_, dim_);
}

std::string MockProvider::describe() const {
    return "mock(seed=" + std::to_string(seed_) + ",dim=" + std::to_string(dim_) + ")";
}

PrecomputedProvider::PrecomputedProvider(const std::filesystem::path& path)
    : store_(EmbeddingStore::load(path)), path_(path) {}

std::optional<Eigen::VectorXd> PrecomputedProvider::embed(const std::string& doc_id,
                                                          const std::string&) {
    const Eigen::VectorXd* v = store_.find(doc_id);
    if (!v) return std::nullopt;
    return *v;
}

std::string PrecomputedProvider::describe() const { return "file(" + path_.string() + ")"; }

std::string document_embedding_text(const Document& doc) {
    return doc.title + "\n" + doc.abstract_text;
}

std::pair<EmbeddingStore, EmbedReport> embed_corpus(const Corpus& corpus,
                                                    EmbeddingProvider& provider) {
    if (corpus.size() == 0) throw std::runtime_error("cannot embed an empty corpus");
    EmbeddingStore store(provider.dim());
    EmbedReport report;
    for (const auto& [id, doc] : corpus.documents()) {
        std::optional<Eigen::VectorXd> v;
        // transient provider failures retry; persistent ones mark the
        // document missing and it drops out downstream
        for (int attempt = 0; attempt < 3; ++attempt) {
            try {
                v = provider.embed(id, document_embedding_text(doc));
                break;
            } catch (const std::exception&) {
                v.reset();
            }
        }
        if (!v) {
            report.missing.push_back(id);
            continue;
        }
        if (v->size() != provider.dim())
            throw std::runtime_error("provider " + provider.describe() +
                                     " returned wrong dimension for '" + id + "'");
        double n = v->norm();
        if (n == 0.0) {
            report.missing.push_back(id);
            continue;
        }
        store.put(id, *v / n);
        ++report.embedded;
    }
    return {std::move(store), std::move(report)};
}

} // namespace termgraph
