#pragma once

#include "termgraph/corpus.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace termgraph {

// Per-document vectors, all of one dimension, keyed by doc_id.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(int dim) : dim_(dim) {}

    void put(const std::string& doc_id, Eigen::VectorXd v);
    const Eigen::VectorXd* find(const std::string& doc_id) const;
    int dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }
    const std::map<std::string, Eigen::VectorXd>& vectors() const { return vectors_; }

    // Text format: header "dim=<D> count=<N>", then "doc_id\tv1 v2 ... vD".
    // Values round-trip bit-exactly (shortest decimal form).
    void save(const std::filesystem::path& path) const;
    static EmbeddingStore load(const std::filesystem::path& path);

private:
    int dim_ = 0;
    std::map<std::string, Eigen::VectorXd> vectors_;
};

// Synchronous provider with a declared dimension. The text reaches the
// provider untouched: no lowercasing, stripping, or token filtering.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() const = 0;
    // Empty optional = this document cannot be embedded (missing record,
    // provider failure after retries); it is excluded downstream.
    virtual std::optional<Eigen::VectorXd> embed(const std::string& doc_id,
                                                 const std::string& text) = 0;
    virtual std::string describe() const = 0;
};

// Deterministic stand-in for a remote model: hash of (text, seed) seeds a PRNG
// drawing dim standard normals, L2-normalized.
Eigen::VectorXd mock_embed(const std::string& text, std::uint64_t seed, int dim);

class MockProvider final : public EmbeddingProvider {
public:
    MockProvider(std::uint64_t seed, int dim);
    int dim() const override { return dim_; }
    std::optional<Eigen::VectorXd> embed(const std::string& doc_id,
                                         const std::string& text) override;
    std::string describe() const override;

private:
    std::uint64_t seed_;
    int dim_;
};

// Vectors precomputed elsewhere (e.g. by a hosted model) and loaded from the
// embedding file format; lookups are by doc_id.
class PrecomputedProvider final : public EmbeddingProvider {
public:
    explicit PrecomputedProvider(const std::filesystem::path& path);
    int dim() const override { return store_.dim(); }
    std::optional<Eigen::VectorXd> embed(const std::string& doc_id,
                                         const std::string& text) override;
    std::string describe() const override;

private:
    EmbeddingStore store_;
    std::filesystem::path path_;
};

struct EmbedReport {
    std::size_t embedded = 0;
    std::vector<std::string> missing; // excluded downstream
};

// The provider sees `title\n`abstract` verbatim. All outputs are
// L2-normalized before storage.
std::pair<EmbeddingStore, EmbedReport> embed_corpus(const Corpus& corpus,
                                                    EmbeddingProvider& provider);

std::string document_embedding_text(const Document& doc);

} // namespace termgraph
