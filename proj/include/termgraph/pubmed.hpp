#pragma once

#include "termgraph/corpus.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace termgraph {

struct SearchRequest {
    std::string term_id;
    std::string query;
    std::optional<std::pair<int, int>> date_range; // (year_from, year_to)
    std::size_t offset = 0;
    std::optional<std::size_t> limit; // absent = all hits
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

// GET against a base URL; the default implementation uses cpp-httplib.
// Injectable so tests can script responses and count requests.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const std::string& path_and_query) = 0;
};

std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url);

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

std::shared_ptr<Clock> system_clock();

// Serializes request starts so the configured rate is never exceeded.
class RateLimiter {
public:
    RateLimiter(double per_second, std::shared_ptr<Clock> clock);
    void acquire();

private:
    std::int64_t interval_ms_;
    std::shared_ptr<Clock> clock_;
    std::int64_t next_allowed_ = 0;
    std::mutex mu_;
};

struct PubmedConfig {
    // env EUTILS_BASE_URL overrides; trailing slash optional
    std::string base_url = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils";
    double rate_per_second = 3.0; // NCBI policy without an API key
    int max_retries = 5;
    std::size_t search_page_size = 10000; // esearch retmax cap
    std::size_t fetch_batch_size = 200;
    int max_in_flight = 2;
    std::filesystem::path cache_dir; // empty = no caching
    std::string api_key;
};

PubmedConfig pubmed_config_from_env();

struct FetchReport {
    std::size_t requested = 0;
    std::size_t parsed = 0;
    std::size_t missing_abstract = 0;
    std::size_t parse_failures = 0;
    std::size_t http_requests = 0;
};

class EutilsClient {
public:
    explicit EutilsClient(PubmedConfig config, std::unique_ptr<HttpTransport> transport = nullptr,
                          std::shared_ptr<Clock> clock = nullptr);

    // Paginates transparently; ids returned in stable server order.
    std::vector<std::string> search_ids(const SearchRequest& req);

    // Batches of at most fetch_batch_size ids; articles without an abstract
    // are emitted with an empty abstract and flagged.
    std::vector<Document> fetch_abstracts(const std::vector<std::string>& ids,
                                          FetchReport* report = nullptr);

    std::size_t requests_made() const { return requests_made_; }

private:
    std::string get_with_retry(const std::string& path_and_query);

    PubmedConfig config_;
    std::unique_ptr<HttpTransport> transport_;
    std::shared_ptr<Clock> clock_;
    RateLimiter limiter_;
    std::size_t requests_made_ = 0;
    std::mutex mu_;
};

// Minimal XML helpers for the E-utilities payloads.
std::vector<std::string> xml_blocks(const std::string& body, const std::string& tag);
std::optional<std::string> xml_first_text(const std::string& body, const std::string& tag);
std::vector<std::string> xml_all_text(const std::string& body, const std::string& tag);
std::string xml_decode_entities(const std::string& text);

Document parse_pubmed_article(const std::string& article_xml);
std::string url_encode(const std::string& s);

} // namespace termgraph
