#include "termgraph/pubmed.hpp"

#include "termgraph/util.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

namespace termgraph {

namespace {

class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(const std::string& base_url) : client_(base_url) {
        client_.set_connection_timeout(15);
        client_.set_read_timeout(60);
        client_.set_follow_location(true);
    }

    HttpResponse get(const std::string& path_and_query) override {
        auto res = client_.Get(path_and_query);
        if (!res) throw std::runtime_error("transport error: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

private:
    httplib::Client client_;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_ms() override {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
    void sleep_ms(std::int64_t ms) override {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
};

} // namespace

std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url) {
    return std::make_unique<HttplibTransport>(base_url);
}

std::shared_ptr<Clock> system_clock() { return std::make_shared<SystemClock>(); }

RateLimiter::RateLimiter(double per_second, std::shared_ptr<Clock> clock)
    : interval_ms_(per_second > 0 ? static_cast<std::int64_t>(1000.0 / per_second) : 0),
      clock_(std::move(clock)) {}

void RateLimiter::acquire() {
    if (interval_ms_ <= 0) return;
    std::lock_guard lock(mu_);
    std::int64_t now = clock_->now_ms();
    if (now < next_allowed_) {
        clock_->sleep_ms(next_allowed_ - now);
        now = next_allowed_;
    }
    next_allowed_ = now + interval_ms_;
}

PubmedConfig pubmed_config_from_env() {
    PubmedConfig c;
    if (const char* base = std::getenv("EUTILS_BASE_URL")) c.base_url = base;
    if (const char* key = std::getenv("EUTILS_API_KEY")) {
        c.api_key = key;
        c.rate_per_second = 10.0; // NCBI allows more with a key
    }
    return c;
}

EutilsClient::EutilsClient(PubmedConfig config, std::unique_ptr<HttpTransport> transport,
                           std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : make_httplib_transport(config_.base_url)),
      clock_(clock ? std::move(clock) : system_clock()), limiter_(config_.rate_per_second, clock_) {}

std::string EutilsClient::get_with_retry(const std::string& path_and_query) {
    std::string cache_key;
    if (!config_.cache_dir.empty()) {
        cache_key = sha256_hex(config_.base_url + path_and_query);
        auto path = config_.cache_dir / (cache_key + ".body");
        if (std::filesystem::exists(path)) return read_file(path);
    }

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) clock_->sleep_ms(250LL << (attempt - 1)); // exponential backoff
        limiter_.acquire();
        try {
            HttpResponse res;
            {
                std::lock_guard lock(mu_);
                ++requests_made_;
            }
            res = transport_->get(path_and_query);
            if (res.status != 200) {
                last_error = "HTTP status " + std::to_string(res.status);
                continue;
            }
            if (!config_.cache_dir.empty()) {
                std::lock_guard lock(mu_); // cache writes serialized
                write_file(config_.cache_dir / (cache_key + ".body"), res.body);
            }
            return res.body;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw std::runtime_error("request failed after " + std::to_string(config_.max_retries + 1) +
                             " attempts: " + last_error + " (" + path_and_query + ")");
}

std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') out += static_cast<char>(c);
        else if (c == ' ') out += '+';
        else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xf];
        }
    }
    return out;
}

std::vector<std::string> EutilsClient::search_ids(const SearchRequest& req) {
    if (req.query.empty()) throw std::runtime_error("search query must be non-empty");

    std::vector<std::string> ids;
    std::size_t offset = req.offset;
    std::size_t page = std::min<std::size_t>(config_.search_page_size, 10000);
    while (true) {
        std::size_t want = req.limit ? std::min(page, req.offset + *req.limit - offset) : page;
        if (want == 0) break;
        std::string path = "/esearch.fcgi?db=pubmed&retmode=xml&term=" + url_encode(req.query) +
                           "&retstart=" + std::to_string(offset) +
                           "&retmax=" + std::to_string(want);
        if (req.date_range)
            path += "&mindate=" + std::to_string(req.date_range->first) +
                    "&maxdate=" + std::to_string(req.date_range->second) + "&datetype=pdat";
        if (!config_.api_key.empty()) path += "&api_key=" + config_.api_key;

        std::string body = get_with_retry(path);
        auto count_text = xml_first_text(body, "Count");
        if (!count_text) throw std::runtime_error("esearch response has no Count element");
        std::size_t total = static_cast<std::size_t>(std::stoull(*count_text));
        auto page_ids = xml_all_text(body, "Id");
        for (auto& id : page_ids) ids.push_back(std::move(id));
        offset += page_ids.size();
        bool exhausted = offset >= total || page_ids.empty();
        bool reached_limit = req.limit && ids.size() >= *req.limit;
        if (exhausted || reached_limit) break;
    }
    if (req.limit && ids.size() > *req.limit) ids.resize(*req.limit);
    return ids;
}

std::vector<Document> EutilsClient::fetch_abstracts(const std::vector<std::string>& ids,
                                                    FetchReport* report) {
    if (ids.empty()) throw std::runtime_error("fetch_abstracts: no ids given");
    FetchReport rep;
    rep.requested = ids.size();

    std::size_t batch = std::min<std::size_t>(config_.fetch_batch_size, 200);
    std::vector<std::vector<std::string>> batches;
    for (std::size_t i = 0; i < ids.size(); i += batch)
        batches.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(i),
                             ids.begin() + static_cast<std::ptrdiff_t>(std::min(i + batch, ids.size())));

    std::vector<std::vector<Document>> results(batches.size());
    std::vector<std::size_t> missing(batches.size(), 0), failures(batches.size(), 0);

    auto run_batch = [&](std::size_t b) {
        std::string joined;
        for (const auto& id : batches[b]) {
            if (!joined.empty()) joined += ',';
            joined += id;
        }
        std::string path = "/efetch.fcgi?db=pubmed&retmode=xml&id=" + joined;
        if (!config_.api_key.empty()) path += "&api_key=" + config_.api_key;
        std::string body = get_with_retry(path);
        for (const auto& block : xml_blocks(body, "PubmedArticle")) {
            try {
                Document doc = parse_pubmed_article(block);
                if (doc.missing_abstract) ++missing[b];
                results[b].push_back(std::move(doc));
            } catch (const std::exception&) {
                ++failures[b];
            }
        }
    };

    int workers = std::clamp(config_.max_in_flight, 1, 8);
    if (workers == 1 || batches.size() == 1) {
        for (std::size_t b = 0; b < batches.size(); ++b) run_batch(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t b = next.fetch_add(1); b < batches.size(); b = next.fetch_add(1))
                    run_batch(b);
            });
        for (auto& th : pool) th.join();
    }

    std::vector<Document> docs;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        rep.missing_abstract += missing[b];
        rep.parse_failures += failures[b];
        for (auto& d : results[b]) docs.push_back(std::move(d));
    }
    rep.parsed = docs.size();
    rep.http_requests = requests_made_;
    if (report) *report = rep;
    return docs;
}

// ---------------------------------------------------------------------------
// XML helpers. E-utilities payloads are regular enough that tag scanning with
// entity decoding covers them; this is not a general XML parser.

std::string xml_decode_entities(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] != '&') {
            out += text[i++];
            continue;
        }
        auto semi = text.find(';', i);
        if (semi == std::string::npos || semi - i > 10) {
            out += text[i++];
            continue;
        }
        std::string ent = text.substr(i + 1, semi - i - 1);
        if (ent == "amp") out += '&';
        else if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (!ent.empty() && ent[0] == '#') {
            long code = ent[1] == 'x' || ent[1] == 'X' ? std::strtol(ent.c_str() + 2, nullptr, 16)
                                                       : std::strtol(ent.c_str() + 1, nullptr, 10);
            if (code > 0 && code < 128) out += static_cast<char>(code);
            else out += '?'; // non-ASCII entities degrade to a placeholder
        } else {
            out += '&' + ent + ';';
        }
        i = semi + 1;
    }
    return out;
}

namespace {

// Finds the next <tag ...>inner</tag> at or after `from`; returns inner text
// span (still with nested markup) or npos pair.
std::pair<std::size_t, std::size_t> find_element(const std::string& body, const std::string& tag,
                                                 std::size_t from) {
    const std::string open = "<" + tag;
    const std::string close = "</" + tag + ">";
    std::size_t pos = from;
    while (true) {
        pos = body.find(open, pos);
        if (pos == std::string::npos) return {std::string::npos, std::string::npos};
        std::size_t after = pos + open.size();
        if (after < body.size() && body[after] != '>' && body[after] != ' ' && body[after] != '/' &&
            body[after] != '\t' && body[after] != '\n') {
            pos = after; // matched a longer tag name; keep looking
            continue;
        }
        std::size_t gt = body.find('>', pos);
        if (gt == std::string::npos) return {std::string::npos, std::string::npos};
        if (body[gt - 1] == '/') return {gt + 1, gt + 1}; // self-closing: empty content
        std::size_t end = body.find(close, gt + 1);
        if (end == std::string::npos) return {std::string::npos, std::string::npos};
        return {gt + 1, end};
    }
}

std::string strip_tags(const std::string& text) {
    std::string out;
    bool in_tag = false;
    for (char c : text) {
        if (c == '<') in_tag = true;
        else if (c == '>') in_tag = false;
        else if (!in_tag) out += c;
    }
    return out;
}

} // namespace

std::vector<std::string> xml_blocks(const std::string& body, const std::string& tag) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto [begin, end] = find_element(body, tag, pos);
        if (begin == std::string::npos) break;
        out.push_back(body.substr(begin, end - begin));
        pos = end + tag.size() + 3;
    }
    return out;
}

std::optional<std::string> xml_first_text(const std::string& body, const std::string& tag) {
    auto [begin, end] = find_element(body, tag, 0);
    if (begin == std::string::npos) return std::nullopt;
    return xml_decode_entities(strip_tags(body.substr(begin, end - begin)));
}

std::vector<std::string> xml_all_text(const std::string& body, const std::string& tag) {
    std::vector<std::string> out;
    for (const auto& block : xml_blocks(body, tag))
        out.push_back(xml_decode_entities(strip_tags(block)));
    return out;
}

Document parse_pubmed_article(const std::string& article_xml) {
    Document doc;
    auto pmid = xml_first_text(article_xml, "PMID");
    if (!pmid || pmid->empty()) throw std::runtime_error("article without PMID");
    doc.doc_id = *pmid;

    if (auto title = xml_first_text(article_xml, "ArticleTitle")) doc.title = trim(*title);

    // AbstractText may repeat (structured abstracts); concatenate in order
    auto parts = xml_all_text(article_xml, "AbstractText");
    std::string abstract;
    for (const auto& p : parts) {
        if (!abstract.empty()) abstract += ' ';
        abstract += trim(p);
    }
    doc.abstract_text = abstract;
    doc.missing_abstract = abstract.empty();

    auto journal_block = xml_blocks(article_xml, "Journal");
    if (!journal_block.empty()) {
        if (auto jt = xml_first_text(journal_block.front(), "Title")) doc.journal = trim(*jt);
    }

    // Year element when present; otherwise the first 4-digit token of MedlineDate
    auto pubdate = xml_blocks(article_xml, "PubDate");
    if (!pubdate.empty()) {
        if (auto year = xml_first_text(pubdate.front(), "Year")) {
            doc.year = std::stoi(*year);
        } else if (auto medline = xml_first_text(pubdate.front(), "MedlineDate")) {
            const std::string& m = *medline;
            for (std::size_t i = 0; i + 4 <= m.size(); ++i) {
                if (std::isdigit(static_cast<unsigned char>(m[i])) &&
                    std::isdigit(static_cast<unsigned char>(m[i + 1])) &&
                    std::isdigit(static_cast<unsigned char>(m[i + 2])) &&
                    std::isdigit(static_cast<unsigned char>(m[i + 3]))) {
                    doc.year = std::stoi(m.substr(i, 4));
                    break;
                }
            }
        }
    }
    return doc;
}

} // namespace termgraph
