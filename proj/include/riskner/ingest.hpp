#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "riskner/corpus.hpp"

namespace riskner {

struct Article {
    std::string id;  // hex hash of the canonical URL
    std::string source;
    std::string title;
    std::string body;
    std::string published_at;
    std::string url;
    std::string fetched_at;
};

struct QuerySpec {
    std::vector<std::string> keywords;
    std::string from_date;  // ISO date, inclusive
    std::string to_date;
    std::size_t page_size = 50;
    std::size_t max_articles = 200;

    void validate() const;
    static QuerySpec from_json(const std::string& text);
};

/// Maps a generic news API's response onto Article fields. Nothing about a
/// specific vendor is hardcoded; dotted paths descend into nested objects.
struct FieldMapping {
    std::string endpoint = "/v2/everything";
    std::string articles_path = "articles";
    std::string title_field = "title";
    std::string body_field = "content";
    std::string url_field = "url";
    std::string published_at_field = "publishedAt";
    std::string source_field = "source.name";
    std::string query_param = "q";
    std::string from_param = "from";
    std::string to_param = "to";
    std::string page_param = "page";
    std::string page_size_param = "pageSize";
    std::string api_key_header = "X-Api-Key";

    static FieldMapping from_json(const std::string& text);
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Single seam between fetch_articles and the network. The production
/// implementation wraps an HTTP client; tests substitute scripted doubles.
class HttpTransport {
  public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const std::string& path_and_query,
                             const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

/// Transport over a live base URL (e.g. "https://newsapi.example.com").
std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url);

using SleepFn = std::function<void(std::chrono::milliseconds)>;

inline constexpr int kMaxRateLimitRetries = 5;
inline constexpr std::chrono::milliseconds kBackoffBase{1000};

/// Paginates until max_articles or the window is exhausted. HTTP 429 backs
/// off exponentially (1s base, factor 2, up to 5 retries); 401/403 raise
/// AuthFailed. Bodies are stripped of markup; articles with empty cleaned
/// bodies are dropped with a logged reason.
std::vector<Article> fetch_articles(const QuerySpec& query, const std::string& api_key,
                                    HttpTransport& transport, const FieldMapping& mapping = {},
                                    const SleepFn& sleep = {});

struct StoreResult {
    std::size_t added = 0;
    std::size_t duplicates = 0;
};

/// Append-only JSON-lines article store keyed by Article.id; re-storing an id
/// counts as a duplicate and does not rewrite. Idempotent.
StoreResult dedupe_store(const std::vector<Article>& articles, const std::string& store_path);

std::vector<Article> read_article_store(const std::string& store_path);

/// Canonical URL for id hashing: scheme and host lowercased, fragment and
/// default port dropped, trailing slash trimmed.
std::string canonical_url(const std::string& url);
std::string article_id_for_url(const std::string& url);

/// Rule-based sentence split (boundary at . ! ? followed by whitespace and an
/// uppercase letter, with an abbreviation guard list) and whitespace
/// tokenization with punctuation detached. All labels start as "O".
std::vector<Sentence> to_pretokenized(const Article& article);

/// Strips markup tags and collapses whitespace runs.
std::string clean_body(const std::string& raw);

}  // namespace riskner
