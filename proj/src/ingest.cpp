#include "riskner/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "riskner/errors.hpp"
#include "riskner/hashutil.hpp"
#include "riskner/persistence.hpp"

namespace riskner {

using nlohmann::json;

void QuerySpec::validate() const {
    if (keywords.empty()) raise(ErrorKind::InvalidQuery, "query needs at least one keyword");
    for (const std::string& k : keywords) {
        if (k.empty()) raise(ErrorKind::InvalidQuery, "empty keyword");
    }
    if (!from_date.empty() && !to_date.empty() && from_date > to_date) {
        raise(ErrorKind::InvalidQuery, "date window is inverted: " + from_date + " > " + to_date);
    }
    if (page_size < 1 || page_size > 100) {
        raise(ErrorKind::InvalidQuery, "page_size must lie in [1, 100]");
    }
    if (max_articles < 1) raise(ErrorKind::InvalidQuery, "max_articles must be positive");
}

QuerySpec QuerySpec::from_json(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::InvalidQuery, "query spec is not valid JSON");
    QuerySpec q;
    q.keywords = j.value("keywords", std::vector<std::string>{});
    q.from_date = j.value("from", "");
    q.to_date = j.value("to", "");
    q.page_size = j.value("page_size", std::size_t{50});
    q.max_articles = j.value("max_articles", std::size_t{200});
    return q;
}

FieldMapping FieldMapping::from_json(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::Config, "field mapping is not valid JSON");
    FieldMapping m;
    m.endpoint = j.value("endpoint", m.endpoint);
    m.articles_path = j.value("articles_path", m.articles_path);
    m.title_field = j.value("title_field", m.title_field);
    m.body_field = j.value("body_field", m.body_field);
    m.url_field = j.value("url_field", m.url_field);
    m.published_at_field = j.value("published_at_field", m.published_at_field);
    m.source_field = j.value("source_field", m.source_field);
    m.query_param = j.value("query_param", m.query_param);
    m.from_param = j.value("from_param", m.from_param);
    m.to_param = j.value("to_param", m.to_param);
    m.page_param = j.value("page_param", m.page_param);
    m.page_size_param = j.value("page_size_param", m.page_size_param);
    m.api_key_header = j.value("api_key_header", m.api_key_header);
    return m;
}

namespace {

class HttplibTransport : public HttpTransport {
  public:
    explicit HttplibTransport(std::string base_url) : base_url_(std::move(base_url)) {}

    HttpResponse get(const std::string& path_and_query,
                     const std::vector<std::pair<std::string, std::string>>& headers) override {
        httplib::Client client(base_url_);
        client.set_connection_timeout(10);
        client.set_read_timeout(30);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        const httplib::Result res = client.Get(path_and_query, h);
        if (!res) {
            raise(ErrorKind::MalformedResponse,
                  "request to " + base_url_ + path_and_query + " failed: " +
                      httplib::to_string(res.error()));
        }
        return HttpResponse{res->status, res->body};
    }

  private:
    std::string base_url_;
};

std::string url_encode(const std::string& value) {
    std::ostringstream os;
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            os << c;
        } else if (c == ' ') {
            os << "%20";
        } else {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            os << buf;
        }
    }
    return os.str();
}

const json* descend(const json& root, const std::string& dotted) {
    const json* node = &root;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos
                                                                              : dot - start);
        if (!node->is_object() || !node->contains(key)) return nullptr;
        node = &(*node)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return node;
}

std::string string_at(const json& root, const std::string& dotted) {
    const json* node = descend(root, dotted);
    if (node == nullptr || node->is_null()) return "";
    if (node->is_string()) return node->get<std::string>();
    return node->dump();
}

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url) {
    return std::make_unique<HttplibTransport>(base_url);
}

std::string clean_body(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool in_tag = false;
    for (char c : raw) {
        if (c == '<') {
            in_tag = true;
            out.push_back(' ');
            continue;
        }
        if (c == '>') {
            in_tag = false;
            continue;
        }
        if (!in_tag) out.push_back(c);
    }
    // collapse whitespace runs
    std::string collapsed;
    collapsed.reserve(out.size());
    bool in_ws = true;
    for (char c : out) {
        const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (ws) {
            if (!in_ws) collapsed.push_back(' ');
            in_ws = true;
        } else {
            collapsed.push_back(c);
            in_ws = false;
        }
    }
    while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
    return collapsed;
}

std::string canonical_url(const std::string& url) {
    std::string s = url;
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);

    const std::size_t frag = s.find('#');
    if (frag != std::string::npos) s.resize(frag);

    const std::size_t scheme_end = s.find("://");
    if (scheme_end != std::string::npos) {
        for (std::size_t i = 0; i < scheme_end; ++i) {
            s[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
        }
        std::size_t host_end = s.find('/', scheme_end + 3);
        if (host_end == std::string::npos) host_end = s.size();
        for (std::size_t i = scheme_end + 3; i < host_end; ++i) {
            s[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
        }
        std::string host = s.substr(scheme_end + 3, host_end - scheme_end - 3);
        const bool https = s.rfind("https://", 0) == 0;
        const std::string default_port = https ? ":443" : ":80";
        if (host.size() > default_port.size() &&
            host.compare(host.size() - default_port.size(), default_port.size(), default_port) ==
                0) {
            host.resize(host.size() - default_port.size());
            s = s.substr(0, scheme_end + 3) + host + s.substr(host_end);
        }
    }
    if (s.size() > 1 && s.back() == '/') s.pop_back();
    return s;
}

std::string article_id_for_url(const std::string& url) {
    return to_hex(fnv1a64(canonical_url(url)));
}

std::vector<Article> fetch_articles(const QuerySpec& query, const std::string& api_key,
                                    HttpTransport& transport, const FieldMapping& mapping,
                                    const SleepFn& sleep) {
    query.validate();
    const SleepFn do_sleep =
        sleep ? sleep : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

    std::string joined;
    for (std::size_t i = 0; i < query.keywords.size(); ++i) {
        if (i) joined += " OR ";
        joined += query.keywords[i];
    }

    std::vector<std::pair<std::string, std::string>> headers;
    if (!api_key.empty()) headers.emplace_back(mapping.api_key_header, api_key);

    std::vector<Article> articles;
    std::set<std::string> seen_ids;
    std::size_t page = 1;
    while (articles.size() < query.max_articles) {
        std::ostringstream path;
        path << mapping.endpoint << "?" << mapping.query_param << "=" << url_encode(joined);
        if (!query.from_date.empty()) {
            path << "&" << mapping.from_param << "=" << url_encode(query.from_date);
        }
        if (!query.to_date.empty()) {
            path << "&" << mapping.to_param << "=" << url_encode(query.to_date);
        }
        path << "&" << mapping.page_size_param << "=" << query.page_size << "&"
             << mapping.page_param << "=" << page;

        HttpResponse res;
        int attempt = 0;
        while (true) {
            res = transport.get(path.str(), headers);
            if (res.status == 429) {
                if (attempt >= kMaxRateLimitRetries) {
                    raise(ErrorKind::RateLimited, "still rate limited after " +
                                                      std::to_string(kMaxRateLimitRetries) +
                                                      " retries");
                }
                const auto delay = kBackoffBase * (1LL << attempt);
                std::cerr << "rate limited; retry " << (attempt + 1) << " in " << delay.count()
                          << " ms\n";
                do_sleep(delay);
                ++attempt;
                continue;
            }
            break;
        }
        if (res.status == 401 || res.status == 403) {
            raise(ErrorKind::AuthFailed, "API rejected credentials (HTTP " +
                                             std::to_string(res.status) + ")");
        }
        if (res.status != 200) {
            raise(ErrorKind::MalformedResponse, "unexpected HTTP " + std::to_string(res.status));
        }

        const json body = json::parse(res.body, nullptr, false);
        if (body.is_discarded()) raise(ErrorKind::MalformedResponse, "response is not JSON");
        const json* items = descend(body, mapping.articles_path);
        if (items == nullptr || !items->is_array()) {
            raise(ErrorKind::MalformedResponse,
                  "response lacks the \"" + mapping.articles_path + "\" article array");
        }

        for (const json& item : *items) {
            if (articles.size() >= query.max_articles) break;
            Article a;
            a.url = string_at(item, mapping.url_field);
            if (a.url.empty()) {
                std::cerr << "dropping article without a URL\n";
                continue;
            }
            a.id = article_id_for_url(a.url);
            a.title = string_at(item, mapping.title_field);
            a.body = clean_body(string_at(item, mapping.body_field));
            a.published_at = string_at(item, mapping.published_at_field);
            a.source = string_at(item, mapping.source_field);
            a.fetched_at = utc_timestamp_now();
            if (a.body.empty()) {
                std::cerr << "dropping article " << a.id << ": body empty after cleaning\n";
                continue;
            }
            if (seen_ids.insert(a.id).second) articles.push_back(std::move(a));
        }

        if (items->size() < query.page_size) break;  // window exhausted
        ++page;
    }
    return articles;
}

namespace {

json article_to_json(const Article& a) {
    return json{{"id", a.id},
                {"source", a.source},
                {"title", a.title},
                {"body", a.body},
                {"published_at", a.published_at},
                {"url", a.url},
                {"fetched_at", a.fetched_at}};
}

Article article_from_json(const json& j) {
    Article a;
    a.id = j.at("id").get<std::string>();
    a.source = j.value("source", "");
    a.title = j.value("title", "");
    a.body = j.value("body", "");
    a.published_at = j.value("published_at", "");
    a.url = j.value("url", "");
    a.fetched_at = j.value("fetched_at", "");
    return a;
}

}  // namespace

std::vector<Article> read_article_store(const std::string& store_path) {
    std::vector<Article> out;
    for (const std::string& line : read_jsonl_lines(store_path)) {
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            raise(ErrorKind::StoreCorrupt, "unparseable line in article store " + store_path);
        }
        out.push_back(article_from_json(j));
    }
    return out;
}

StoreResult dedupe_store(const std::vector<Article>& articles, const std::string& store_path) {
    std::set<std::string> known;
    for (const Article& a : read_article_store(store_path)) known.insert(a.id);

    StoreResult result;
    for (const Article& a : articles) {
        if (known.count(a.id)) {
            ++result.duplicates;
            continue;
        }
        append_jsonl_line(store_path, article_to_json(a).dump());
        known.insert(a.id);
        ++result.added;
    }
    return result;
}

namespace {

const std::set<std::string>& abbreviation_guards() {
    static const std::set<std::string> guards = {
        "Mr.",  "Mrs.", "Ms.",  "Dr.",   "Prof.", "Sr.",   "Jr.",  "St.",
        "No.",  "Inc.", "Ltd.", "Co.",   "Corp.", "Pty.",  "vs.",  "etc.",
        "approx.", "est.", "Jan.", "Feb.", "Mar.", "Apr.", "Jun.", "Jul.",
        "Aug.", "Sep.", "Sept.", "Oct.", "Nov.", "Dec.", "U.S.", "U.K.",
    };
    return guards;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

bool is_detachable_punct(unsigned char c) {
    return std::ispunct(c) != 0;
}

// Last whitespace-delimited chunk ending at position `end` (exclusive).
std::string trailing_chunk(const std::string& text, std::size_t end) {
    std::size_t start = end;
    while (start > 0 && !std::isspace(static_cast<unsigned char>(text[start - 1]))) --start;
    return text.substr(start, end - start);
}

std::vector<std::string> tokenize_chunk(const std::string& chunk) {
    if (abbreviation_guards().count(chunk)) return {chunk};
    std::size_t begin = 0;
    std::size_t end = chunk.size();
    std::vector<std::string> leading;
    while (begin < end && is_detachable_punct(static_cast<unsigned char>(chunk[begin]))) {
        leading.push_back(chunk.substr(begin, 1));
        ++begin;
    }
    std::vector<std::string> trailing;
    while (end > begin && is_detachable_punct(static_cast<unsigned char>(chunk[end - 1]))) {
        trailing.insert(trailing.begin(), chunk.substr(end - 1, 1));
        --end;
    }
    std::vector<std::string> tokens = std::move(leading);
    if (end > begin) tokens.push_back(chunk.substr(begin, end - begin));
    tokens.insert(tokens.end(), trailing.begin(), trailing.end());
    return tokens;
}

}  // namespace

std::vector<Sentence> to_pretokenized(const Article& article) {
    const std::string& text = article.body;

    // Split into sentence strings first.
    std::vector<std::string> raw_sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        // boundary requires whitespace then an uppercase letter
        std::size_t j = i + 1;
        if (j >= text.size() || !std::isspace(static_cast<unsigned char>(text[j]))) continue;
        while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j >= text.size() || !std::isupper(static_cast<unsigned char>(text[j]))) continue;
        if (c == '.' && abbreviation_guards().count(trailing_chunk(text, i + 1))) continue;
        raw_sentences.push_back(text.substr(start, i + 1 - start));
        start = j;
    }
    if (start < text.size()) raw_sentences.push_back(text.substr(start));

    std::vector<Sentence> sentences;
    for (const std::string& raw : raw_sentences) {
        Sentence sentence;
        sentence.source_id = article.id;
        std::istringstream chunks(raw);
        std::string chunk;
        bool has_word = false;
        while (chunks >> chunk) {
            for (std::string& token : tokenize_chunk(chunk)) {
                for (unsigned char c : token) {
                    if (is_word_char(c)) {
                        has_word = true;
                        break;
                    }
                }
                sentence.tokens.push_back(Token{std::move(token), 0});
            }
        }
        if (has_word && !sentence.tokens.empty()) sentences.push_back(std::move(sentence));
    }
    return sentences;
}

}  // namespace riskner
