#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bases/json.hpp"

namespace bases {

// One ranked web page on a result page.
struct SearchResult {
  int rank = 0;  // 1..10
  std::string url;
  std::string title;
  std::string snippet;

  bool operator==(const SearchResult&) const = default;
};

Json to_json(const SearchResult& result);
SearchResult search_result_from_json(const Json& j);

inline constexpr std::size_t kMaxResults = 10;

// Text completion capability. Implementations must be safe to call from
// several sessions at once.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(std::string_view prompt) = 0;
};

class SearchClient {
 public:
  virtual ~SearchClient() = default;
  // At most ten results. An empty list means "no hits".
  virtual std::vector<SearchResult> search(std::string_view query) = 0;
};

// Checks the precondition (non-empty prompt) and forwards to the client.
std::string llm_complete(LlmClient& client, std::string_view prompt);

// Checks the precondition (non-empty query), then enforces the result
// page invariants: at most ten entries, ranks renumbered 1..k in the
// order returned, entries without URL or title dropped.
std::vector<SearchResult> web_search(SearchClient& client,
                                     std::string_view query);

// ---------------------------------------------------------------------------
// Time, rate limiting, retries

class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  using duration = std::chrono::steady_clock::duration;

  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_for(duration d) = 0;
};

class SystemClock : public Clock {
 public:
  time_point now() override;
  void sleep_for(duration d) override;
  static SystemClock& instance();
};

// Deterministic clock for tests: sleeping advances time instantly.
class VirtualClock : public Clock {
 public:
  time_point now() override;
  void sleep_for(duration d) override;
  void advance(duration d) { sleep_for(d); }
  duration total_slept();

 private:
  std::mutex mu_;
  time_point now_{};
  duration slept_{};
};

// Sliding-window limiter: at most `per_second` acquisitions in any
// one-second window. A limit of 0 disables limiting.
class RateLimiter {
 public:
  RateLimiter(int per_second, Clock& clock);

  void acquire();
  // Timestamps of every successful acquire(), for tests.
  std::vector<Clock::time_point> history();

 private:
  int per_second_;
  Clock& clock_;
  std::mutex mu_;
  std::deque<Clock::time_point> window_;
  std::vector<Clock::time_point> history_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{8000};

  // Delay before retry number `retry` (1-based).
  std::chrono::milliseconds delay_before(int retry) const;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{60000};
};

struct HttpResponse {
  int status = 0;  // 0 on transport failure
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

// cpp-httplib backed transport; honours the request timeout for
// connect, read and write.
std::shared_ptr<HttpTransport> make_http_transport();

// POSTs with exponential backoff. Transport failures, 408, 429 and 5xx
// are retried; other statuses fail immediately. Throws BackendError with
// the last status and the number of attempts made.
HttpResponse post_with_retry(HttpTransport& transport,
                             const HttpRequest& request,
                             const RetryPolicy& policy, Clock& clock,
                             RateLimiter* limiter = nullptr);

// ---------------------------------------------------------------------------
// Live clients

struct BackendConfig {
  std::string endpoint;
  std::string model;
  // Name of the environment variable holding the credential.
  std::string credential_env;
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
  double temperature = 0.7;
  int requests_per_second = 0;
  bool offline = false;
};

BackendConfig default_llm_config();     // BASES_LLM_API_KEY, temperature 0.7
BackendConfig default_judge_config();   // BASES_LLM_API_KEY, temperature 0
BackendConfig default_search_config();  // BASES_SEARCH_API_KEY

// OpenAI-compatible chat completions: POST <endpoint>/chat/completions.
class OpenAiLlmClient : public LlmClient {
 public:
  // Throws ConfigError when offline, when the endpoint is empty, or when
  // the credential variable is unset (the message names the variable).
  explicit OpenAiLlmClient(BackendConfig config,
                           std::shared_ptr<HttpTransport> transport = nullptr,
                           Clock* clock = nullptr);

  std::string complete(std::string_view prompt) override;

  static Json build_request(const std::string& model, std::string_view prompt,
                            double temperature);
  // Extracts choices[0].message.content; throws BackendError otherwise.
  static std::string parse_response(const std::string& body);

 private:
  BackendConfig config_;
  std::string credential_;
  std::shared_ptr<HttpTransport> transport_;
  Clock* clock_;
  RateLimiter limiter_;
};

// Minimal JSON search contract: POST {"query": q} to the endpoint, reply
// {"results": [{"url", "title", "snippet"}, ...]}. The credential, when
// the variable is set, is sent as a bearer token.
class HttpSearchClient : public SearchClient {
 public:
  explicit HttpSearchClient(BackendConfig config,
                            std::shared_ptr<HttpTransport> transport = nullptr,
                            Clock* clock = nullptr);

  std::vector<SearchResult> search(std::string_view query) override;

  static std::vector<SearchResult> parse_response(const std::string& body);

 private:
  BackendConfig config_;
  std::string credential_;
  std::shared_ptr<HttpTransport> transport_;
  Clock* clock_;
  RateLimiter limiter_;
};

// ---------------------------------------------------------------------------
// Offline mocks

// Returns scripted responses in order, ignoring the prompt. When the
// script runs out it either starts over (cycle) or throws BackendError.
class ScriptedLlm : public LlmClient {
 public:
  explicit ScriptedLlm(std::vector<std::string> responses, bool cycle = false);

  std::string complete(std::string_view prompt) override;

  std::size_t calls();
  std::vector<std::string> prompts();

 private:
  std::mutex mu_;
  std::vector<std::string> responses_;
  bool cycle_;
  std::size_t next_ = 0;
  std::vector<std::string> prompts_;
};

// Rules of the form {match, response}: the first rule whose `match` is a
// substring of the prompt answers. `match` may also be a list of
// substrings that must all occur. A pure function of the prompt, so it
// stays deterministic under concurrent sessions.
class PatternLlm : public LlmClient {
 public:
  struct Rule {
    std::vector<std::string> match;  // all must occur in the prompt
    std::string response;
  };

  explicit PatternLlm(std::vector<Rule> rules,
                      std::chrono::milliseconds latency = {});
  // JSONL, one {"match": ..., "response": ...} object per line.
  static PatternLlm from_jsonl(const std::filesystem::path& path,
                               std::chrono::milliseconds latency = {});

  std::string complete(std::string_view prompt) override;

  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;
  std::chrono::milliseconds latency_;
};

// Adapter for tests and tools that compute responses in code.
class CallbackLlm : public LlmClient {
 public:
  using Fn = std::function<std::string(std::string_view)>;
  explicit CallbackLlm(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(std::string_view prompt) override { return fn_(prompt); }

 private:
  Fn fn_;
};

struct CorpusDocument {
  std::string url;
  std::string title;
  std::string snippet;
};

// Deterministic offline search engine over a JSONL corpus of
// {url, title, snippet}, ranked by BM25 over title + snippet. Documents
// with a zero score are not returned.
class CorpusSearchClient : public SearchClient {
 public:
  explicit CorpusSearchClient(std::vector<CorpusDocument> docs);

  std::vector<SearchResult> search(std::string_view query) override;
  const std::vector<CorpusDocument>& documents() const { return docs_; }

 private:
  struct Index;
  std::vector<CorpusDocument> docs_;
  std::shared_ptr<const Index> index_;
};

std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path);
std::unique_ptr<SearchClient> mock_search_from_corpus(
    const std::filesystem::path& corpus_path);

}  // namespace bases
