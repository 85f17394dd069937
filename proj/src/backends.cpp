#include "bases/backends.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "bases/errors.hpp"
#include "bases/text.hpp"

namespace bases {

Json to_json(const SearchResult& r) {
  return Json{{"rank", r.rank},
              {"url", r.url},
              {"title", r.title},
              {"snippet", r.snippet}};
}

SearchResult search_result_from_json(const Json& j) {
  SearchResult r;
  r.rank = j.at("rank").get<int>();
  r.url = j.at("url").get<std::string>();
  r.title = j.at("title").get<std::string>();
  r.snippet = j.value("snippet", "");
  return r;
}

std::string llm_complete(LlmClient& client, std::string_view prompt) {
  if (prompt.empty()) throw PreconditionError("LLM prompt must not be empty");
  return client.complete(prompt);
}

std::vector<SearchResult> web_search(SearchClient& client,
                                     std::string_view query) {
  if (trim(query).empty()) {
    throw PreconditionError("search query must not be empty");
  }
  std::vector<SearchResult> page;
  for (auto& r : client.search(query)) {
    if (page.size() == kMaxResults) break;
    if (r.url.empty() || r.title.empty()) continue;
    r.rank = static_cast<int>(page.size()) + 1;
    page.push_back(std::move(r));
  }
  return page;
}

// ---------------------------------------------------------------------------

Clock::time_point SystemClock::now() { return std::chrono::steady_clock::now(); }

void SystemClock::sleep_for(duration d) { std::this_thread::sleep_for(d); }

SystemClock& SystemClock::instance() {
  static SystemClock clock;
  return clock;
}

Clock::time_point VirtualClock::now() {
  std::lock_guard lock(mu_);
  return now_;
}

void VirtualClock::sleep_for(duration d) {
  std::lock_guard lock(mu_);
  if (d > duration::zero()) {
    now_ += d;
    slept_ += d;
  }
}

Clock::duration VirtualClock::total_slept() {
  std::lock_guard lock(mu_);
  return slept_;
}

RateLimiter::RateLimiter(int per_second, Clock& clock)
    : per_second_(per_second), clock_(clock) {}

void RateLimiter::acquire() {
  if (per_second_ <= 0) return;
  constexpr auto kWindow = std::chrono::seconds(1);
  // The lock is held while waiting so queued callers are admitted in
  // order and the window bookkeeping never races.
  std::lock_guard lock(mu_);
  for (;;) {
    const auto now = clock_.now();
    while (!window_.empty() && now - window_.front() >= kWindow) {
      window_.pop_front();
    }
    if (window_.size() < static_cast<std::size_t>(per_second_)) {
      window_.push_back(now);
      history_.push_back(now);
      return;
    }
    clock_.sleep_for(window_.front() + kWindow - now);
  }
}

std::vector<Clock::time_point> RateLimiter::history() {
  std::lock_guard lock(mu_);
  return history_;
}

std::chrono::milliseconds RetryPolicy::delay_before(int retry) const {
  const double scaled = static_cast<double>(base_delay.count()) *
                        std::pow(multiplier, std::max(0, retry - 1));
  const double capped = std::min(scaled, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<long long>(capped));
}

HttpResponse post_with_retry(HttpTransport& transport,
                             const HttpRequest& request,
                             const RetryPolicy& policy, Clock& clock,
                             RateLimiter* limiter) {
  for (int attempts = 1;; ++attempts) {
    if (limiter) limiter->acquire();
    HttpResponse response = transport.post(request);
    if (response.status >= 200 && response.status < 300) return response;
    const bool retryable = response.status == 0 || response.status == 408 ||
                           response.status == 429 || response.status >= 500;
    if (!retryable || attempts > policy.max_retries) {
      std::string detail = response.error.empty()
                               ? response.body.substr(0, 200)
                               : response.error;
      throw BackendError("POST " + request.url + " failed (HTTP status " +
                             std::to_string(response.status) + ") after " +
                             std::to_string(attempts) + " attempt(s)" +
                             (detail.empty() ? "" : ": " + detail),
                         response.status, attempts);
    }
    clock.sleep_for(policy.delay_before(attempts));
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string read_credential(const BackendConfig& config, bool required) {
  if (config.credential_env.empty()) return {};
  const char* value = std::getenv(config.credential_env.c_str());
  if (value == nullptr || *value == '\0') {
    if (required) {
      throw ConfigError("environment variable " + config.credential_env +
                        " is not set (credential for " + config.endpoint +
                        ")");
    }
    return {};
  }
  return value;
}

void check_live(const BackendConfig& config, const char* what) {
  if (config.offline) {
    throw ConfigError(std::string(what) +
                      " is a live client and cannot be used in offline mode");
  }
  if (config.endpoint.empty()) {
    throw ConfigError(std::string(what) + " requires an endpoint URL");
  }
}

std::vector<std::pair<std::string, std::string>> auth_headers(
    const std::string& credential) {
  std::vector<std::pair<std::string, std::string>> headers;
  if (!credential.empty()) {
    headers.emplace_back("Authorization", "Bearer " + credential);
  }
  return headers;
}

}  // namespace

BackendConfig default_llm_config() {
  BackendConfig c;
  c.endpoint = "https://api.openai.com/v1";
  c.credential_env = "BASES_LLM_API_KEY";
  c.model = "gpt-3.5-turbo-1106";
  c.temperature = 0.7;
  return c;
}

BackendConfig default_judge_config() {
  BackendConfig c = default_llm_config();
  c.temperature = 0.0;
  return c;
}

BackendConfig default_search_config() {
  BackendConfig c;
  c.credential_env = "BASES_SEARCH_API_KEY";
  return c;
}

OpenAiLlmClient::OpenAiLlmClient(BackendConfig config,
                                 std::shared_ptr<HttpTransport> transport,
                                 Clock* clock)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : make_http_transport()),
      clock_(clock ? clock : &SystemClock::instance()),
      limiter_(config_.requests_per_second, *clock_) {
  check_live(config_, "OpenAI-compatible LLM client");
  credential_ = read_credential(config_, true);
}

Json OpenAiLlmClient::build_request(const std::string& model,
                                    std::string_view prompt,
                                    double temperature) {
  return Json{{"model", model},
              {"messages",
               Json::array({Json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", temperature}};
}

std::string OpenAiLlmClient::parse_response(const std::string& body) {
  try {
    const Json doc = Json::parse(body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw BackendError(std::string("malformed chat completion response: ") +
                           e.what(),
                       200);
  }
}

std::string OpenAiLlmClient::complete(std::string_view prompt) {
  HttpRequest request;
  std::string url = config_.endpoint;
  while (!url.empty() && url.back() == '/') url.pop_back();
  if (!url.ends_with("/chat/completions")) url += "/chat/completions";
  request.url = std::move(url);
  request.headers = auth_headers(credential_);
  request.body =
      build_request(config_.model, prompt, config_.temperature).dump();
  request.timeout = config_.timeout;
  const HttpResponse response =
      post_with_retry(*transport_, request, config_.retry, *clock_, &limiter_);
  return parse_response(response.body);
}

HttpSearchClient::HttpSearchClient(BackendConfig config,
                                   std::shared_ptr<HttpTransport> transport,
                                   Clock* clock)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : make_http_transport()),
      clock_(clock ? clock : &SystemClock::instance()),
      limiter_(config_.requests_per_second, *clock_) {
  check_live(config_, "HTTP search client");
  credential_ = read_credential(config_, false);
}

std::vector<SearchResult> HttpSearchClient::parse_response(
    const std::string& body) {
  std::vector<SearchResult> results;
  try {
    const Json doc = Json::parse(body);
    for (const auto& item : doc.at("results")) {
      SearchResult r;
      r.url = item.value("url", "");
      r.title = item.value("title", "");
      r.snippet = item.value("snippet", "");
      if (r.url.empty() || r.title.empty()) continue;
      r.rank = static_cast<int>(results.size()) + 1;
      results.push_back(std::move(r));
      if (results.size() == kMaxResults) break;
    }
  } catch (const Json::exception& e) {
    throw BackendError(std::string("malformed search response: ") + e.what(),
                       200);
  }
  return results;
}

std::vector<SearchResult> HttpSearchClient::search(std::string_view query) {
  HttpRequest request;
  request.url = config_.endpoint;
  request.headers = auth_headers(credential_);
  request.body = Json{{"query", query}}.dump();
  request.timeout = config_.timeout;
  const HttpResponse response =
      post_with_retry(*transport_, request, config_.retry, *clock_, &limiter_);
  return parse_response(response.body);
}

}  // namespace bases
