// The library builds cpp-httplib with TLS support; match it here so both
// translation units see the same class layouts.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

#include "bases/backends.hpp"
#include "bases/errors.hpp"
#include "bases/text.hpp"
#include "test_support.hpp"

using namespace bases;
using namespace std::chrono_literals;
using bases::testing::TempDir;
using bases::testing::write_file;

namespace {

// Replays a list of canned responses and records every request.
class FaultyTransport : public HttpTransport {
 public:
  explicit FaultyTransport(std::vector<HttpResponse> script)
      : script_(std::move(script)) {}

  HttpResponse post(const HttpRequest& request) override {
    requests.push_back(request);
    const std::size_t i = std::min(requests.size() - 1, script_.size() - 1);
    return script_[i];
  }

  std::vector<HttpRequest> requests;

 private:
  std::vector<HttpResponse> script_;
};

HttpResponse ok(const std::string& body) { return {200, body, ""}; }
HttpResponse status(int code) { return {code, "error body", ""}; }
HttpResponse dropped() { return {0, "", "Connection refused"}; }

std::string chat_reply(const std::string& content) {
  return Json{{"choices", Json::array({Json{{"message",
                                             {{"role", "assistant"},
                                              {"content", content}}}}})}}
      .dump();
}

BackendConfig test_llm_config(const std::string& endpoint = "http://llm.test/v1") {
  ::setenv("BASES_TEST_LLM_KEY", "sk-test", 1);
  BackendConfig c = default_llm_config();
  c.endpoint = endpoint;
  c.credential_env = "BASES_TEST_LLM_KEY";
  return c;
}

// Independent BM25 over whitespace-free lowercase terms, straight from the
// formula, for checking the corpus search ranking.
std::vector<double> oracle_bm25(const std::vector<std::vector<std::string>>& docs,
                                const std::vector<std::string>& query) {
  const double k1 = 1.2, b = 0.75;
  const double n = static_cast<double>(docs.size());
  double total = 0;
  for (const auto& d : docs) total += static_cast<double>(d.size());
  const double avgdl = total / n;
  std::set<std::string> terms(query.begin(), query.end());
  std::vector<double> out(docs.size(), 0.0);
  for (const auto& t : terms) {
    double df = 0;
    for (const auto& d : docs) df += std::count(d.begin(), d.end(), t) > 0;
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
      const double dl = static_cast<double>(docs[i].size());
      out[i] += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl));
    }
  }
  return out;
}

std::vector<CorpusDocument> rust_corpus() {
  std::vector<CorpusDocument> docs;
  const std::vector<std::string> titles = {
      "Rust programming language",      "Rust rust rust",
      "Removing rust from steel",       "The rust belt economy",
      "Learn Rust in a weekend",        "Python for beginners",
      "Rust and WebAssembly",           "Gardening tips",
      "Rust compiler internals",        "Why rust forms on iron",
      "Cooking pasta",                  "Rust async runtime comparison",
      "Rust embedded development",      "History of the bicycle",
      "Rusty nails and tetanus",        "Rust rust",
      "Car body rust repair",           "Weather today",
      "Rust game server hosting",       "Rust lang book review"};
  for (std::size_t i = 0; i < titles.size(); ++i) {
    docs.push_back({"https://example.org/" + std::to_string(i), titles[i],
                    i % 3 == 0 ? "" : "snippet number " + std::to_string(i)});
  }
  return docs;
}

class ListSearch : public SearchClient {
 public:
  explicit ListSearch(std::vector<SearchResult> r) : results_(std::move(r)) {}
  std::vector<SearchResult> search(std::string_view) override { return results_; }

 private:
  std::vector<SearchResult> results_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Capabilities and mocks

TEST(LlmComplete, ScriptedMockReturnsScript) {
  ScriptedLlm llm({"Search[weather]"});
  EXPECT_EQ(llm_complete(llm, "prompt"), "Search[weather]");
}

TEST(LlmComplete, EmptyPromptRejected) {
  ScriptedLlm llm({"x"});
  EXPECT_THROW(llm_complete(llm, ""), PreconditionError);
  EXPECT_EQ(llm.calls(), 0u);
}

TEST(ScriptedLlm, ExhaustionAndCycle) {
  ScriptedLlm once({"a"});
  EXPECT_EQ(once.complete("p"), "a");
  EXPECT_THROW(once.complete("p"), BackendError);
  ScriptedLlm looped({"a", "b"}, true);
  EXPECT_EQ(looped.complete("p"), "a");
  EXPECT_EQ(looped.complete("p"), "b");
  EXPECT_EQ(looped.complete("p"), "a");
}

TEST(PatternLlm, FirstRuleWithAllSubstringsWins) {
  PatternLlm llm({{{"click", "Title 2:"}, "2"}, {{"click"}, "1"}, {{"action"}, "Finish[finish]"}});
  EXPECT_EQ(llm.complete("your click\nTitle 1: a\nTitle 2: b"), "2");
  EXPECT_EQ(llm.complete("your click\nTitle 1: a"), "1");
  EXPECT_EQ(llm.complete("your action"), "Finish[finish]");
  EXPECT_THROW(llm.complete("nothing"), BackendError);
}

TEST(PatternLlm, JsonlScriptLoads) {
  TempDir tmp;
  write_file(tmp / "s.jsonl",
             "{\"match\": \"abc\", \"response\": \"1\"}\n\n"
             "{\"match\": [\"x\", \"y\"], \"response\": \"2\"}\n");
  const PatternLlm llm = PatternLlm::from_jsonl(tmp / "s.jsonl");
  ASSERT_EQ(llm.rules().size(), 2u);
  EXPECT_EQ(llm.rules()[1].match, (std::vector<std::string>{"x", "y"}));
}

TEST(PatternLlm, BadScriptLineNumbered) {
  TempDir tmp;
  write_file(tmp / "s.jsonl", "{\"match\": \"a\", \"response\": \"1\"}\n{\"match\": 3}\n");
  try {
    PatternLlm::from_jsonl(tmp / "s.jsonl");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  write_file(tmp / "empty.jsonl", "\n");
  EXPECT_THROW(PatternLlm::from_jsonl(tmp / "empty.jsonl"), LoadError);
}

TEST(WebSearch, EnforcesResultPageInvariants) {
  std::vector<SearchResult> raw;
  for (int i = 0; i < 12; ++i) {
    raw.push_back({99, "https://x/" + std::to_string(i), "t" + std::to_string(i), ""});
  }
  raw[2].title.clear();
  ListSearch client(raw);
  const auto page = web_search(client, "q");
  ASSERT_EQ(page.size(), 10u);
  for (std::size_t i = 0; i < page.size(); ++i) {
    EXPECT_EQ(page[i].rank, static_cast<int>(i) + 1);
    EXPECT_FALSE(page[i].title.empty());
  }
  EXPECT_EQ(page[2].url, "https://x/3");
  EXPECT_THROW(web_search(client, "   "), PreconditionError);
}

// ---------------------------------------------------------------------------
// Corpus-backed mock search

TEST(CorpusSearch, RustMatchesBruteForceOracle) {
  const auto docs = rust_corpus();
  CorpusSearchClient client(docs);
  const auto page = web_search(client, "rust");

  std::vector<std::vector<std::string>> tokens;
  for (const auto& d : docs) tokens.push_back(tokenize(d.title + " " + d.snippet));
  const auto scores = oracle_bm25(tokens, {"rust"});
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (scores[i] > 0) order.push_back(i);
  }
  // Explicit selection sort: highest score first, lower index on ties.
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (scores[order[j]] > scores[order[i]] ||
          (scores[order[j]] == scores[order[i]] && order[j] < order[i])) {
        std::swap(order[i], order[j]);
      }
    }
  }
  ASSERT_GE(order.size(), 10u);
  order.resize(10);

  ASSERT_EQ(page.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(page[i].rank, static_cast<int>(i) + 1);
    EXPECT_EQ(page[i].url, docs[order[i]].url) << "position " << i;
  }
}

TEST(CorpusSearch, ZeroHitsIsEmpty) {
  CorpusSearchClient client(rust_corpus());
  EXPECT_TRUE(web_search(client, "zeppelin").empty());
}

TEST(CorpusSearch, DeterministicAcrossCalls) {
  CorpusSearchClient client(rust_corpus());
  EXPECT_EQ(client.search("rust compiler"), client.search("rust compiler"));
}

TEST(CorpusSearch, SingleMatchRanksFirstWithManualScore) {
  std::vector<CorpusDocument> docs = {{"https://a", "alpha beta", ""},
                                      {"https://b", "gamma", ""},
                                      {"https://c", "delta epsilon zeta", ""}};
  CorpusSearchClient client(docs);
  const auto page = client.search("gamma");
  ASSERT_EQ(page.size(), 1u);
  EXPECT_EQ(page[0].url, "https://b");
  EXPECT_EQ(page[0].rank, 1);
}

TEST(CorpusSearch, FileCorpusAndErrors) {
  TempDir tmp;
  write_file(tmp / "c.jsonl",
             "{\"url\": \"u1\", \"title\": \"rust one\", \"snippet\": \"\"}\n"
             "{\"url\": \"u2\", \"title\": \"rust two\"}\n"
             "{\"url\": \"u3\", \"title\": \"rust three\", \"snippet\": \"x\"}\n");
  auto client = mock_search_from_corpus(tmp / "c.jsonl");
  EXPECT_LE(client->search("rust").size(), 3u);
  EXPECT_EQ(client->search("rust").size(), 3u);

  write_file(tmp / "bad.jsonl",
             "{\"url\": \"u1\", \"title\": \"t\"}\nnot json\n");
  try {
    load_corpus(tmp / "bad.jsonl");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  write_file(tmp / "notitle.jsonl", "{\"url\": \"u1\", \"title\": \"\"}\n");
  EXPECT_THROW(load_corpus(tmp / "notitle.jsonl"), LoadError);
}

// ---------------------------------------------------------------------------
// Retries, backoff and rate limiting

TEST(Retry, TwoFailuresThenSuccessTakesThreeAttempts) {
  FaultyTransport transport({status(503), dropped(), ok("fine")});
  VirtualClock clock;
  const HttpResponse r =
      post_with_retry(transport, {"http://x/y", {}, "{}"}, RetryPolicy{}, clock);
  EXPECT_EQ(r.body, "fine");
  EXPECT_EQ(transport.requests.size(), 3u);
  EXPECT_EQ(clock.total_slept(), 500ms + 1000ms);
}

TEST(Retry, ExhaustionCarriesStatusAndAttempts) {
  FaultyTransport transport({status(429)});
  VirtualClock clock;
  try {
    post_with_retry(transport, {"http://x/y", {}, "{}"}, RetryPolicy{}, clock);
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 429);
    EXPECT_EQ(e.attempts(), 4);
  }
  EXPECT_EQ(transport.requests.size(), 4u);
}

TEST(Retry, ClientErrorsAreNotRetried) {
  FaultyTransport transport({status(400), ok("never")});
  VirtualClock clock;
  try {
    post_with_retry(transport, {"http://x/y", {}, "{}"}, RetryPolicy{}, clock);
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 400);
    EXPECT_EQ(e.attempts(), 1);
  }
}

TEST(Retry, BackoffIsExponentialAndCapped) {
  RetryPolicy p;
  EXPECT_EQ(p.delay_before(1), 500ms);
  EXPECT_EQ(p.delay_before(2), 1000ms);
  EXPECT_EQ(p.delay_before(4), 4000ms);
  EXPECT_EQ(p.delay_before(10), 8000ms);
}

TEST(RateLimiter, NoOneSecondWindowExceedsLimit) {
  VirtualClock clock;
  for (int limit : {1, 3, 7}) {
    RateLimiter limiter(limit, clock);
    for (int i = 0; i < 40; ++i) {
      limiter.acquire();
      clock.advance(std::chrono::milliseconds((i * 37) % 150));
    }
    const auto history = limiter.history();
    ASSERT_EQ(history.size(), 40u);
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto in_window = std::count_if(
          history.begin(), history.end(), [&](Clock::time_point t) {
            return t >= history[i] && t < history[i] + 1s;
          });
      EXPECT_LE(in_window, limit) << "limit " << limit << " window at " << i;
    }
  }
}

TEST(RateLimiter, ConcurrentCallersRespectLimit) {
  VirtualClock clock;
  RateLimiter limiter(4, clock);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 10; ++i) limiter.acquire();
    });
  }
  threads.clear();
  const auto history = limiter.history();
  ASSERT_EQ(history.size(), 40u);
  for (const auto& start : history) {
    EXPECT_LE(std::count_if(history.begin(), history.end(),
                            [&](Clock::time_point t) {
                              return t >= start && t < start + 1s;
                            }),
              4);
  }
}

// ---------------------------------------------------------------------------
// Live clients over injected transports

TEST(OpenAiClient, RequestShapeAndReply) {
  auto transport = std::make_shared<FaultyTransport>(
      std::vector<HttpResponse>{ok(chat_reply("Search[weather]"))});
  OpenAiLlmClient client(test_llm_config("http://llm.test/v1/"), transport);
  EXPECT_EQ(client.complete("hello"), "Search[weather]");
  ASSERT_EQ(transport->requests.size(), 1u);
  const HttpRequest& req = transport->requests[0];
  EXPECT_EQ(req.url, "http://llm.test/v1/chat/completions");
  const Json body = Json::parse(req.body);
  EXPECT_EQ(body["model"], "gpt-3.5-turbo-1106");
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "hello");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.7);
  EXPECT_NE(std::find(req.headers.begin(), req.headers.end(),
                      std::pair<std::string, std::string>{"Authorization",
                                                          "Bearer sk-test"}),
            req.headers.end());
}

TEST(OpenAiClient, MalformedReplyIsBackendError) {
  EXPECT_THROW(OpenAiLlmClient::parse_response("{\"choices\": []}"), BackendError);
  EXPECT_THROW(OpenAiLlmClient::parse_response("<html>"), BackendError);
}

TEST(OpenAiClient, MissingCredentialNamesVariable) {
  BackendConfig c = test_llm_config();
  c.credential_env = "BASES_TEST_UNSET_VARIABLE";
  ::unsetenv("BASES_TEST_UNSET_VARIABLE");
  try {
    OpenAiLlmClient client(c, std::make_shared<FaultyTransport>(
                                  std::vector<HttpResponse>{ok("")}));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("BASES_TEST_UNSET_VARIABLE"),
              std::string::npos);
  }
}

TEST(OfflineMode, LiveClientsRefuseToStart) {
  BackendConfig c = test_llm_config();
  c.offline = true;
  EXPECT_THROW(OpenAiLlmClient{c}, ConfigError);
  BackendConfig s = default_search_config();
  s.endpoint = "http://search.test";
  s.offline = true;
  EXPECT_THROW(HttpSearchClient{s}, ConfigError);
}

TEST(HttpSearch, ParsesAndTruncates) {
  Json results = Json::array();
  for (int i = 0; i < 12; ++i) {
    results.push_back({{"url", "u" + std::to_string(i)},
                       {"title", "t" + std::to_string(i)},
                       {"snippet", ""}});
  }
  results[0]["url"] = "";
  const auto page = HttpSearchClient::parse_response(Json{{"results", results}}.dump());
  ASSERT_EQ(page.size(), 10u);
  EXPECT_EQ(page[0].url, "u1");
  EXPECT_EQ(page[9].rank, 10);
  EXPECT_THROW(HttpSearchClient::parse_response("{}"), BackendError);
}

// ---------------------------------------------------------------------------
// Real HTTP round trips against a local server

class LocalServer : public ::testing::Test {
 protected:
  void SetUp() override {
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::jthread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_ = {};
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

  httplib::Server server_;
  int port_ = 0;
  std::jthread thread_;
};

TEST_F(LocalServer, ChatCompletionWireFormat) {
  std::string seen_auth, seen_type, seen_body;
  std::atomic<int> hits{0};
  server_.Post("/v1/chat/completions",
               [&](const httplib::Request& req, httplib::Response& res) {
                 if (++hits < 3) {
                   res.status = 500;
                   return;
                 }
                 seen_auth = req.get_header_value("Authorization");
                 seen_type = req.get_header_value("Content-Type");
                 seen_body = req.body;
                 res.set_content(chat_reply("Finish[finish]"), "application/json");
               });
  VirtualClock clock;
  OpenAiLlmClient client(test_llm_config(base() + "/v1"), nullptr, &clock);
  EXPECT_EQ(client.complete("prompt text"), "Finish[finish]");
  EXPECT_EQ(hits.load(), 3);
  EXPECT_EQ(seen_auth, "Bearer sk-test");
  EXPECT_EQ(seen_type, "application/json");
  EXPECT_EQ(Json::parse(seen_body)["messages"][0]["content"], "prompt text");
}

TEST_F(LocalServer, SearchWireFormat) {
  std::string seen_body;
  server_.Post("/search", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    res.set_content(
        R"({"results": [{"url": "https://a", "title": "A", "snippet": "s"}]})",
        "application/json");
  });
  BackendConfig c = default_search_config();
  c.endpoint = base() + "/search";
  HttpSearchClient client(c);
  const auto page = web_search(client, "bollywood growth");
  ASSERT_EQ(page.size(), 1u);
  EXPECT_EQ(page[0].title, "A");
  EXPECT_EQ(Json::parse(seen_body), (Json{{"query", "bollywood growth"}}));
}

TEST_F(LocalServer, TimeoutIsHonoured) {
  server_.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(1500ms);
    res.set_content("{}", "application/json");
  });
  HttpRequest req{base() + "/slow", {}, "{}", 200ms};
  RetryPolicy no_retry;
  no_retry.max_retries = 0;
  const auto start = std::chrono::steady_clock::now();
  try {
    post_with_retry(*make_http_transport(), req, no_retry, SystemClock::instance());
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 0);
    EXPECT_EQ(e.attempts(), 1);
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, 1200ms);
}
