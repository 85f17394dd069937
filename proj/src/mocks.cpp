#include <algorithm>
#include <fstream>
#include <thread>

#include "bases/backends.hpp"
#include "bases/bm25.hpp"
#include "bases/errors.hpp"
#include "bases/text.hpp"

namespace bases {

ScriptedLlm::ScriptedLlm(std::vector<std::string> responses, bool cycle)
    : responses_(std::move(responses)), cycle_(cycle) {}

std::string ScriptedLlm::complete(std::string_view prompt) {
  std::lock_guard lock(mu_);
  prompts_.emplace_back(prompt);
  if (next_ >= responses_.size()) {
    if (!cycle_ || responses_.empty()) {
      throw BackendError("mock LLM script exhausted after " +
                         std::to_string(responses_.size()) + " responses");
    }
    next_ = 0;
  }
  return responses_[next_++];
}

std::size_t ScriptedLlm::calls() {
  std::lock_guard lock(mu_);
  return prompts_.size();
}

std::vector<std::string> ScriptedLlm::prompts() {
  std::lock_guard lock(mu_);
  return prompts_;
}

PatternLlm::PatternLlm(std::vector<Rule> rules,
                       std::chrono::milliseconds latency)
    : rules_(std::move(rules)), latency_(latency) {}

PatternLlm PatternLlm::from_jsonl(const std::filesystem::path& path,
                                  std::chrono::milliseconds latency) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open LLM script");
  std::vector<Rule> rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const Json j = Json::parse(line);
      Rule rule;
      const Json& match = j.at("match");
      if (match.is_array()) {
        rule.match = match.get<std::vector<std::string>>();
      } else {
        rule.match.push_back(match.get<std::string>());
      }
      rule.response = j.at("response").get<std::string>();
      rules.push_back(std::move(rule));
    } catch (const Json::exception& e) {
      throw LoadError(path.string(), line_no,
                      std::string("expected {\"match\", \"response\"}: ") +
                          e.what());
    }
  }
  if (rules.empty()) throw LoadError(path.string(), 0, "LLM script is empty");
  return PatternLlm(std::move(rules), latency);
}

std::string PatternLlm::complete(std::string_view prompt) {
  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
  for (const auto& rule : rules_) {
    const bool hit = std::all_of(
        rule.match.begin(), rule.match.end(), [&](const std::string& m) {
          return prompt.find(m) != std::string_view::npos;
        });
    if (hit) return rule.response;
  }
  throw BackendError("mock LLM: no scripted response matches the prompt");
}

// ---------------------------------------------------------------------------

struct CorpusSearchClient::Index {
  explicit Index(const std::vector<std::vector<std::string>>& docs)
      : bm25(docs) {}
  Bm25Index bm25;
};

namespace {

std::vector<std::vector<std::string>> tokenize_corpus(
    const std::vector<CorpusDocument>& docs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(tokenize(d.title + " " + d.snippet));
  return out;
}

}  // namespace

CorpusSearchClient::CorpusSearchClient(std::vector<CorpusDocument> docs)
    : docs_(std::move(docs)),
      index_(std::make_shared<Index>(tokenize_corpus(docs_))) {}

std::vector<SearchResult> CorpusSearchClient::search(std::string_view query) {
  const auto terms = tokenize(query);
  const auto scores = index_->bm25.score(terms);
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > 0.0) hits.push_back(i);
  }
  std::stable_sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  if (hits.size() > kMaxResults) hits.resize(kMaxResults);
  std::vector<SearchResult> page;
  for (std::size_t i : hits) {
    const auto& d = docs_[i];
    page.push_back({static_cast<int>(page.size()) + 1, d.url, d.title,
                    d.snippet});
  }
  return page;
}

std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open corpus");
  std::vector<CorpusDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    CorpusDocument doc;
    try {
      const Json j = Json::parse(line);
      doc.url = j.at("url").get<std::string>();
      doc.title = j.at("title").get<std::string>();
      doc.snippet = j.value("snippet", "");
    } catch (const Json::exception& e) {
      throw LoadError(path.string(), line_no, e.what());
    }
    if (doc.url.empty() || doc.title.empty()) {
      throw LoadError(path.string(), line_no, "url and title must be non-empty");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::unique_ptr<SearchClient> mock_search_from_corpus(
    const std::filesystem::path& corpus_path) {
  return std::make_unique<CorpusSearchClient>(load_corpus(corpus_path));
}

}  // namespace bases
