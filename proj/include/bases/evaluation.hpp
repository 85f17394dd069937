#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bases/bm25.hpp"
#include "bases/dataset.hpp"

namespace bases {

enum class Task { kSessionSearch, kClickPrediction };

std::string_view task_name(Task task);
Task parse_task(std::string_view name);

struct Candidate {
  std::string doc_id;  // result URL
  std::string text;    // title + " " + snippet

  bool operator==(const Candidate&) const = default;
};

struct HistoryItem {
  std::string query;
  std::string clicked_text;

  bool operator==(const HistoryItem&) const = default;
};

struct RankingInstance {
  Task task = Task::kClickPrediction;
  std::string user_id;
  int round_index = 1;
  std::vector<HistoryItem> history;  // empty for click prediction
  std::string query;
  std::vector<Candidate> candidates;
  std::size_t positive_index = 0;

  bool operator==(const RankingInstance&) const = default;
};

// Click prediction: one instance per round. Session search: one per round
// with index >= 2, carrying the earlier rounds as history. Instances are
// ordered by user_id, then round_index.
std::vector<RankingInstance> build_instances(
    const std::vector<UserSession>& sessions, Task task);

// BM25 with the instance's candidates as the collection. For session
// search the history queries are prepended to the current query.
std::vector<double> bm25_score(const RankingInstance& instance,
                               const Bm25Params& params = {});

class Ranker {
 public:
  virtual ~Ranker() = default;
  // One finite score per candidate; higher ranks first.
  virtual std::vector<double> score(const RankingInstance& instance) = 0;
};

class Bm25Ranker : public Ranker {
 public:
  explicit Bm25Ranker(Bm25Params params = {}) : params_(params) {}
  std::vector<double> score(const RankingInstance& instance) override {
    return bm25_score(instance, params_);
  }

 private:
  Bm25Params params_;
};

// Uniform random scores. Seeded per instance from (seed, user_id,
// round_index), so the result does not depend on evaluation order.
class RandomRanker : public Ranker {
 public:
  explicit RandomRanker(std::uint64_t seed) : seed_(seed) {}
  std::vector<double> score(const RankingInstance& instance) override;

 private:
  std::uint64_t seed_;
};

struct MetricsReport {
  Task task = Task::kClickPrediction;
  std::size_t n_instances = 0;
  double mrr = 0.0;
  double ndcg_at_1 = 0.0;
  double ndcg_at_3 = 0.0;
};

// 1-based rank of the positive candidate under descending score, ties
// going to the earlier candidate.
std::size_t positive_rank(std::span<const double> scores,
                          std::size_t positive_index);
// Binary single-positive NDCG@k.
double ndcg_at(std::size_t rank, std::size_t k);

// Throws PreconditionError for no instances and ContractError when the
// ranker breaks its contract or the instances mix tasks.
MetricsReport evaluate(Ranker& ranker,
                       const std::vector<RankingInstance>& instances);
// Same, with precomputed scores aligned to `instances`.
MetricsReport evaluate_scores(const std::vector<RankingInstance>& instances,
                              const std::vector<std::vector<double>>& scores);

Json to_json(const MetricsReport& report);
// Aligned table; metric columns are x100 with two decimals.
std::string format_metrics_table(const std::vector<MetricsReport>& reports);

enum class OverlapNormalization {
  kJaccard,    // |A ∩ B| / |A ∪ B|
  kReference,  // |A ∩ B| / |A|, A being the first (reference) query
};

// Term overlap between two queries after stopword removal. Both term sets
// empty gives 0. Throws PreconditionError for an empty query.
double term_overlap_rate(std::string_view query_a, std::string_view query_b,
                         const StopwordSet& stopwords,
                         OverlapNormalization norm = OverlapNormalization::kJaccard);
// Uses the built-in stopword list of `lang`.
double term_overlap_rate(std::string_view query_a, std::string_view query_b,
                         Language lang,
                         OverlapNormalization norm = OverlapNormalization::kJaccard);

// Fraction of (agent_rank, human_rank) pairs that agree.
double click_top1_accuracy(std::span<const std::pair<int, int>> pairs);

struct JudgeOptions {
  int parse_retries = 3;
};

std::string render_judge_prompt(const UserProfile* profile,
                                std::string_view human_query,
                                std::string_view agent_query, Language lang);
// Leading YES / NO token, case-insensitive. Throws ParseError otherwise.
bool parse_judge_verdict(std::string_view raw);

// Asks the LLM whether the agent query matches the human query's intent
// and fits the profile (which may be null). Throws EvaluationError when no
// verdict can be parsed within the retry budget.
bool llm_judge_query_consistency(LlmClient& llm, const UserProfile* profile,
                                 std::string_view human_query,
                                 std::string_view agent_query, Language lang,
                                 const JudgeOptions& options = {});

}  // namespace bases
