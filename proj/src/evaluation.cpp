#include "bases/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "bases/errors.hpp"
#include "bases/simulation.hpp"

namespace bases {

std::string_view task_name(Task task) {
  return task == Task::kSessionSearch ? "session_search" : "click_prediction";
}

Task parse_task(std::string_view name) {
  if (name == "session_search") return Task::kSessionSearch;
  if (name == "click_prediction") return Task::kClickPrediction;
  throw ConfigError("unknown task '" + std::string(name) +
                    "' (expected session_search or click_prediction)");
}

namespace {

std::string document_text(const SearchResult& r) {
  return r.title + " " + r.snippet;
}

std::string instance_label(const RankingInstance& inst) {
  return std::string(task_name(inst.task)) + " instance for user " +
         inst.user_id + " round " + std::to_string(inst.round_index);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<RankingInstance> build_instances(
    const std::vector<UserSession>& sessions, Task task) {
  std::vector<const UserSession*> ordered;
  for (const auto& s : sessions) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const UserSession* a, const UserSession* b) {
                     return a->user_id < b->user_id;
                   });

  std::vector<RankingInstance> out;
  for (const UserSession* s : ordered) {
    for (std::size_t k = 0; k < s->rounds.size(); ++k) {
      if (task == Task::kSessionSearch && k == 0) continue;
      const SessionRound& round = s->rounds[k];
      RankingInstance inst;
      inst.task = task;
      inst.user_id = s->user_id;
      inst.round_index = round.round_index;
      inst.query = round.query;
      if (task == Task::kSessionSearch) {
        for (std::size_t h = 0; h < k; ++h) {
          const SessionRound& prev = s->rounds[h];
          inst.history.push_back(
              {prev.query, document_text(prev.results.at(
                               static_cast<std::size_t>(prev.clicked_rank) - 1))});
        }
      }
      for (const auto& r : round.results) {
        inst.candidates.push_back({r.url, document_text(r)});
      }
      inst.positive_index = static_cast<std::size_t>(round.clicked_rank) - 1;
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::vector<double> bm25_score(const RankingInstance& instance,
                               const Bm25Params& params) {
  if (instance.candidates.empty()) {
    throw PreconditionError("bm25_score needs at least one candidate");
  }
  std::string query_text;
  for (const auto& h : instance.history) {
    query_text += h.query;
    query_text += ' ';
  }
  query_text += instance.query;

  std::vector<std::vector<std::string>> docs;
  docs.reserve(instance.candidates.size());
  for (const auto& c : instance.candidates) docs.push_back(tokenize(c.text));
  const Bm25Index index(docs, params);
  return index.score(tokenize(query_text));
}

std::vector<double> RandomRanker::score(const RankingInstance& instance) {
  const std::uint64_t key =
      fnv1a(instance.user_id) ^
      (static_cast<std::uint64_t>(instance.round_index) << 1) ^
      (instance.task == Task::kSessionSearch ? 1u : 0u);
  Rng rng(derive_seed(seed_, key));
  std::vector<double> scores(instance.candidates.size());
  for (auto& s : scores) s = rng.uniform_real();
  return scores;
}

std::size_t positive_rank(std::span<const double> scores,
                          std::size_t positive_index) {
  const double p = scores[positive_index];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > p || (scores[j] == p && j < positive_index)) ++rank;
  }
  return rank;
}

double ndcg_at(std::size_t rank, std::size_t k) {
  if (rank == 0 || rank > k) return 0.0;
  // Ideal DCG is 1: the single relevant document at rank 1.
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

MetricsReport evaluate_scores(const std::vector<RankingInstance>& instances,
                              const std::vector<std::vector<double>>& scores) {
  if (instances.empty()) {
    throw PreconditionError("evaluation needs at least one instance");
  }
  if (scores.size() != instances.size()) {
    throw ContractError("expected scores for " +
                        std::to_string(instances.size()) + " instances, got " +
                        std::to_string(scores.size()));
  }
  MetricsReport report;
  report.task = instances.front().task;
  report.n_instances = instances.size();
  double rr = 0.0;
  double n1 = 0.0;
  double n3 = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const RankingInstance& inst = instances[i];
    const auto& s = scores[i];
    if (inst.task != report.task) {
      throw ContractError("instances mix tasks: " + instance_label(inst));
    }
    if (s.size() != inst.candidates.size()) {
      throw ContractError("ranker returned " + std::to_string(s.size()) +
                          " scores for " + instance_label(inst) + " with " +
                          std::to_string(inst.candidates.size()) +
                          " candidates");
    }
    if (inst.positive_index >= inst.candidates.size()) {
      throw ContractError("positive_index out of range in " +
                          instance_label(inst));
    }
    for (double v : s) {
      if (!std::isfinite(v)) {
        throw ContractError("ranker returned a non-finite score for " +
                            instance_label(inst));
      }
    }
    const std::size_t rank = positive_rank(s, inst.positive_index);
    rr += 1.0 / static_cast<double>(rank);
    n1 += ndcg_at(rank, 1);
    n3 += ndcg_at(rank, 3);
  }
  const double n = static_cast<double>(instances.size());
  report.mrr = rr / n;
  report.ndcg_at_1 = n1 / n;
  report.ndcg_at_3 = n3 / n;
  return report;
}

MetricsReport evaluate(Ranker& ranker,
                       const std::vector<RankingInstance>& instances) {
  std::vector<std::vector<double>> scores;
  scores.reserve(instances.size());
  for (const auto& inst : instances) scores.push_back(ranker.score(inst));
  return evaluate_scores(instances, scores);
}

Json to_json(const MetricsReport& r) {
  return Json{{"task", task_name(r.task)},
              {"n_instances", r.n_instances},
              {"mrr", r.mrr},
              {"ndcg_at_1", r.ndcg_at_1},
              {"ndcg_at_3", r.ndcg_at_3}};
}

std::string format_metrics_table(const std::vector<MetricsReport>& reports) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %8s %8s %8s %8s\n", "task", "n", "MRR",
                "NDCG@1", "NDCG@3");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-18s %8zu %8.2f %8.2f %8.2f\n",
                  std::string(task_name(r.task)).c_str(), r.n_instances,
                  100.0 * r.mrr, 100.0 * r.ndcg_at_1, 100.0 * r.ndcg_at_3);
    out += line;
  }
  return out;
}

double term_overlap_rate(std::string_view query_a, std::string_view query_b,
                         const StopwordSet& stopwords,
                         OverlapNormalization norm) {
  if (trim(query_a).empty() || trim(query_b).empty()) {
    throw PreconditionError("term_overlap_rate needs two non-empty queries");
  }
  const auto ta = content_terms(query_a, stopwords);
  const auto tb = content_terms(query_b, stopwords);
  const std::set<std::string> a(ta.begin(), ta.end());
  const std::set<std::string> b(tb.begin(), tb.end());
  std::size_t common = 0;
  for (const auto& t : a) common += b.count(t);
  const std::size_t denom = norm == OverlapNormalization::kJaccard
                                ? a.size() + b.size() - common
                                : a.size();
  if (denom == 0) return 0.0;
  return static_cast<double>(common) / static_cast<double>(denom);
}

double term_overlap_rate(std::string_view query_a, std::string_view query_b,
                         Language lang, OverlapNormalization norm) {
  return term_overlap_rate(query_a, query_b, default_stopwords(lang), norm);
}

double click_top1_accuracy(std::span<const std::pair<int, int>> pairs) {
  if (pairs.empty()) {
    throw PreconditionError("click_top1_accuracy needs at least one pair");
  }
  std::size_t hits = 0;
  for (const auto& [agent, human] : pairs) hits += agent == human ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

std::string render_judge_prompt(const UserProfile* profile,
                                std::string_view human_query,
                                std::string_view agent_query, Language lang) {
  if (lang == Language::kChinese) {
    return "你是一名搜索行为评估员。请判断模拟用户的查询是否与真实用户查询的"
           "搜索意图一致，并且符合该用户的档案。\n\n** 用户档案 **\n\n" +
           (profile ? render_profile(*profile, lang) : std::string("未提供")) +
           "\n\n** 真实用户查询 **\n\n" + std::string(human_query) +
           "\n\n** 模拟用户查询 **\n\n" + std::string(agent_query) +
           "\n\n只回答 YES 或 NO。";
  }
  return "You are assessing a simulated web search user. Decide whether the "
         "agent query expresses the same search intent as the human query "
         "and is consistent with the user profile.\n\n** User Profile **\n\n" +
         (profile ? render_profile(*profile, lang) : std::string("Not provided")) +
         "\n\n** Human query **\n\n" + std::string(human_query) +
         "\n\n** Agent query **\n\n" + std::string(agent_query) +
         "\n\nAnswer strictly YES or NO.";
}

bool parse_judge_verdict(std::string_view raw) {
  std::size_t i = 0;
  auto is_letter = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  };
  // Skip whitespace and markup such as quotes or asterisks.
  while (i < raw.size() && !is_letter(raw[i]) &&
         static_cast<unsigned char>(raw[i]) < 0x80 &&
         !(raw[i] >= '0' && raw[i] <= '9')) {
    ++i;
  }
  std::size_t end = i;
  while (end < raw.size() && is_letter(raw[end])) ++end;
  const std::string token = to_lower_ascii(raw.substr(i, end - i));
  if (token == "yes") return true;
  if (token == "no") return false;
  throw ParseError("judge reply does not start with YES or NO",
                   std::string(raw));
}

bool llm_judge_query_consistency(LlmClient& llm, const UserProfile* profile,
                                 std::string_view human_query,
                                 std::string_view agent_query, Language lang,
                                 const JudgeOptions& options) {
  if (trim(human_query).empty() || trim(agent_query).empty()) {
    throw PreconditionError("judge needs two non-empty queries");
  }
  const std::string prompt =
      render_judge_prompt(profile, human_query, agent_query, lang);
  std::string last;
  for (int attempt = 0; attempt < options.parse_retries; ++attempt) {
    last = llm_complete(llm, prompt);
    try {
      return parse_judge_verdict(last);
    } catch (const ParseError&) {
    }
  }
  throw EvaluationError("no YES/NO verdict after " +
                        std::to_string(options.parse_retries) +
                        " attempt(s); last reply: " + last.substr(0, 200));
}

}  // namespace bases
