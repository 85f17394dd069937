#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "bases/errors.hpp"
#include "bases/simulation.hpp"

namespace bases {

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::kFinishAction:
      return "finish_action";
    case Termination::kMaxRounds:
      return "max_rounds";
    case Termination::kFailure:
      return "failure";
  }
  return "failure";
}

Termination parse_termination(std::string_view name) {
  if (name == "finish_action") return Termination::kFinishAction;
  if (name == "max_rounds") return Termination::kMaxRounds;
  if (name == "failure") return Termination::kFailure;
  throw ContractError("unknown terminated_by value '" + std::string(name) + "'");
}

Json to_json(const SessionRound& r) {
  Json results = Json::array();
  for (const auto& res : r.results) results.push_back(to_json(res));
  return Json{{"round_index", r.round_index},
              {"query", r.query},
              {"results", std::move(results)},
              {"clicked_rank", r.clicked_rank},
              {"click_reason", r.click_reason}};
}

Json to_json(const UserSession& s) {
  Json rounds = Json::array();
  for (const auto& r : s.rounds) rounds.push_back(to_json(r));
  Json j{{"user_id", s.user_id},
         {"language", language_code(s.language)},
         {"rounds", std::move(rounds)},
         {"terminated_by", termination_name(s.terminated_by)}};
  if (s.failure_detail) j["failure_detail"] = *s.failure_detail;
  return j;
}

UserSession session_from_json(const Json& j) {
  UserSession s;
  s.user_id = j.at("user_id").get<std::string>();
  s.language = parse_language(j.at("language").get<std::string>());
  for (const auto& rj : j.at("rounds")) {
    SessionRound r;
    r.round_index = rj.at("round_index").get<int>();
    r.query = rj.at("query").get<std::string>();
    for (const auto& res : rj.at("results")) {
      r.results.push_back(search_result_from_json(res));
    }
    r.clicked_rank = rj.at("clicked_rank").get<int>();
    r.click_reason = rj.value("click_reason", "");
    s.rounds.push_back(std::move(r));
  }
  s.terminated_by = parse_termination(j.at("terminated_by").get<std::string>());
  if (const auto it = j.find("failure_detail");
      it != j.end() && !it->is_null()) {
    s.failure_detail = it->get<std::string>();
  }
  return s;
}

namespace {

struct SessionFailure {
  std::string detail;
};

std::string excerpt(std::string_view text) {
  constexpr std::size_t kMax = 200;
  if (text.size() <= kMax) return std::string(text);
  return std::string(text.substr(0, kMax)) + "...";
}

// Asks the LLM until `parse` accepts the reply, at most `attempts` times.
template <typename Parse>
AgentAction ask(LlmClient& llm, const std::string& prompt, int attempts,
                std::string_view parser, const Parse& parse) {
  std::string last_error;
  std::string last_raw;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      last_raw = llm_complete(llm, prompt);
    } catch (const std::exception& e) {
      throw SessionFailure{"LLM backend error during " + std::string(parser) +
                           ": " + e.what()};
    }
    try {
      return parse(last_raw);
    } catch (const ParseError& e) {
      last_error = e.what();
    }
  }
  throw SessionFailure{std::string(parser) + " parser failed after " +
                       std::to_string(attempts) + " attempt(s): " +
                       last_error + "; last output: " + excerpt(last_raw)};
}

}  // namespace

UserSession run_session(const UserProfile& profile, LlmClient& llm,
                        SearchClient& search, const SessionConfig& config) {
  if (config.max_rounds < 1) {
    throw PreconditionError("max_rounds must be at least 1");
  }
  if (config.parse_retries < 1) {
    throw PreconditionError("parse_retries must be at least 1");
  }
  const Language lang = profile.language;
  UserSession session;
  session.user_id = profile.user_id;
  session.language = lang;

  Scratchpad pad;
  int rounds_used = 0;  // includes rounds discarded for empty results
  try {
    session.terminated_by = Termination::kMaxRounds;
    while (rounds_used < config.max_rounds) {
      const AgentAction action =
          ask(llm, render_query_prompt(profile, pad, config.max_rounds, lang),
              config.parse_retries, "query action", parse_query_action);
      if (action.kind == AgentAction::Kind::kFinish) {
        session.terminated_by = Termination::kFinishAction;
        break;
      }
      ++rounds_used;

      std::vector<SearchResult> results;
      try {
        results = web_search(search, action.query);
      } catch (const std::exception& e) {
        throw SessionFailure{"search backend error for query '" +
                             action.query + "': " + e.what()};
      }
      if (results.empty()) continue;

      const int n = static_cast<int>(results.size());
      const AgentAction click = ask(
          llm, render_click_prompt(profile, pad, action.query, results, lang),
          config.parse_retries, "click action",
          [n](std::string_view raw) { return parse_click_action(raw, n); });

      pad.entries.push_back(
          {action.query, results[static_cast<std::size_t>(click.rank) - 1].title});
      SessionRound round;
      round.round_index = static_cast<int>(session.rounds.size()) + 1;
      round.query = action.query;
      round.results = std::move(results);
      round.clicked_rank = click.rank;
      round.click_reason = click.reason;
      session.rounds.push_back(std::move(round));
    }
  } catch (const SessionFailure& f) {
    session.terminated_by = Termination::kFailure;
    session.failure_detail = f.detail;
    return session;
  }

  if (session.rounds.empty()) {
    session.failure_detail =
        session.terminated_by == Termination::kFinishAction
            ? "agent finished before completing any round"
            : "no query returned search results within " +
                  std::to_string(config.max_rounds) + " round(s)";
    session.terminated_by = Termination::kFailure;
  }
  return session;
}

void run_bounded(std::size_t n, std::size_t limit,
                 const std::function<void(std::size_t)>& task) {
  if (limit == 0) throw PreconditionError("concurrency limit must be positive");
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        stop.store(true);
        return;
      }
    }
  };

  const std::size_t workers = std::min(limit, n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
}

BatchSummary run_batch(const std::vector<UserProfile>& profiles,
                       LlmClient& llm, SearchClient& search,
                       const BatchConfig& config, const SessionSink& sink) {
  if (profiles.empty()) throw PreconditionError("run_batch needs profiles");
  if (config.concurrency_limit < 1) {
    throw PreconditionError("concurrency_limit must be at least 1");
  }
  BatchSummary summary;
  summary.total = profiles.size();

  // Reorder buffer: finished sessions wait here until every earlier one
  // has been handed to the sink.
  std::vector<std::optional<UserSession>> pending(profiles.size());
  std::size_t next_out = 0;
  std::mutex mu;

  run_bounded(profiles.size(),
              static_cast<std::size_t>(config.concurrency_limit),
              [&](std::size_t i) {
                UserSession s = run_session(profiles[i], llm, search,
                                            config.session);
                std::lock_guard lock(mu);
                pending[i] = std::move(s);
                while (next_out < pending.size() && pending[next_out]) {
                  const UserSession& done = *pending[next_out];
                  switch (done.terminated_by) {
                    case Termination::kFinishAction:
                      ++summary.finished;
                      break;
                    case Termination::kMaxRounds:
                      ++summary.capped;
                      break;
                    case Termination::kFailure:
                      ++summary.failed;
                      break;
                  }
                  if (sink) sink(next_out, done);
                  pending[next_out].reset();
                  ++next_out;
                }
              });
  return summary;
}

std::vector<UserSession> run_batch(const std::vector<UserProfile>& profiles,
                                   LlmClient& llm, SearchClient& search,
                                   const BatchConfig& config,
                                   BatchSummary* summary) {
  std::vector<UserSession> out;
  out.reserve(profiles.size());
  const BatchSummary s = run_batch(
      profiles, llm, search, config,
      [&](std::size_t, const UserSession& session) { out.push_back(session); });
  if (summary) *summary = s;
  return out;
}

}  // namespace bases
