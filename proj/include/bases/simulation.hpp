#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bases/backends.hpp"
#include "bases/json.hpp"
#include "bases/profiles.hpp"

namespace bases {

// One query -> results -> click interaction.
struct SessionRound {
  int round_index = 1;  // 1-based, consecutive within a session
  std::string query;
  std::vector<SearchResult> results;
  int clicked_rank = 1;
  std::string click_reason;

  bool operator==(const SessionRound&) const = default;
};

enum class Termination { kFinishAction, kMaxRounds, kFailure };

std::string_view termination_name(Termination t);
Termination parse_termination(std::string_view name);

struct UserSession {
  std::string user_id;
  Language language = Language::kEnglish;
  std::vector<SessionRound> rounds;
  Termination terminated_by = Termination::kFailure;
  std::optional<std::string> failure_detail;

  bool operator==(const UserSession&) const = default;
};

Json to_json(const SessionRound& round);
Json to_json(const UserSession& session);
// Throws Json exceptions or ContractError on malformed input.
UserSession session_from_json(const Json& j);

struct ScratchpadEntry {
  std::string query;
  std::string clicked_title;

  bool operator==(const ScratchpadEntry&) const = default;
};

// The browsing history shown to the agent.
struct Scratchpad {
  std::vector<ScratchpadEntry> entries;
};

struct AgentAction {
  enum class Kind { kSearch, kFinish, kClick };

  Kind kind = Kind::kFinish;
  std::string query;   // kSearch
  int rank = 0;        // kClick
  std::string reason;  // kClick: the full raw reply

  static AgentAction search(std::string query);
  static AgentAction finish();
  static AgentAction click(int rank, std::string reason);

  bool operator==(const AgentAction&) const = default;
};

// Labeled attribute lines ("Age: 34"), localized for Chinese.
std::string render_profile(const UserProfile& profile, Language lang);
// Numbered "(query → clicked title)" lines, or "None" / "无".
std::string render_scratchpad(const Scratchpad& scratchpad, Language lang);

std::string render_query_prompt(const UserProfile& profile,
                                const Scratchpad& scratchpad, int max_rounds,
                                Language lang);
std::string render_click_prompt(const UserProfile& profile,
                                const Scratchpad& scratchpad,
                                std::string_view query,
                                const std::vector<SearchResult>& results,
                                Language lang);

// Search[...] (non-empty content, trimmed) wins over Finish[...]. Both
// are matched case-insensitively. Throws ParseError otherwise.
AgentAction parse_query_action(std::string_view raw);

// The first "Title <n>" with n in [1, n_results]; failing that, the first
// standalone integer in range. The reason is the raw reply. Throws
// ParseError when nothing in range is found.
AgentAction parse_click_action(std::string_view raw, int n_results);

// Canonical text of an action: "Search[q]", "Finish[finish]" or "<rank>".
std::string format_action(const AgentAction& action);

struct SessionConfig {
  int max_rounds = 5;
  // LLM calls allowed per prompt before the session fails.
  int parse_retries = 3;
};

// Runs one agent through search -> click -> finish. Never throws for
// backend or parse problems; those end the session with kFailure and a
// detail message, keeping the rounds completed so far.
UserSession run_session(const UserProfile& profile, LlmClient& llm,
                        SearchClient& search, const SessionConfig& config = {});

// Runs task(i) for i in [0, n) on at most `limit` threads. Rethrows the
// first exception after all workers stop.
void run_bounded(std::size_t n, std::size_t limit,
                 const std::function<void(std::size_t)>& task);

struct BatchConfig {
  SessionConfig session;
  int concurrency_limit = 8;
};

struct BatchSummary {
  std::size_t total = 0;
  std::size_t finished = 0;
  std::size_t capped = 0;
  std::size_t failed = 0;
};

// Receives each session in input order as soon as it and all earlier
// sessions are done. Calls are serialized.
using SessionSink = std::function<void(std::size_t index, const UserSession&)>;

BatchSummary run_batch(const std::vector<UserProfile>& profiles,
                       LlmClient& llm, SearchClient& search,
                       const BatchConfig& config, const SessionSink& sink);
std::vector<UserSession> run_batch(const std::vector<UserProfile>& profiles,
                                   LlmClient& llm, SearchClient& search,
                                   const BatchConfig& config = {},
                                   BatchSummary* summary = nullptr);

}  // namespace bases
