#include <array>
#include <map>

#include "bases/errors.hpp"
#include "bases/simulation.hpp"

namespace bases {
namespace {

constexpr std::string_view kQueryTemplateEn =
    R"(You are a search engine user with your own profile. Your task is to interact with search engines {max_exceeds_times} times. You have two types of operations to perform:

- Search[query]: When the current round has not reached {max_exceeds_times} times, please raise the next question based on your profile and web browsing history. Your query should be an entity phrase that has a similar topic to an attribute in your user profile. The query must be concise and clear. For example, Search[bollywood growth], Search[hjunk food trax], Search[pseudocyesis information], Search[location of port arthur].

- Finish[finish], When the current round exceeds {max_exceeds_times} times, you need to end your interaction with search engines. For example, Finish [Finish]

** Your Profile **
{profile}

** Web browsing (click) history **
{scratchpad}

** Your action **)";

constexpr std::string_view kClickTemplateEn =
    R"(You are a search engine user with your own profile. Your task is to click on the most relevant page.

In this interaction, you raised the question of **{query}**. You have received several webpage titles returned by the search engine.

Now, based on your profile, web browsing history, and the relevance between the query and the titles, please choose the most relevant webpage to click on. Please note that you can only output one number from 1 to 10 to represent the title you are about to click on, and cannot output any other content

** Your Profile **

{profile}

** Web browsing (click) history **

{scratchpad}

** Query **

{query}

** Titles **

{titles}

** Your click **)";

constexpr std::string_view kQueryTemplateZh =
    R"(您是一位带有自己档案的搜索引擎用户。您的任务是与搜索引擎互动{max_exceeds_times}次。您有两种操作可以执行：

- Search[查询]：在当前轮次未达到{max_exceeds_times}次时，请同时参考网页浏览历史和档案提出下一个查询。你需要考虑的是：1、在参考网页浏览历史时，查询的主题不能过多偏离历史中的交互内容，保持主题的连贯性；2、在参考档案时，查询的主题要和档案中的某属性相关，但要有发散思维，不要限制在这些具体属性上，尤其注意查询不要过多的涉及地名。

最后，您的查询应该是一个实体短语，保持简洁明了。这里有一些该操作的例子，如Search[优酷客户端下载], Search[无敌铁桥三], Search[蜡笔小新], Search[百度云网盘资源]。

- Finish[finish]：在当前轮次超过{max_exceeds_times}次时，您需要结束与搜索引擎的互动。例如，Finish[finish]。

** 您的档案 **

{profile}

** 网页浏览（点击）历史 **

{scratchpad}

** 您的操作 **)";

constexpr std::string_view kClickTemplateZh =
    R"(您是一位带有自己档案的搜索引擎用户。您的任务是点击最相关的页面。

在这次互动中，您提出了**{query}**的查询。您已经收到了搜索引擎返回的几个网页标题。

现在，请根据您的档案、网页浏览历史以及查询和标题之间的相关性，选择最相关的网页进行点击（语义相关或者是词语相似度高）。请注意，请首先输出你选择该title的理由，然后输出一个 **数字** （1到10）来代表您即将点击的标题，例如我会选择Title x: xxxx, 因为xxx。

** 您的档案 **

{profile}

** 网页浏览（点击）历史 **

{scratchpad}

** 查询 **

{query}

** 标题 **

{titles}

** 您的点击 **)";

// Single pass, so substituted text is never scanned for placeholders.
std::string fill(std::string_view tmpl,
                 const std::map<std::string_view, std::string_view>& values) {
  std::string out;
  out.reserve(tmpl.size() + 512);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const auto it = values.find(tmpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string_view localized_wealth(std::string_view wealth, Language lang) {
  if (lang != Language::kChinese) return wealth;
  if (wealth == "low income") return "低收入";
  if (wealth == "middle income") return "中等收入";
  if (wealth == "high income") return "高收入";
  return wealth;
}

bool is_ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Content of the first `<keyword>[...]` (case-insensitive, whitespace
// allowed before the bracket) whose trimmed content is non-empty.
std::optional<std::string> bracket_action(std::string_view raw,
                                          std::string_view lowered,
                                          std::string_view keyword,
                                          bool allow_empty) {
  std::size_t pos = 0;
  while ((pos = lowered.find(keyword, pos)) != std::string_view::npos) {
    std::size_t i = pos + keyword.size();
    const bool word_start = pos == 0 || !is_ascii_alnum(lowered[pos - 1]);
    pos += 1;
    if (!word_start) continue;
    while (i < raw.size() && is_ascii_space(raw[i])) ++i;
    if (i >= raw.size() || raw[i] != '[') continue;
    const auto close = raw.find(']', i + 1);
    if (close == std::string_view::npos) continue;
    std::string content = trim(raw.substr(i + 1, close - i - 1));
    if (!content.empty() || allow_empty) return content;
  }
  return std::nullopt;
}

std::optional<int> small_int(std::string_view digits) {
  if (digits.empty() || digits.size() > 3) return std::nullopt;
  int v = 0;
  for (char c : digits) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

std::string render_profile(const UserProfile& p, Language lang) {
  using Row = std::pair<std::string_view, std::string_view>;
  const bool zh = lang == Language::kChinese;
  const std::string age = std::to_string(p.age);
  const std::array<Row, 8> rows = {{
      {zh ? "年龄" : "Age", age},
      {zh ? "性别" : "Gender", p.gender},
      {zh ? "教育" : "Education", p.education},
      {zh ? "职业" : "Career", p.career},
      {zh ? "性格" : "Personality", p.personality},
      {zh ? "兴趣" : "Interest", p.interest},
      {zh ? "地点" : "Location", p.location},
      {zh ? "财富" : "Wealth", localized_wealth(p.wealth, lang)},
  }};
  const std::string_view sep = zh ? "：" : ": ";
  std::string out;
  for (const auto& [label, value] : rows) {
    if (!out.empty()) out += '\n';
    out.append(label).append(sep).append(value);
  }
  return out;
}

std::string render_scratchpad(const Scratchpad& scratchpad, Language lang) {
  if (scratchpad.entries.empty()) {
    return lang == Language::kChinese ? "无" : "None";
  }
  std::string out;
  for (std::size_t i = 0; i < scratchpad.entries.size(); ++i) {
    const auto& e = scratchpad.entries[i];
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". (" + e.query + " → " + e.clicked_title +
           ")";
  }
  return out;
}

std::string render_query_prompt(const UserProfile& profile,
                                const Scratchpad& scratchpad, int max_rounds,
                                Language lang) {
  if (max_rounds < 1) throw PreconditionError("max_rounds must be at least 1");
  const std::string rounds = std::to_string(max_rounds);
  const std::string prof = render_profile(profile, lang);
  const std::string pad = render_scratchpad(scratchpad, lang);
  return fill(lang == Language::kChinese ? kQueryTemplateZh : kQueryTemplateEn,
              {{"max_exceeds_times", rounds},
               {"profile", prof},
               {"scratchpad", pad}});
}

std::string render_click_prompt(const UserProfile& profile,
                                const Scratchpad& scratchpad,
                                std::string_view query,
                                const std::vector<SearchResult>& results,
                                Language lang) {
  if (results.empty() || results.size() > kMaxResults) {
    throw PreconditionError("click prompt needs between 1 and 10 results, got " +
                            std::to_string(results.size()));
  }
  std::string titles;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i) titles += '\n';
    titles += "Title " + std::to_string(i + 1) + ": " + results[i].title;
  }
  const std::string prof = render_profile(profile, lang);
  const std::string pad = render_scratchpad(scratchpad, lang);
  return fill(lang == Language::kChinese ? kClickTemplateZh : kClickTemplateEn,
              {{"profile", prof},
               {"scratchpad", pad},
               {"query", query},
               {"titles", titles}});
}

AgentAction AgentAction::search(std::string query) {
  AgentAction a;
  a.kind = Kind::kSearch;
  a.query = std::move(query);
  return a;
}

AgentAction AgentAction::finish() { return AgentAction{}; }

AgentAction AgentAction::click(int rank, std::string reason) {
  AgentAction a;
  a.kind = Kind::kClick;
  a.rank = rank;
  a.reason = std::move(reason);
  return a;
}

AgentAction parse_query_action(std::string_view raw) {
  const std::string lowered = to_lower_ascii(raw);
  if (auto q = bracket_action(raw, lowered, "search", false)) {
    return AgentAction::search(std::move(*q));
  }
  if (bracket_action(raw, lowered, "finish", true)) return AgentAction::finish();
  throw ParseError("no Search[...] or Finish[...] action in LLM output",
                   std::string(raw));
}

AgentAction parse_click_action(std::string_view raw, int n_results) {
  if (n_results < 1 || n_results > static_cast<int>(kMaxResults)) {
    throw PreconditionError("n_results must be in [1, 10]");
  }
  const std::string lowered = to_lower_ascii(raw);
  auto in_range = [&](std::optional<int> v) {
    return v && *v >= 1 && *v <= n_results;
  };

  for (std::size_t pos = 0;
       (pos = lowered.find("title", pos)) != std::string::npos; ++pos) {
    if (pos > 0 && is_ascii_alnum(lowered[pos - 1])) continue;
    std::size_t i = pos + 5;
    while (i < raw.size() && is_ascii_space(raw[i])) ++i;
    std::size_t end = i;
    while (end < raw.size() && raw[end] >= '0' && raw[end] <= '9') ++end;
    if (end < raw.size() && is_ascii_alnum(raw[end])) continue;
    const auto v = small_int(raw.substr(i, end - i));
    if (in_range(v)) return AgentAction::click(*v, std::string(raw));
  }

  for (std::size_t i = 0; i < raw.size();) {
    if (raw[i] < '0' || raw[i] > '9') {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < raw.size() && raw[end] >= '0' && raw[end] <= '9') ++end;
    const bool standalone = (i == 0 || !is_ascii_alnum(raw[i - 1])) &&
                            (end == raw.size() || !is_ascii_alnum(raw[end]));
    const auto v = small_int(raw.substr(i, end - i));
    if (standalone && in_range(v)) {
      return AgentAction::click(*v, std::string(raw));
    }
    i = end;
  }
  throw ParseError("no click rank in [1, " + std::to_string(n_results) +
                       "] in LLM output",
                   std::string(raw));
}

std::string format_action(const AgentAction& action) {
  switch (action.kind) {
    case AgentAction::Kind::kSearch:
      return "Search[" + action.query + "]";
    case AgentAction::Kind::kFinish:
      return "Finish[finish]";
    case AgentAction::Kind::kClick:
      return std::to_string(action.rank);
  }
  return {};
}

}  // namespace bases
