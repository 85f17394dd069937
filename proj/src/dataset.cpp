#include "bases/dataset.hpp"

#include <array>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bases/errors.hpp"

namespace bases {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 3> kSplitNames = {"train", "valid",
                                                         "test"};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json read_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw LoadError(path.string(), 0, std::string("malformed JSON: ") + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError(path.string(), 0, "cannot open file for writing");
  out << text;
  if (!out) throw LoadError(path.string(), 0, "write failed");
}

std::string jsonl(const std::vector<UserSession>& sessions) {
  std::string out;
  for (const auto& s : sessions) {
    out += to_json(s).dump();
    out += '\n';
  }
  return out;
}

const std::vector<std::string>& split_members(const DatasetSplits& splits,
                                              std::size_t k) {
  return k == 0 ? splits.train : k == 1 ? splits.valid : splits.test;
}

bool is_nonempty_string(const Json& j, const char* key) {
  const auto it = j.find(key);
  return it != j.end() && it->is_string() && !it->get<std::string>().empty();
}

}  // namespace

SplitSizes split_sizes(std::size_t n) {
  if (n < 3) {
    throw PreconditionError("a dataset needs at least 3 users to split, got " +
                            std::to_string(n));
  }
  const std::size_t eval = std::max<std::size_t>(1, (n + 50) / 100);
  return {n - 2 * eval, eval, eval};
}

WarriorsDataset build_dataset(const std::vector<UserSession>& sessions,
                              std::uint64_t split_seed, Language lang,
                              DatasetMetadata metadata) {
  WarriorsDataset ds;
  ds.language = lang;
  std::vector<const UserSession*> kept;
  std::unordered_set<std::string> seen;
  for (const auto& s : sessions) {
    if (s.terminated_by == Termination::kFailure) {
      ds.failures.push_back(s);
      continue;
    }
    if (s.language != lang) {
      throw PreconditionError("session of user " + s.user_id + " has language " +
                              std::string(language_code(s.language)) +
                              ", dataset is " +
                              std::string(language_code(lang)));
    }
    if (!seen.insert(s.user_id).second) {
      throw PreconditionError("duplicate user_id " + s.user_id);
    }
    kept.push_back(&s);
  }
  const SplitSizes sizes = split_sizes(kept.size());

  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(split_seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  // 0 = train, 1 = valid, 2 = test
  std::vector<int> role(kept.size(), 0);
  for (std::size_t i = 0; i < sizes.valid; ++i) role[order[i]] = 1;
  for (std::size_t i = 0; i < sizes.test; ++i) role[order[sizes.valid + i]] = 2;

  for (int r = 0; r < 3; ++r) {
    auto& ids = r == 0 ? ds.splits.train : r == 1 ? ds.splits.valid
                                                  : ds.splits.test;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (role[i] != r) continue;
      ids.push_back(kept[i]->user_id);
      ds.sessions.push_back(*kept[i]);
    }
  }
  metadata.split_seed = split_seed;
  ds.metadata = std::move(metadata);
  return ds;
}

std::uint64_t Ratio::hundredths() const {
  if (den == 0) return 0;
  return (200 * num + den) / (2 * den);
}

DatasetStats compute_stats(const WarriorsDataset& dataset) {
  DatasetStats st;
  st.n_users = dataset.sessions.size();
  for (const auto& s : dataset.sessions) {
    st.n_queries += s.rounds.size();
    // One click per persisted round.
    st.n_clicks += s.rounds.size();
  }
  if (st.n_users) st.avg_queries_per_user = {st.n_queries, st.n_users};
  if (st.n_queries) st.avg_clicks_per_query = {st.n_clicks, st.n_queries};
  return st;
}

Json to_json(const DatasetStats& st) {
  return Json{{"n_users", st.n_users},
              {"n_queries", st.n_queries},
              {"n_clicks", st.n_clicks},
              {"avg_queries_per_user", st.avg_queries_per_user.rounded()},
              {"avg_clicks_per_query", st.avg_clicks_per_query.rounded()}};
}

std::vector<std::string> check_session(const Json& j, bool dataset_member) {
  std::vector<std::string> problems;
  auto bad = [&](std::string what) { problems.push_back(std::move(what)); };
  if (!j.is_object()) {
    bad("session must be a JSON object");
    return problems;
  }
  if (!is_nonempty_string(j, "user_id")) bad("missing user_id");
  if (const auto it = j.find("language"); it == j.end() || !it->is_string()) {
    bad("missing language");
  } else {
    try {
      parse_language(it->get<std::string>());
    } catch (const Error&) {
      bad("unknown language '" + it->get<std::string>() + "'");
    }
  }
  const auto term = j.find("terminated_by");
  if (term == j.end() || !term->is_string()) {
    bad("missing terminated_by");
  } else {
    const std::string t = term->get<std::string>();
    if (t != "finish_action" && t != "max_rounds" && t != "failure") {
      bad("unknown terminated_by '" + t + "'");
    } else if (dataset_member && t == "failure") {
      bad("failed session in a dataset split");
    }
  }
  const auto rounds = j.find("rounds");
  if (rounds == j.end() || !rounds->is_array()) {
    bad("missing rounds array");
    return problems;
  }
  if (dataset_member && rounds->empty()) bad("session has no rounds");

  for (std::size_t k = 0; k < rounds->size(); ++k) {
    const Json& r = (*rounds)[k];
    const std::string where = "round " + std::to_string(k + 1) + ": ";
    if (!r.is_object()) {
      bad(where + "must be an object");
      continue;
    }
    const auto idx = r.find("round_index");
    if (idx == r.end() || !idx->is_number_integer() ||
        idx->get<long long>() != static_cast<long long>(k + 1)) {
      bad(where + "round_index must be " + std::to_string(k + 1));
    }
    if (!is_nonempty_string(r, "query")) bad(where + "missing query");
    if (const auto reason = r.find("click_reason");
        reason != r.end() && !reason->is_string()) {
      bad(where + "click_reason must be a string");
    }
    const auto results = r.find("results");
    if (results == r.end() || !results->is_array()) {
      bad(where + "missing results array");
      continue;
    }
    const std::size_t n = results->size();
    if (n == 0 || n > kMaxResults) {
      bad(where + "needs 1 to 10 results, has " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Json& res = (*results)[i];
      const std::string rwhere = where + "result " + std::to_string(i + 1) + ": ";
      if (!res.is_object()) {
        bad(rwhere + "must be an object");
        continue;
      }
      const auto rank = res.find("rank");
      if (rank == res.end() || !rank->is_number_integer() ||
          rank->get<long long>() != static_cast<long long>(i + 1)) {
        bad(rwhere + "rank must be " + std::to_string(i + 1));
      }
      if (!is_nonempty_string(res, "url")) bad(rwhere + "missing url");
      if (!is_nonempty_string(res, "title")) bad(rwhere + "missing title");
      if (const auto sn = res.find("snippet");
          sn != res.end() && !sn->is_string()) {
        bad(rwhere + "snippet must be a string");
      }
    }
    const auto click = r.find("clicked_rank");
    if (click == r.end() || !click->is_number_integer()) {
      bad(where + "missing clicked_rank");
    } else {
      const long long c = click->get<long long>();
      if (c < 1 || c > static_cast<long long>(std::min(n, kMaxResults))) {
        bad(where + "clicked_rank " + std::to_string(c) + " outside [1, " +
            std::to_string(n) + "]");
      }
    }
  }
  return problems;
}

std::vector<UserSession> read_sessions_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open sessions file");
  std::vector<UserSession> sessions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw LoadError(path.string(), line_no,
                      std::string("malformed JSON: ") + e.what());
    }
    const auto problems = check_session(j, false);
    if (!problems.empty()) throw LoadError(path.string(), line_no, problems[0]);
    sessions.push_back(session_from_json(j));
  }
  return sessions;
}

void write_sessions_jsonl(const fs::path& path,
                          const std::vector<UserSession>& sessions) {
  write_text(path, jsonl(sessions));
}

void write_dataset(const WarriorsDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  std::unordered_map<std::string, const UserSession*> by_user;
  for (const auto& s : ds.sessions) by_user.emplace(s.user_id, &s);

  Json counts = Json::object();
  for (std::size_t k = 0; k < kSplitNames.size(); ++k) {
    std::vector<UserSession> part;
    for (const auto& id : split_members(ds.splits, k)) {
      const auto it = by_user.find(id);
      if (it == by_user.end()) {
        throw ContractError("split lists unknown user " + id);
      }
      part.push_back(*it->second);
    }
    counts[std::string(kSplitNames[k])] = part.size();
    write_text(dir / (std::string(kSplitNames[k]) + ".jsonl"), jsonl(part));
  }
  const Json meta{{"language", language_code(ds.language)},
                  {"created_at", ds.metadata.created_at},
                  {"search_backend", ds.metadata.search_backend},
                  {"generator_version", ds.metadata.generator_version},
                  {"split_seed", ds.metadata.split_seed},
                  {"splits", counts}};
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
  write_text(dir / "stats.json", to_json(compute_stats(ds)).dump(2) + "\n");
  write_text(dir / "failures.jsonl", jsonl(ds.failures));
}

WarriorsDataset read_dataset(const fs::path& dir) {
  WarriorsDataset ds;
  const Json meta = read_json_file(dir / "metadata.json");
  try {
    ds.language = parse_language(meta.at("language").get<std::string>());
    ds.metadata.created_at = meta.value("created_at", "");
    ds.metadata.search_backend = meta.value("search_backend", "");
    ds.metadata.generator_version = meta.value("generator_version", "");
    ds.metadata.split_seed = meta.value("split_seed", std::uint64_t{0});
  } catch (const Json::exception& e) {
    throw LoadError((dir / "metadata.json").string(), 0, e.what());
  }
  for (std::size_t k = 0; k < kSplitNames.size(); ++k) {
    auto& ids = k == 0 ? ds.splits.train : k == 1 ? ds.splits.valid
                                                  : ds.splits.test;
    for (auto& s :
         read_sessions_jsonl(dir / (std::string(kSplitNames[k]) + ".jsonl"))) {
      ids.push_back(s.user_id);
      ds.sessions.push_back(std::move(s));
    }
  }
  if (fs::exists(dir / "failures.jsonl")) {
    ds.failures = read_sessions_jsonl(dir / "failures.jsonl");
  }
  return ds;
}

ValidationReport validate_dataset(const fs::path& dir) {
  ValidationReport report;
  auto violation = [&](const fs::path& file, std::size_t line,
                       std::string msg) {
    report.violations.push_back({file.string(), line, std::move(msg)});
  };

  const fs::path meta_path = dir / "metadata.json";
  const Json meta = read_json_file(meta_path);
  std::optional<Language> lang;
  if (!meta.is_object()) {
    violation(meta_path, 0, "metadata must be an object");
  } else {
    for (const char* key : {"created_at", "search_backend", "generator_version"}) {
      if (!meta.contains(key) || !meta[key].is_string()) {
        violation(meta_path, 0, std::string("missing string field '") + key + "'");
      }
    }
    try {
      lang = parse_language(meta.at("language").get<std::string>());
    } catch (const std::exception&) {
      violation(meta_path, 0, "missing or unknown language");
    }
  }

  struct Seen {
    std::string file;
    std::size_t line;
  };
  std::unordered_map<std::string, Seen> users;
  WarriorsDataset parsed;
  std::array<std::size_t, 3> counts{};
  bool line_errors = false;
  for (std::size_t k = 0; k < kSplitNames.size(); ++k) {
    const fs::path path = dir / (std::string(kSplitNames[k]) + ".jsonl");
    std::ifstream in(path);
    if (!in) throw LoadError(path.string(), 0, "cannot open split file");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::exception& e) {
        violation(path, line_no, std::string("malformed JSON: ") + e.what());
        line_errors = true;
        continue;
      }
      const auto problems = check_session(j, true);
      for (const auto& p : problems) violation(path, line_no, p);
      line_errors = line_errors || !problems.empty();
      // A line with schema problems still names its user, so it takes part
      // in the partition and split-size checks.
      const auto id = j.find("user_id");
      if (id == j.end() || !id->is_string()) continue;
      const std::string user_id = id->get<std::string>();
      const auto [it, inserted] =
          users.emplace(user_id, Seen{path.filename().string(), line_no});
      if (!inserted) {
        violation(path, line_no,
                  "user " + user_id + " already appears in " + it->second.file +
                      ":" + std::to_string(it->second.line) +
                      " (splits must partition users)");
        continue;
      }
      ++counts[k];
      if (!problems.empty()) continue;
      UserSession s = session_from_json(j);
      if (lang && s.language != *lang) {
        violation(path, line_no,
                  "language " + std::string(language_code(s.language)) +
                      " differs from metadata");
      }
      parsed.sessions.push_back(std::move(s));
    }
  }

  const std::size_t total = counts[0] + counts[1] + counts[2];
  if (total < 3) {
    violation(dir, 0, "dataset has " + std::to_string(total) +
                          " valid users; at least 3 are required");
  } else {
    const SplitSizes want = split_sizes(total);
    const std::array<std::size_t, 3> expect = {want.train, want.valid,
                                               want.test};
    for (std::size_t k = 0; k < 3; ++k) {
      if (counts[k] != expect[k]) {
        violation(dir / (std::string(kSplitNames[k]) + ".jsonl"), 0,
                  "split has " + std::to_string(counts[k]) + " users, expected " +
                      std::to_string(expect[k]) + " for " +
                      std::to_string(total) + " users");
      }
    }
  }
  if (meta.is_object() && meta.contains("splits") && meta["splits"].is_object()) {
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string name(kSplitNames[k]);
      const Json& c = meta["splits"].value(name, Json());
      if (!c.is_number_unsigned() || c.get<std::size_t>() != counts[k]) {
        violation(meta_path, 0, "splits." + name + " does not match " + name +
                                    ".jsonl (" + std::to_string(counts[k]) +
                                    " users)");
      }
    }
  } else {
    violation(meta_path, 0, "missing 'splits' counts");
  }

  const fs::path stats_path = dir / "stats.json";
  const Json stats = read_json_file(stats_path);
  // Stats cannot be recomputed from lines that failed to parse.
  if (line_errors) return report;
  const Json expect = to_json(compute_stats(parsed));
  for (const auto& [key, value] : expect.items()) {
    if (!stats.is_object() || !stats.contains(key) || stats[key] != value) {
      violation(stats_path, 0,
                "'" + key + "' should be " + value.dump() + " for the split files");
    }
  }
  return report;
}

}  // namespace bases
