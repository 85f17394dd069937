#include "bases/commands.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "bases/errors.hpp"

#ifndef BASES_DATA_DIR
#define BASES_DATA_DIR "data"
#endif

namespace bases {

namespace fs = std::filesystem;

fs::path default_catalog_dir() {
  return fs::path(BASES_DATA_DIR) / "catalogs";
}

namespace {

template <typename T>
T get_as(const Json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& value) {
  const fs::path p(value);
  return p.is_relative() && !base.empty() ? base / p : p;
}

void apply_backend(BackendConfig& b, const Json& doc, const std::string& name) {
  if (!doc.is_object()) throw ConfigError("config key '" + name + "' must be an object");
  for (const auto& [key, value] : doc.items()) {
    const std::string full = name + "." + key;
    if (key == "endpoint") {
      b.endpoint = get_as<std::string>(doc, key);
    } else if (key == "model") {
      b.model = get_as<std::string>(doc, key);
    } else if (key == "credential_env") {
      b.credential_env = get_as<std::string>(doc, key);
    } else if (key == "temperature") {
      b.temperature = get_as<double>(doc, key);
    } else if (key == "timeout_ms") {
      b.timeout = std::chrono::milliseconds(get_as<long long>(doc, key));
    } else if (key == "max_retries") {
      b.retry.max_retries = get_as<int>(doc, key);
    } else if (key == "requests_per_second") {
      b.requests_per_second = get_as<int>(doc, key);
    } else {
      throw ConfigError("unknown config key '" + full + "'");
    }
  }
}

void write_line(std::ostream& out, const fs::path& path, const std::string& line) {
  out << line << '\n';
  out.flush();
  if (!out) throw LoadError(path.string(), 0, "write failed");
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError(path.string(), 0, "cannot open output file");
  return out;
}

RuleSet rules_for(const RunConfig& config, const fs::path& catalog_dir) {
  if (!config.rules_path.empty()) return load_rules(config.rules_path);
  if (fs::exists(catalog_dir / "rules.json")) {
    return load_rules(catalog_dir / "rules.json");
  }
  return default_rules();
}

std::string format_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string resolve_created_at(const RunConfig& config) {
  if (!config.created_at.empty()) return config.created_at;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    try {
      return format_utc(static_cast<std::time_t>(std::stoll(epoch)));
    } catch (const std::exception&) {
      throw ConfigError("SOURCE_DATE_EPOCH must be an integer");
    }
  }
  return format_utc(std::time(nullptr));
}

std::string resolve_search_backend(const RunConfig& config) {
  if (!config.search_backend.empty()) return config.search_backend;
  if (!config.corpus_path.empty()) {
    return "mock-corpus:" + config.corpus_path.filename().string();
  }
  if (!config.search.endpoint.empty()) return config.search.endpoint;
  return "unspecified";
}

std::string fixed(double value, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << value;
  return s.str();
}

std::string percent(std::size_t count, std::size_t total) {
  return fixed(100.0 * static_cast<double>(count) / static_cast<double>(total),
               1) +
         "%";
}

void print_marginals(const std::vector<UserProfile>& profiles, std::ostream& log) {
  if (profiles.empty()) return;
  long long age_sum = 0;
  int age_min = kMaxAge;
  int age_max = kMinAge;
  for (const auto& p : profiles) {
    age_sum += p.age;
    age_min = std::min(age_min, p.age);
    age_max = std::max(age_max, p.age);
  }
  log << "  age: min " << age_min << ", mean "
      << fixed(static_cast<double>(age_sum) /
                   static_cast<double>(profiles.size()),
               1)
      << ", max " << age_max << "\n";

  for (auto attribute : kProfileAttributes) {
    if (attribute == "age") continue;
    std::map<std::string, std::size_t> counts;
    for (const auto& p : profiles) {
      std::string c = p.category(attribute);
      counts[c.empty() ? p.get(attribute) : c] += 1;
    }
    std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(),
                                                            counts.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    log << "  " << attribute << ":";
    constexpr std::size_t kShown = 5;
    for (std::size_t i = 0; i < std::min(kShown, sorted.size()); ++i) {
      log << (i ? ", " : " ") << sorted[i].first << " "
          << percent(sorted[i].second, profiles.size());
    }
    if (sorted.size() > kShown) log << " (+" << sorted.size() - kShown << " more)";
    log << "\n";
  }
}

std::vector<UserSession> sessions_of_split(const WarriorsDataset& ds,
                                           const std::string& split) {
  if (split == "all") return ds.sessions;
  const std::vector<std::string>* ids = nullptr;
  if (split == "train") ids = &ds.splits.train;
  if (split == "valid") ids = &ds.splits.valid;
  if (split == "test") ids = &ds.splits.test;
  if (!ids) {
    throw ConfigError("unknown split '" + split +
                      "' (expected train, valid, test or all)");
  }
  std::vector<UserSession> out;
  for (const auto& s : ds.sessions) {
    if (std::find(ids->begin(), ids->end(), s.user_id) != ids->end()) {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

void apply_config_json(RunConfig& c, const Json& doc, const fs::path& base) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "language") {
      c.language = parse_language(get_as<std::string>(doc, key));
    } else if (key == "catalog_dir") {
      c.catalog_dir = resolve(base, get_as<std::string>(doc, key));
    } else if (key == "rules") {
      c.rules_path = resolve(base, get_as<std::string>(doc, key));
    } else if (key == "seed") {
      c.master_seed = get_as<std::uint64_t>(doc, key);
    } else if (key == "n_users") {
      c.n_users = get_as<std::size_t>(doc, key);
    } else if (key == "max_rounds") {
      c.max_rounds = get_as<int>(doc, key);
    } else if (key == "concurrency_limit") {
      c.concurrency_limit = get_as<int>(doc, key);
    } else if (key == "parse_retries") {
      c.parse_retries = get_as<int>(doc, key);
    } else if (key == "backend_mode") {
      const auto mode = get_as<std::string>(doc, key);
      if (mode == "live") {
        c.backend_mode = BackendMode::kLive;
      } else if (mode == "mock") {
        c.backend_mode = BackendMode::kMock;
      } else {
        throw ConfigError("backend_mode must be 'live' or 'mock'");
      }
    } else if (key == "llm") {
      apply_backend(c.llm, value, key);
    } else if (key == "judge") {
      apply_backend(c.judge, value, key);
    } else if (key == "search") {
      apply_backend(c.search, value, key);
    } else if (key == "corpus") {
      c.corpus_path = resolve(base, get_as<std::string>(doc, key));
    } else if (key == "llm_script") {
      c.llm_script_path = resolve(base, get_as<std::string>(doc, key));
    } else if (key == "mock_latency_ms") {
      c.mock_latency_ms = get_as<int>(doc, key);
    } else if (key == "out") {
      c.output = resolve(base, get_as<std::string>(doc, key));
    } else if (key == "created_at") {
      c.created_at = get_as<std::string>(doc, key);
    } else if (key == "search_backend") {
      c.search_backend = get_as<std::string>(doc, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

void apply_config_file(RunConfig& config, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open config file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw LoadError(path.string(), 0, std::string("malformed JSON: ") + e.what());
  }
  apply_config_json(config, doc, path.parent_path());
}

void validate_config(const RunConfig& c, bool needs_backends) {
  if (c.n_users < 1) throw ConfigError("n_users must be at least 1");
  if (c.max_rounds < 1) throw ConfigError("max_rounds must be at least 1");
  if (c.concurrency_limit < 1) {
    throw ConfigError("concurrency_limit must be at least 1");
  }
  if (c.parse_retries < 1) throw ConfigError("parse_retries must be at least 1");
  if (c.mock_latency_ms < 0) throw ConfigError("mock_latency_ms must be >= 0");
  if (needs_backends && c.backend_mode == BackendMode::kMock &&
      (c.corpus_path.empty() || c.llm_script_path.empty())) {
    throw ConfigError("mock mode requires a corpus path and an LLM script path");
  }
}

std::unique_ptr<LlmClient> make_llm_client(const RunConfig& c, bool judge) {
  if (c.backend_mode == BackendMode::kMock) {
    if (c.llm_script_path.empty()) {
      throw ConfigError("mock mode requires an LLM script path");
    }
    return std::make_unique<PatternLlm>(PatternLlm::from_jsonl(
        c.llm_script_path, std::chrono::milliseconds(c.mock_latency_ms)));
  }
  BackendConfig b = judge ? c.judge : c.llm;
  if (judge && b.endpoint.empty()) {
    b.endpoint = c.llm.endpoint;
    b.model = c.llm.model;
    b.credential_env = c.llm.credential_env;
  }
  return std::make_unique<OpenAiLlmClient>(std::move(b));
}

std::unique_ptr<SearchClient> make_search_client(const RunConfig& c) {
  if (c.backend_mode == BackendMode::kMock) {
    if (c.corpus_path.empty()) {
      throw ConfigError("mock mode requires a corpus path");
    }
    return mock_search_from_corpus(c.corpus_path);
  }
  return std::make_unique<HttpSearchClient>(c.search);
}

ProfileBatch cmd_gen_profiles(const RunConfig& config, std::ostream& log) {
  validate_config(config, false);
  const fs::path dir =
      config.catalog_dir.empty() ? default_catalog_dir() : config.catalog_dir;
  const CatalogSet catalogs = load_catalogs(dir, config.language);
  const RuleSet rules = rules_for(config, dir);
  ProfileBatch batch = generate_batch(catalogs, rules, config.n_users,
                                      config.master_seed, config.language);

  const fs::path out_path =
      config.output.empty() ? fs::path("profiles.jsonl") : config.output;
  std::ofstream out = open_output(out_path);
  for (const auto& p : batch.profiles) out << to_json(p).dump() << '\n';
  out.flush();
  if (!out) throw LoadError(out_path.string(), 0, "write failed");

  log << "wrote " << batch.profiles.size() << " profiles to "
      << out_path.string() << " (" << batch.duplicate_tuples
      << " duplicate attribute tuples)\n";
  print_marginals(batch.profiles, log);
  return batch;
}

BatchSummary cmd_simulate(const RunConfig& config, const fs::path& profiles_path,
                          std::ostream& log) {
  validate_config(config, true);
  const auto profiles = read_profiles_jsonl(profiles_path);
  if (profiles.empty()) {
    throw PreconditionError(profiles_path.string() + " contains no profiles");
  }
  auto llm = make_llm_client(config);
  auto search = make_search_client(config);

  const fs::path out_path =
      config.output.empty() ? fs::path("sessions.jsonl") : config.output;
  std::ofstream out = open_output(out_path);

  BatchConfig batch;
  batch.session.max_rounds = config.max_rounds;
  batch.session.parse_retries = config.parse_retries;
  batch.concurrency_limit = config.concurrency_limit;
  const BatchSummary summary = run_batch(
      profiles, *llm, *search, batch,
      [&](std::size_t, const UserSession& s) {
        write_line(out, out_path, to_json(s).dump());
      });

  log << "wrote " << summary.total << " sessions to " << out_path.string()
      << ": finished " << summary.finished << ", capped " << summary.capped
      << ", failed " << summary.failed << "\n";
  return summary;
}

ValidationReport cmd_build_dataset(const RunConfig& config,
                                   const fs::path& sessions_path,
                                   std::ostream& log) {
  const auto sessions = read_sessions_jsonl(sessions_path);
  DatasetMetadata meta;
  meta.created_at = resolve_created_at(config);
  meta.search_backend = resolve_search_backend(config);
  const WarriorsDataset ds =
      build_dataset(sessions, config.master_seed, config.language, meta);

  const fs::path dir = config.output.empty() ? fs::path("warriors") : config.output;
  write_dataset(ds, dir);
  const DatasetStats stats = compute_stats(ds);
  log << "wrote dataset to " << dir.string() << ": train "
      << ds.splits.train.size() << ", valid " << ds.splits.valid.size()
      << ", test " << ds.splits.test.size() << " users; "
      << ds.failures.size() << " failed sessions in failures.jsonl\n";
  log << "  avg queries per user "
      << fixed(stats.avg_queries_per_user.rounded(), 2)
      << ", avg clicks per query "
      << fixed(stats.avg_clicks_per_query.rounded(), 2) << "\n";

  ValidationReport report = validate_dataset(dir);
  for (const auto& v : report.violations) {
    log << "  invalid: " << v.file << (v.line ? ":" + std::to_string(v.line) : "")
        << ": " << v.message << "\n";
  }
  return report;
}

std::vector<std::vector<double>> read_scores_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open scores file");
  std::vector<std::vector<double>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      Json j = Json::parse(line);
      if (j.is_object()) j = j.at("scores");
      out.push_back(j.get<std::vector<double>>());
    } catch (const Json::exception& e) {
      throw LoadError(path.string(), line_no,
                      std::string("expected a list of scores: ") + e.what());
    }
  }
  return out;
}

std::vector<MetricsReport> cmd_evaluate(const RunConfig& config,
                                        const fs::path& dataset_dir,
                                        const EvaluateOptions& options,
                                        std::ostream& log) {
  const ValidationReport check = validate_dataset(dataset_dir);
  if (!check.ok()) {
    const auto& v = check.violations.front();
    throw EvaluationError("dataset " + dataset_dir.string() + " is invalid (" +
                          std::to_string(check.violations.size()) +
                          " violations), first: " + v.file +
                          (v.line ? ":" + std::to_string(v.line) : "") + ": " +
                          v.message);
  }
  if (!options.scores_path.empty() && options.tasks.size() != 1) {
    throw ConfigError("an external scores file covers exactly one task");
  }
  const WarriorsDataset ds = read_dataset(dataset_dir);
  const auto sessions = sessions_of_split(ds, options.split);

  std::unique_ptr<Ranker> ranker;
  std::string ranker_name = options.ranker;
  if (options.scores_path.empty()) {
    if (options.ranker == "bm25") {
      ranker = std::make_unique<Bm25Ranker>();
    } else if (options.ranker == "random") {
      ranker = std::make_unique<RandomRanker>(config.master_seed);
    } else {
      throw ConfigError("unknown ranker '" + options.ranker +
                        "' (expected bm25 or random)");
    }
  } else {
    ranker_name = "external:" + options.scores_path.filename().string();
  }

  std::vector<MetricsReport> reports;
  for (Task task : options.tasks) {
    const auto instances = build_instances(sessions, task);
    if (instances.empty()) {
      throw EvaluationError(
          "no " + std::string(task_name(task)) + " instances in the " +
          options.split + " split" +
          (task == Task::kSessionSearch
               ? ": session search needs sessions with at least two rounds"
               : ""));
    }
    if (ranker) {
      reports.push_back(evaluate(*ranker, instances));
    } else {
      reports.push_back(
          evaluate_scores(instances, read_scores_jsonl(options.scores_path)));
    }
  }

  log << format_metrics_table(reports);
  Json doc{{"dataset", dataset_dir.string()},
           {"split", options.split},
           {"ranker", ranker_name},
           {"reports", Json::array()}};
  for (const auto& r : reports) doc["reports"].push_back(to_json(r));
  const fs::path out_path =
      config.output.empty() ? dataset_dir / "report.json" : config.output;
  std::ofstream out = open_output(out_path);
  write_line(out, out_path, doc.dump(2));
  return reports;
}

ConsistencyMode parse_consistency_mode(std::string_view name) {
  if (name == "query_overlap") return ConsistencyMode::kQueryOverlap;
  if (name == "click_accuracy") return ConsistencyMode::kClickAccuracy;
  if (name == "llm_judge") return ConsistencyMode::kLlmJudge;
  throw ConfigError("unknown consistency mode '" + std::string(name) +
                    "' (expected query_overlap, click_accuracy or llm_judge)");
}

double cmd_consistency(const RunConfig& config, const fs::path& pairs_path,
                       ConsistencyMode mode, std::ostream& log) {
  std::ifstream in(pairs_path);
  if (!in) throw LoadError(pairs_path.string(), 0, "cannot open pairs file");

  std::unique_ptr<LlmClient> judge;
  if (mode == ConsistencyMode::kLlmJudge) {
    validate_config(config, false);
    judge = make_llm_client(config, true);
  }

  std::vector<std::pair<int, int>> rank_pairs;
  double total = 0.0;
  std::size_t n = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw LoadError(pairs_path.string(), line_no,
                      std::string("malformed JSON: ") + e.what());
    }
    const bool has = j.is_object() && j.contains("human") && j.contains("agent");
    if (mode == ConsistencyMode::kClickAccuracy) {
      if (!has || !j["human"].is_number_integer() ||
          !j["agent"].is_number_integer()) {
        throw LoadError(pairs_path.string(), line_no,
                        "click_accuracy expects integer 'human' and 'agent' ranks");
      }
      rank_pairs.emplace_back(j["agent"].get<int>(), j["human"].get<int>());
      continue;
    }
    if (!has || !j["human"].is_string() || !j["agent"].is_string()) {
      throw LoadError(pairs_path.string(), line_no,
                      "expected string 'human' and 'agent' queries");
    }
    const std::string human = j["human"].get<std::string>();
    const std::string agent = j["agent"].get<std::string>();
    try {
      if (mode == ConsistencyMode::kQueryOverlap) {
        total += term_overlap_rate(human, agent, config.language);
      } else {
        std::optional<UserProfile> profile;
        if (j.contains("profile")) profile = profile_from_json(j["profile"]);
        total += llm_judge_query_consistency(
                     *judge, profile ? &*profile : nullptr, human, agent,
                     config.language, {config.parse_retries})
                     ? 1.0
                     : 0.0;
      }
    } catch (const PreconditionError& e) {
      throw LoadError(pairs_path.string(), line_no, e.what());
    } catch (const Json::exception& e) {
      throw LoadError(pairs_path.string(), line_no, e.what());
    }
    ++n;
  }

  double value = 0.0;
  if (mode == ConsistencyMode::kClickAccuracy) {
    if (rank_pairs.empty()) {
      throw PreconditionError(pairs_path.string() + " contains no pairs");
    }
    value = click_top1_accuracy(rank_pairs);
    n = rank_pairs.size();
  } else {
    if (n == 0) throw PreconditionError(pairs_path.string() + " contains no pairs");
    value = total / static_cast<double>(n);
  }

  static constexpr std::array<std::string_view, 3> kNames = {
      "query_overlap", "click_accuracy", "llm_judge"};
  const std::string_view name = kNames[static_cast<std::size_t>(mode)];
  log << name << ": " << fixed(value, 2) << " over " << n << " pairs\n";
  if (!config.output.empty()) {
    std::ofstream out = open_output(config.output);
    write_line(out, config.output,
               Json{{"mode", name}, {"n_pairs", n}, {"value", value}}.dump(2));
  }
  return value;
}

}  // namespace bases
