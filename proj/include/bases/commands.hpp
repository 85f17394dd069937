#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bases/backends.hpp"
#include "bases/dataset.hpp"
#include "bases/evaluation.hpp"
#include "bases/simulation.hpp"

namespace bases {

enum class BackendMode { kLive, kMock };

struct RunConfig {
  Language language = Language::kEnglish;
  std::filesystem::path catalog_dir;  // defaults to the bundled catalogs
  std::filesystem::path rules_path;   // empty: <catalog_dir>/rules.json or built-in
  std::uint64_t master_seed = 0;
  std::size_t n_users = 100;
  int max_rounds = 5;
  int concurrency_limit = 8;
  int parse_retries = 3;
  BackendMode backend_mode = BackendMode::kLive;
  BackendConfig llm = default_llm_config();
  BackendConfig judge = default_judge_config();
  BackendConfig search = default_search_config();
  std::filesystem::path corpus_path;
  std::filesystem::path llm_script_path;
  int mock_latency_ms = 0;
  std::filesystem::path output;  // empty: command default
  std::string created_at;        // empty: SOURCE_DATE_EPOCH or current time
  std::string search_backend;    // empty: derived from the backend settings
};

std::filesystem::path default_catalog_dir();

// Overlays a JSON config document. Relative paths resolve against
// `base_dir`. Unknown keys are rejected with ConfigError.
void apply_config_json(RunConfig& config, const Json& doc,
                       const std::filesystem::path& base_dir);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Throws ConfigError for out-of-range values or incomplete mock setup.
void validate_config(const RunConfig& config, bool needs_backends);

std::unique_ptr<LlmClient> make_llm_client(const RunConfig& config,
                                           bool judge = false);
std::unique_ptr<SearchClient> make_search_client(const RunConfig& config);

// Writes profiles.jsonl and prints attribute marginals.
ProfileBatch cmd_gen_profiles(const RunConfig& config, std::ostream& log);

// Streams sessions.jsonl in input order, flushing after every line.
BatchSummary cmd_simulate(const RunConfig& config,
                          const std::filesystem::path& profiles_path,
                          std::ostream& log);

// Builds, writes and re-validates the dataset. Returns the validation
// report of the written directory.
ValidationReport cmd_build_dataset(const RunConfig& config,
                                   const std::filesystem::path& sessions_path,
                                   std::ostream& log);

struct EvaluateOptions {
  std::vector<Task> tasks{Task::kSessionSearch, Task::kClickPrediction};
  std::string ranker = "bm25";         // bm25 | random
  std::filesystem::path scores_path;   // external scores, one task only
  std::string split = "test";          // train | valid | test | all
};

std::vector<MetricsReport> cmd_evaluate(const RunConfig& config,
                                        const std::filesystem::path& dataset_dir,
                                        const EvaluateOptions& options,
                                        std::ostream& log);

enum class ConsistencyMode { kQueryOverlap, kClickAccuracy, kLlmJudge };
ConsistencyMode parse_consistency_mode(std::string_view name);

double cmd_consistency(const RunConfig& config,
                       const std::filesystem::path& pairs_path,
                       ConsistencyMode mode, std::ostream& log);

// One aligned score list per instance: JSONL of arrays or {"scores": [...]}.
std::vector<std::vector<double>> read_scores_jsonl(
    const std::filesystem::path& path);

}  // namespace bases
