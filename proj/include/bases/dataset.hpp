#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bases/simulation.hpp"

namespace bases {

inline constexpr std::string_view kGeneratorVersion = "bases 0.1.0";

struct SplitSizes {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;

  bool operator==(const SplitSizes&) const = default;
};

// valid = test = round_half_up(0.01 * n), at least 1 each; train gets the
// rest. Throws PreconditionError for n < 3.
SplitSizes split_sizes(std::size_t n);

struct DatasetMetadata {
  std::string created_at;  // ISO 8601, UTC
  std::string search_backend;
  std::string generator_version{kGeneratorVersion};
  std::uint64_t split_seed = 0;

  bool operator==(const DatasetMetadata&) const = default;
};

struct DatasetSplits {
  std::vector<std::string> train;
  std::vector<std::string> valid;
  std::vector<std::string> test;

  bool operator==(const DatasetSplits&) const = default;
};

struct WarriorsDataset {
  Language language = Language::kEnglish;
  // Included sessions, grouped train, valid, test; input order is kept
  // inside each group.
  std::vector<UserSession> sessions;
  DatasetSplits splits;
  DatasetMetadata metadata;
  // Sessions that ended in failure. Written to a sidecar file only.
  std::vector<UserSession> failures;

  bool operator==(const WarriorsDataset&) const = default;
};

// Keeps finished and capped sessions, then assigns users to splits with a
// seeded shuffle. Throws PreconditionError for fewer than three users,
// duplicate user ids or sessions in another language.
WarriorsDataset build_dataset(const std::vector<UserSession>& sessions,
                              std::uint64_t split_seed, Language lang,
                              DatasetMetadata metadata = {});

// Exact ratio num/den, also available rounded half up to two decimals.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  std::uint64_t hundredths() const;  // round_half_up(100 * num / den)
  double rounded() const { return static_cast<double>(hundredths()) / 100.0; }

  bool operator==(const Ratio&) const = default;
};

struct DatasetStats {
  std::size_t n_users = 0;
  std::size_t n_queries = 0;
  std::size_t n_clicks = 0;
  Ratio avg_queries_per_user;
  Ratio avg_clicks_per_query;

  bool operator==(const DatasetStats&) const = default;
};

DatasetStats compute_stats(const WarriorsDataset& dataset);
Json to_json(const DatasetStats& stats);

// JSONL helpers for session files. Reading throws LoadError with the line
// number of the first malformed session.
std::vector<UserSession> read_sessions_jsonl(const std::filesystem::path& path);
void write_sessions_jsonl(const std::filesystem::path& path,
                          const std::vector<UserSession>& sessions);

// Writes train/valid/test.jsonl, metadata.json, stats.json and
// failures.jsonl into `dir` (created if needed).
void write_dataset(const WarriorsDataset& dataset,
                   const std::filesystem::path& dir);
WarriorsDataset read_dataset(const std::filesystem::path& dir);

struct Violation {
  std::string file;
  std::size_t line = 0;  // 0 when not tied to a line
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every schema invariant of a dataset directory. Throws LoadError
// when a required file cannot be read.
ValidationReport validate_dataset(const std::filesystem::path& dir);

// Line-level checks for one session object, shared with the CLI.
std::vector<std::string> check_session(const Json& line, bool dataset_member);

}  // namespace bases
