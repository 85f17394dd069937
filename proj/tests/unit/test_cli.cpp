#include <gtest/gtest.h>

#include <filesystem>

#include "bases/json.hpp"
#include "test_support.hpp"

using bases::Json;
using bases::testing::cli_path;
using bases::testing::data_dir;
using bases::testing::read_file;
using bases::testing::read_lines;
using bases::testing::run_cli;
using bases::testing::TempDir;
using bases::testing::write_file;

namespace fs = std::filesystem;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::vector<std::string> mock_flags(const std::string& lang = "en") {
  return {"--backend",    "mock",
          "--corpus",     (data_dir() / "mock" / "corpus.jsonl").string(),
          "--llm-script", (data_dir() / "mock" / ("llm_script_" + lang + ".jsonl")).string()};
}

std::vector<std::string> concat(std::vector<std::string> a,
                                const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Profiles, sessions and a dataset for 100 users, built once.
class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    tmp_ = new TempDir("bases-cli");
    const auto& d = tmp_->path();
    auto r = run_cli({"gen-profiles", "-n", "100", "--seed", "3", "--out",
                      (d / "profiles.jsonl").string()});
    ASSERT_EQ(r.exit_code, 0) << r.output;
    r = run_cli(concat({"simulate", (d / "profiles.jsonl").string(), "--out",
                        (d / "sessions.jsonl").string()},
                       mock_flags()));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    r = run_cli({"build-dataset", (d / "sessions.jsonl").string(), "--seed", "3",
                 "--created-at", "2024-01-01T00:00:00Z", "--out",
                 (d / "ds").string()});
    ASSERT_EQ(r.exit_code, 0) << r.output;
    build_log_ = new std::string(r.output);
  }
  static void TearDownTestSuite() {
    delete build_log_;
    delete tmp_;
  }
  static const fs::path& dir() { return tmp_->path(); }

  static TempDir* tmp_;
  static std::string* build_log_;
};

TempDir* Pipeline::tmp_ = nullptr;
std::string* Pipeline::build_log_ = nullptr;

}  // namespace

TEST(CliGenProfiles, SameSeedSameBytes) {
  TempDir tmp;
  for (const char* name : {"a.jsonl", "b.jsonl"}) {
    const auto r = run_cli({"gen-profiles", "-n", "1000", "--seed", "7", "--out",
                            (tmp / name).string()});
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_TRUE(contains(r.output, "wrote 1000 profiles"));
  }
  const std::string a = read_file(tmp / "a.jsonl");
  EXPECT_EQ(read_lines(tmp / "a.jsonl").size(), 1000u);
  EXPECT_EQ(a, read_file(tmp / "b.jsonl"));

  ASSERT_EQ(run_cli({"gen-profiles", "-n", "1000", "--seed", "8", "--out",
                     (tmp / "c.jsonl").string()})
                .exit_code,
            0);
  EXPECT_NE(a, read_file(tmp / "c.jsonl"));
}

TEST(CliGenProfiles, ChineseProfiles) {
  TempDir tmp;
  const auto r = run_cli({"gen-profiles", "--lang", "zh", "-n", "20", "--out",
                          (tmp / "p.jsonl").string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const Json first = Json::parse(read_lines(tmp / "p.jsonl").at(0));
  EXPECT_EQ(first["language_setting"], "zh");
}

TEST(CliGenProfiles, UsageErrorsExitTwo) {
  TempDir tmp;
  const std::string missing = (tmp / "no-such-catalogs").string();
  auto r = run_cli({"gen-profiles", "-n", "5", "--catalog-dir", missing, "--out",
                    (tmp / "p.jsonl").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(contains(r.output, missing)) << r.output;

  r = run_cli({"gen-profiles", "-n", "0", "--out", (tmp / "p.jsonl").string()});
  EXPECT_EQ(r.exit_code, 2) << r.output;

  r = run_cli({"frobnicate"});
  EXPECT_EQ(r.exit_code, 2);
}

TEST(CliConfig, FlagsOverrideFileOverrideDefaults) {
  TempDir tmp;
  write_file(tmp / "c.json", R"({"seed": 5, "n_users": 3})");
  const std::string cfg = (tmp / "c.json").string();

  ASSERT_EQ(run_cli({"gen-profiles", "--config", cfg, "--out",
                     (tmp / "from_file.jsonl").string()})
                .exit_code,
            0);
  ASSERT_EQ(run_cli({"gen-profiles", "--seed", "5", "-n", "3", "--out",
                     (tmp / "explicit5.jsonl").string()})
                .exit_code,
            0);
  EXPECT_EQ(read_file(tmp / "from_file.jsonl"), read_file(tmp / "explicit5.jsonl"));

  ASSERT_EQ(run_cli({"gen-profiles", "--config", cfg, "--seed", "9", "--out",
                     (tmp / "flag.jsonl").string()})
                .exit_code,
            0);
  ASSERT_EQ(run_cli({"gen-profiles", "--seed", "9", "-n", "3", "--out",
                     (tmp / "explicit9.jsonl").string()})
                .exit_code,
            0);
  EXPECT_EQ(read_file(tmp / "flag.jsonl"), read_file(tmp / "explicit9.jsonl"));
  EXPECT_NE(read_file(tmp / "flag.jsonl"), read_file(tmp / "from_file.jsonl"));

  // Default n_users applies when neither source sets it.
  ASSERT_EQ(run_cli({"gen-profiles", "--out", (tmp / "defaults.jsonl").string()})
                .exit_code,
            0);
  EXPECT_EQ(read_lines(tmp / "defaults.jsonl").size(), 100u);

  write_file(tmp / "bad.json", R"({"seeed": 5})");
  const auto r = run_cli({"gen-profiles", "--config", (tmp / "bad.json").string(),
                          "--out", (tmp / "x.jsonl").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(contains(r.output, "seeed")) << r.output;
}

TEST(CliSimulate, LiveModeWithoutKeyNamesVariable) {
  TempDir tmp;
  ASSERT_EQ(run_cli({"gen-profiles", "-n", "2", "--out", (tmp / "p.jsonl").string()})
                .exit_code,
            0);
  const auto r = run_cli({"simulate", (tmp / "p.jsonl").string(), "--out",
                          (tmp / "s.jsonl").string()},
                         "env -u BASES_LLM_API_KEY");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(contains(r.output, "BASES_LLM_API_KEY")) << r.output;
}

TEST(CliSimulate, MockModeNeedsBothFiles) {
  TempDir tmp;
  ASSERT_EQ(run_cli({"gen-profiles", "-n", "2", "--out", (tmp / "p.jsonl").string()})
                .exit_code,
            0);
  const auto r = run_cli({"simulate", (tmp / "p.jsonl").string(), "--backend",
                          "mock", "--out", (tmp / "s.jsonl").string()});
  EXPECT_EQ(r.exit_code, 2) << r.output;
}

TEST(CliSimulate, KilledRunLeavesOnlyCompleteLines) {
  TempDir tmp;
  ASSERT_EQ(run_cli({"gen-profiles", "-n", "200", "--out", (tmp / "p.jsonl").string()})
                .exit_code,
            0);
  const auto r = run_cli(concat({"simulate", (tmp / "p.jsonl").string(),
                                 "--concurrency", "1", "--mock-latency-ms", "20",
                                 "--out", (tmp / "s.jsonl").string()},
                                mock_flags()),
                         "timeout -s KILL 2");
  EXPECT_NE(r.exit_code, 0) << "run finished before the kill";
  const std::string text = read_file(tmp / "s.jsonl");
  const auto lines = read_lines(tmp / "s.jsonl");
  EXPECT_GE(lines.size(), 1u);
  EXPECT_LT(lines.size(), 200u);
  ASSERT_TRUE(text.empty() || text.back() == '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Json j = Json::parse(lines[i]);
    EXPECT_TRUE(j.contains("user_id")) << "line " << i + 1;
  }
}

TEST_F(Pipeline, BuildSplitsNinetyEightOneOne) {
  EXPECT_TRUE(contains(*build_log_, "train 98, valid 1, test 1")) << *build_log_;
  for (const char* f : {"train.jsonl", "valid.jsonl", "test.jsonl", "failures.jsonl",
                        "stats.json", "metadata.json"}) {
    EXPECT_TRUE(fs::exists(dir() / "ds" / f)) << f;
  }
  const Json meta = Json::parse(read_file(dir() / "ds" / "metadata.json"));
  EXPECT_EQ(meta["created_at"], "2024-01-01T00:00:00Z");
}

TEST_F(Pipeline, RebuildIsByteIdentical) {
  const auto r = run_cli({"build-dataset", (dir() / "sessions.jsonl").string(),
                          "--seed", "3", "--created-at", "2024-01-01T00:00:00Z",
                          "--out", (dir() / "ds2").string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (const auto& entry : fs::directory_iterator(dir() / "ds")) {
    const auto name = entry.path().filename();
    if (name == "report.json") continue;
    EXPECT_EQ(read_file(entry.path()), read_file(dir() / "ds2" / name)) << name;
  }
}

TEST_F(Pipeline, CorruptedSessionLineReportedWithLineNumber) {
  auto lines = read_lines(dir() / "sessions.jsonl");
  lines[2] = "{\"user_id\": \"broken\"";
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_file(dir() / "corrupt.jsonl", text);
  const auto r = run_cli({"build-dataset", (dir() / "corrupt.jsonl").string(),
                          "--out", (dir() / "ds_bad").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(contains(r.output, "corrupt.jsonl:3")) << r.output;
}

TEST_F(Pipeline, EvaluateIsDeterministic) {
  for (const char* name : {"r1.json", "r2.json"}) {
    const auto r = run_cli({"evaluate", (dir() / "ds").string(), "--split", "all",
                            "--out", (dir() / name).string()});
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_TRUE(contains(r.output, "MRR")) << r.output;
  }
  EXPECT_EQ(read_file(dir() / "r1.json"), read_file(dir() / "r2.json"));
  const Json report = Json::parse(read_file(dir() / "r1.json"));
  EXPECT_EQ(report["reports"].size(), 2u);
  EXPECT_EQ(report["ranker"], "bm25");
}

TEST_F(Pipeline, EvaluateRejectsShortScoresFile) {
  write_file(dir() / "scores.jsonl", "[1.0, 0.5]\n");
  const auto r = run_cli({"evaluate", (dir() / "ds").string(), "--split", "all",
                          "--task", "click_prediction", "--scores",
                          (dir() / "scores.jsonl").string(), "--out",
                          (dir() / "r3.json").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(contains(r.output, "error:")) << r.output;
}

TEST_F(Pipeline, EvaluateRefusesInvalidDataset) {
  fs::create_directories(dir() / "ds_broken");
  for (const auto& entry : fs::directory_iterator(dir() / "ds")) {
    fs::copy_file(entry.path(), dir() / "ds_broken" / entry.path().filename(),
                  fs::copy_options::overwrite_existing);
  }
  fs::remove(dir() / "ds_broken" / "valid.jsonl");
  write_file(dir() / "ds_broken" / "valid.jsonl", "");
  const auto r = run_cli({"evaluate", (dir() / "ds_broken").string(), "--out",
                          (dir() / "r4.json").string()});
  EXPECT_NE(r.exit_code, 0);
  EXPECT_TRUE(contains(r.output, "invalid")) << r.output;
}

TEST(CliEvaluate, SessionSearchNeedsMultiRoundSessions) {
  TempDir tmp;
  ASSERT_EQ(run_cli({"gen-profiles", "-n", "20", "--out", (tmp / "p.jsonl").string()})
                .exit_code,
            0);
  auto r = run_cli(concat({"simulate", (tmp / "p.jsonl").string(), "--max-rounds",
                           "1", "--out", (tmp / "s.jsonl").string()},
                          mock_flags()));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  r = run_cli({"build-dataset", (tmp / "s.jsonl").string(), "--created-at", "x",
               "--out", (tmp / "ds").string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  r = run_cli({"evaluate", (tmp / "ds").string(), "--split", "all", "--task",
               "session_search", "--out", (tmp / "r.json").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(contains(r.output, "at least two rounds")) << r.output;
  r = run_cli({"evaluate", (tmp / "ds").string(), "--split", "all", "--task",
               "click_prediction", "--out", (tmp / "r.json").string()});
  EXPECT_EQ(r.exit_code, 0) << r.output;
}

TEST(CliConsistency, AllThreeModes) {
  TempDir tmp;
  write_file(tmp / "q.jsonl",
             "{\"human\": \"bollywood growth\", \"agent\": \"growth of bollywood\"}\n"
             "{\"human\": \"cheap flights\", \"agent\": \"flights cheap\"}\n");
  auto r = run_cli({"consistency", (tmp / "q.jsonl").string(), "--mode",
                    "query_overlap", "--out", (tmp / "o.json").string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(contains(r.output, "query_overlap: 1.00 over 2 pairs")) << r.output;
  EXPECT_EQ(Json::parse(read_file(tmp / "o.json"))["value"], 1.0);

  write_file(tmp / "c.jsonl", "{\"human\": 1, \"agent\": 1}\n{\"human\": 3, \"agent\": 3}\n");
  r = run_cli({"consistency", (tmp / "c.jsonl").string(), "--mode", "click_accuracy"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(contains(r.output, "click_accuracy: 1.00 over 2 pairs")) << r.output;

  write_file(tmp / "judge.jsonl", "{\"match\": \"Agent query\", \"response\": \"YES\"}\n");
  r = run_cli({"consistency", (tmp / "q.jsonl").string(), "--mode", "llm_judge",
               "--backend", "mock", "--llm-script", (tmp / "judge.jsonl").string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(contains(r.output, "llm_judge: 1.00 over 2 pairs")) << r.output;

  write_file(tmp / "bad.jsonl", "{\"human\": \"a\", \"agent\": \"b\"}\n{\"human\": 1}\n");
  r = run_cli({"consistency", (tmp / "bad.jsonl").string(), "--mode", "query_overlap"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(contains(r.output, "bad.jsonl:2")) << r.output;
}

TEST(CliBinary, HelpListsSubcommands) {
  ASSERT_TRUE(fs::exists(cli_path()));
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.exit_code, 0);
  for (const char* sub : {"gen-profiles", "simulate", "build-dataset", "evaluate",
                          "consistency"}) {
    EXPECT_TRUE(contains(r.output, sub)) << sub;
  }
}
