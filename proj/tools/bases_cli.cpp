// Command-line entry point: gen-profiles, simulate, build-dataset,
// evaluate, consistency.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "bases/commands.hpp"
#include "bases/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

template <typename T>
void overlay(T& target, const std::optional<T>& flag) {
  if (flag) target = *flag;
}

struct Flags {
  std::optional<std::string> lang;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
  std::optional<std::string> out;

  std::optional<std::size_t> n_users;
  std::optional<std::string> catalog_dir;
  std::optional<std::string> rules;

  std::optional<std::string> backend;
  std::optional<std::string> corpus;
  std::optional<std::string> llm_script;
  std::optional<int> mock_latency_ms;
  std::optional<int> max_rounds;
  std::optional<int> concurrency;
  std::optional<int> parse_retries;
  std::optional<std::string> llm_endpoint;
  std::optional<std::string> llm_model;
  std::optional<std::string> search_endpoint;

  std::optional<std::string> created_at;
  std::optional<std::string> search_backend;
};

bases::RunConfig resolve_config(const Flags& f) {
  bases::RunConfig c;
  if (f.config) bases::apply_config_file(c, *f.config);
  if (f.lang) c.language = bases::parse_language(*f.lang);
  overlay(c.master_seed, f.seed);
  if (f.out) c.output = *f.out;
  overlay(c.n_users, f.n_users);
  if (f.catalog_dir) c.catalog_dir = *f.catalog_dir;
  if (f.rules) c.rules_path = *f.rules;
  if (f.backend) {
    if (*f.backend == "mock") {
      c.backend_mode = bases::BackendMode::kMock;
    } else if (*f.backend == "live") {
      c.backend_mode = bases::BackendMode::kLive;
    } else {
      throw bases::ConfigError("--backend must be live or mock");
    }
  }
  if (f.corpus) c.corpus_path = *f.corpus;
  if (f.llm_script) c.llm_script_path = *f.llm_script;
  overlay(c.mock_latency_ms, f.mock_latency_ms);
  overlay(c.max_rounds, f.max_rounds);
  overlay(c.concurrency_limit, f.concurrency);
  overlay(c.parse_retries, f.parse_retries);
  overlay(c.llm.endpoint, f.llm_endpoint);
  overlay(c.llm.model, f.llm_model);
  overlay(c.search.endpoint, f.search_endpoint);
  overlay(c.created_at, f.created_at);
  overlay(c.search_backend, f.search_backend);
  return c;
}

void add_backend_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--backend", f.backend, "live or mock")
      ->check(CLI::IsMember({"live", "mock"}));
  cmd->add_option("--corpus", f.corpus, "mock search corpus (JSONL)");
  cmd->add_option("--llm-script", f.llm_script,
                  "mock LLM script (JSONL of {match, response})");
  cmd->add_option("--mock-latency-ms", f.mock_latency_ms,
                  "artificial delay per mock LLM call");
  cmd->add_option("--llm-endpoint", f.llm_endpoint,
                  "OpenAI-compatible base URL");
  cmd->add_option("--llm-model", f.llm_model, "model identifier");
  cmd->add_option("--parse-retries", f.parse_retries,
                  "LLM calls per prompt before giving up");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Web search user simulation: profiles, sessions, datasets, "
               "evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--lang", f.lang, "language setting: en or zh")
      ->check(CLI::IsMember({"en", "zh", "english", "chinese"}));
  app.add_option("--seed", f.seed, "master seed");
  app.add_option("--config", f.config, "JSON config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output file or directory");

  auto* gen = app.add_subcommand("gen-profiles", "synthesize user profiles");
  gen->add_option("-n,--n-users", f.n_users, "number of profiles");
  gen->add_option("--catalog-dir", f.catalog_dir, "attribute catalog root");
  gen->add_option("--rules", f.rules, "contradiction rules file");

  std::string profiles_path;
  auto* sim = app.add_subcommand("simulate", "run search sessions");
  sim->add_option("profiles", profiles_path, "profiles JSONL")->required();
  add_backend_flags(sim, f);
  sim->add_option("--max-rounds", f.max_rounds, "query rounds per session");
  sim->add_option("--concurrency", f.concurrency, "sessions in flight");
  sim->add_option("--search-endpoint", f.search_endpoint, "search API URL");

  std::string sessions_path;
  auto* build = app.add_subcommand("build-dataset", "split sessions into a dataset");
  build->add_option("sessions", sessions_path, "sessions JSONL")->required();
  build->add_option("--created-at", f.created_at,
                    "metadata timestamp (default: SOURCE_DATE_EPOCH or now)");
  build->add_option("--search-backend", f.search_backend,
                    "search backend recorded in the metadata");
  build->add_option("--corpus", f.corpus, "mock corpus used for simulation");

  std::string dataset_dir;
  std::string task = "both";
  bases::EvaluateOptions eval_opts;
  std::string scores_path;
  auto* eval = app.add_subcommand("evaluate", "rank and score a dataset");
  eval->add_option("dataset", dataset_dir, "dataset directory")->required();
  eval->add_option("--task", task, "session_search, click_prediction or both")
      ->check(CLI::IsMember({"session_search", "click_prediction", "both"}));
  eval->add_option("--ranker", eval_opts.ranker, "bm25 or random")
      ->check(CLI::IsMember({"bm25", "random"}));
  eval->add_option("--scores", scores_path,
                   "external scores (JSONL, one list per instance)");
  eval->add_option("--split", eval_opts.split, "train, valid, test or all")
      ->check(CLI::IsMember({"train", "valid", "test", "all"}));

  std::string pairs_path;
  std::string mode;
  auto* cons = app.add_subcommand("consistency", "agent vs. human consistency");
  cons->add_option("pairs", pairs_path, "pairs JSONL of {human, agent}")
      ->required();
  cons->add_option("--mode", mode, "query_overlap, click_accuracy or llm_judge")
      ->required()
      ->check(CLI::IsMember({"query_overlap", "click_accuracy", "llm_judge"}));
  add_backend_flags(cons, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const bases::RunConfig config = resolve_config(f);
    if (*gen) {
      bases::cmd_gen_profiles(config, std::cout);
      return kExitOk;
    }
    if (*sim) {
      bases::cmd_simulate(config, profiles_path, std::cout);
      return kExitOk;
    }
    if (*build) {
      const auto report = bases::cmd_build_dataset(config, sessions_path, std::cout);
      return report.ok() ? kExitOk : kExitFailure;
    }
    if (*eval) {
      if (task != "both") eval_opts.tasks = {bases::parse_task(task)};
      eval_opts.scores_path = scores_path;
      bases::cmd_evaluate(config, dataset_dir, eval_opts, std::cout);
      return kExitOk;
    }
    if (*cons) {
      bases::cmd_consistency(config, pairs_path,
                             bases::parse_consistency_mode(mode), std::cout);
      return kExitOk;
    }
  } catch (const bases::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bases::LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bases::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
