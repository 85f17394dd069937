#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bases/json.hpp"

#include "bases/rng.hpp"
#include "bases/text.hpp"

namespace bases {

class LlmClient;

inline constexpr std::array<std::string_view, 8> kProfileAttributes = {
    "age",         "gender",   "education", "career",
    "personality", "interest", "location",  "wealth"};
inline constexpr std::array<std::string_view, 3> kStaticAttributes = {
    "age", "gender", "personality"};
inline constexpr std::array<std::string_view, 5> kDynamicAttributes = {
    "education", "career", "interest", "location", "wealth"};

inline constexpr int kMinAge = 6;
inline constexpr int kMaxAge = 90;

inline constexpr std::array<std::string_view, 3> kWealthLevels = {
    "low income", "middle income", "high income"};

enum class SamplingMode { kUniform, kCoarseToFine, kWeighted };

std::string_view sampling_mode_name(SamplingMode mode);

struct CatalogEntry {
  std::string category;
  std::vector<std::string> values;
  double weight = 1.0;
};

struct CatalogPick {
  std::string category;
  std::string value;
};

// Candidate values for one profile attribute.
//
//   uniform        every fine value across all entries is equally likely
//   coarse_to_fine pick an entry by weight (default weights make this
//                  uniform over coarse categories), then a fine value
//                  uniformly inside it
//   weighted       same mechanics as coarse_to_fine; used for attributes
//                  whose entry weights encode a real-world distribution
class AttributeCatalog {
 public:
  using Filter = std::function<bool(const CatalogPick&)>;

  AttributeCatalog() = default;
  AttributeCatalog(std::string attribute, SamplingMode mode,
                   std::vector<CatalogEntry> entries);

  const std::string& attribute() const { return attribute_; }
  SamplingMode mode() const { return mode_; }
  const std::vector<CatalogEntry>& entries() const { return entries_; }

  CatalogPick sample(Rng& rng) const;
  // Samples from the subset of (category, value) pairs accepted by
  // `keep`, preserving the catalog's sampling mode over that subset.
  std::optional<CatalogPick> sample_where(Rng& rng, const Filter& keep) const;

  // Category for a fine value, or for a category name used as a value.
  // Case-insensitive; nullopt when unknown.
  std::optional<std::string> category_of(std::string_view value) const;
  bool has_category(std::string_view category) const;

 private:
  std::string attribute_;
  SamplingMode mode_ = SamplingMode::kUniform;
  std::vector<CatalogEntry> entries_;
};

using CatalogSet = std::map<std::string, AttributeCatalog, std::less<>>;

// Loads `<catalog_dir>/<lang>/<attribute>.json` for all eight attributes.
// Throws LoadError naming the offending file (and line where possible).
CatalogSet load_catalogs(const std::filesystem::path& catalog_dir,
                         Language lang);
// Parses and validates a single catalog document. `source` is used in
// error messages.
AttributeCatalog parse_catalog(std::string_view text,
                               std::string_view expected_attribute,
                               const std::string& source);

struct AttributeOrigin {
  std::string category;
  // uniform | coarse_to_fine | weighted | llm | repaired
  std::string method;

  bool operator==(const AttributeOrigin&) const = default;
};

struct UserProfile {
  std::string user_id;
  int age = 0;
  std::string gender;
  std::string education;
  std::string career;
  std::string personality;
  std::string interest;
  std::string location;
  std::string wealth;
  Language language = Language::kEnglish;
  std::map<std::string, AttributeOrigin> provenance;

  // Value of an attribute by name ("age" rendered as decimal).
  std::string get(std::string_view attribute) const;
  std::string category(std::string_view attribute) const;

  // Attribute tuple used for duplicate detection (excludes user_id).
  std::string attribute_key() const;

  bool operator==(const UserProfile&) const = default;
};

Json to_json(const UserProfile& profile);
UserProfile profile_from_json(const Json& j);
std::vector<UserProfile> read_profiles_jsonl(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Contradiction rules

enum class RuleKind { kAgeCareer, kAgeEducation, kCareerEducation };

std::string_view rule_kind_name(RuleKind kind);

// Matches an attribute by coarse category and/or fine value. Empty
// `categories` and `values` mean "any"; `exclude_categories` always wins.
struct AttributeMatch {
  std::vector<std::string> categories;
  std::vector<std::string> values;
  std::vector<std::string> exclude_categories;

  bool matches(std::string_view category, std::string_view value) const;
};

struct ContradictionRule {
  std::string id;
  RuleKind kind = RuleKind::kAgeCareer;
  AttributeMatch career;
  AttributeMatch education;
  std::optional<int> min_age;
  std::optional<int> max_age;
  std::optional<std::string> min_education;
  std::optional<std::string> max_education;

  bool involves_career() const { return kind != RuleKind::kAgeEducation; }
  bool involves_education() const { return kind != RuleKind::kAgeCareer; }
};

class RuleSet {
 public:
  RuleSet() = default;
  RuleSet(std::vector<std::string> education_levels,
          std::vector<ContradictionRule> rules);

  const std::vector<ContradictionRule>& rules() const { return rules_; }
  const std::vector<std::string>& education_levels() const {
    return education_levels_;
  }

  bool satisfied(const ContradictionRule& rule,
                 const UserProfile& profile) const;
  const ContradictionRule* first_violation(const UserProfile& profile) const;
  std::vector<const ContradictionRule*> violations(
      const UserProfile& profile) const;

 private:
  // Position of an education category in the ascending level list, or
  // nullopt when the level is unknown.
  std::optional<std::size_t> level_rank(std::string_view category) const;

  std::vector<std::string> education_levels_;
  std::vector<ContradictionRule> rules_;
};

RuleSet parse_rules(const Json& doc, const std::string& source);
RuleSet load_rules(const std::filesystem::path& path);
// The shipped rule table, also written to data/catalogs/rules.json.
const RuleSet& default_rules();

// ---------------------------------------------------------------------------
// Synthesis

struct SynthesisOptions {
  int max_repair_iters = 20;
};

// Resamples career (first) and education until no rule is violated.
// Static attributes are never touched. Throws SamplingError carrying the
// last violated rule when the budget runs out.
UserProfile repair_contradictions(UserProfile profile, const RuleSet& rules,
                                  const CatalogSet& catalogs, Rng& rng,
                                  const SynthesisOptions& options = {});

std::string default_user_id(std::uint64_t seed);

UserProfile sample_profile(const CatalogSet& catalogs, const RuleSet& rules,
                           std::uint64_t seed, Language lang,
                           const SynthesisOptions& options = {});

struct ProfileBatch {
  std::vector<UserProfile> profiles;
  // Profiles whose full attribute tuple repeats an earlier profile.
  std::size_t duplicate_tuples = 0;
};

// Per-user seed for index i is derive_seed(master_seed, i).
ProfileBatch generate_batch(const CatalogSet& catalogs, const RuleSet& rules,
                            std::size_t n, std::uint64_t master_seed,
                            Language lang, const SynthesisOptions& options = {});

struct ContextOptions {
  int parse_retries = 3;
  SynthesisOptions synthesis;
};

// Prompt sent to the LLM when deriving a profile from real-data context.
std::string render_profile_prompt(std::string_view context_text,
                                  Language lang);

// Fields recovered from an LLM reply; absent ones are nullopt.
struct ParsedProfileFields {
  std::optional<int> age;
  std::map<std::string, std::string> text;  // attribute -> value
  std::size_t recognized = 0;
};
ParsedProfileFields parse_profile_block(std::string_view raw);

// Real-data based generation: asks the LLM for all eight attributes,
// back-fills what is missing from a synthesized profile and repairs
// contradictions. `seed` drives the back-fill and repair.
UserProfile profile_from_context(LlmClient& llm, std::string_view context_text,
                                 Language lang, const CatalogSet& catalogs,
                                 const RuleSet& rules, std::uint64_t seed,
                                 const ContextOptions& options = {});

}  // namespace bases
