#include <algorithm>
#include <fstream>

#include "bases/errors.hpp"
#include "bases/profiles.hpp"

namespace bases {

using json = Json;

namespace {

bool contains(const std::vector<std::string>& list, std::string_view item) {
  return std::find(list.begin(), list.end(), item) != list.end();
}

std::vector<std::string> string_list(const json& obj, const char* key,
                                     const std::string& where) {
  std::vector<std::string> out;
  const auto it = obj.find(key);
  if (it == obj.end()) return out;
  if (!it->is_array()) throw ConfigError(where + ": '" + key + "' must be a list");
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ConfigError(where + ": '" + key + "' must contain strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

AttributeMatch parse_match(const json& rule, const char* key,
                           const std::string& where) {
  AttributeMatch m;
  const auto it = rule.find(key);
  if (it == rule.end()) return m;
  if (!it->is_object()) throw ConfigError(where + ": '" + key + "' must be an object");
  m.categories = string_list(*it, "categories", where);
  m.values = string_list(*it, "values", where);
  m.exclude_categories = string_list(*it, "exclude_categories", where);
  return m;
}

RuleKind parse_kind(const std::string& name, const std::string& where) {
  if (name == "age-career") return RuleKind::kAgeCareer;
  if (name == "age-education") return RuleKind::kAgeEducation;
  if (name == "career-education") return RuleKind::kCareerEducation;
  throw ConfigError(where + ": unknown rule kind '" + name + "'");
}

bool age_within(const ContradictionRule& rule, int age) {
  if (rule.min_age && age < *rule.min_age) return false;
  if (rule.max_age && age > *rule.max_age) return false;
  return true;
}

}  // namespace

std::string_view rule_kind_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::kAgeCareer:
      return "age-career";
    case RuleKind::kAgeEducation:
      return "age-education";
    case RuleKind::kCareerEducation:
      return "career-education";
  }
  return "age-career";
}

bool AttributeMatch::matches(std::string_view category,
                             std::string_view value) const {
  if (!category.empty() && contains(exclude_categories, category)) return false;
  if (categories.empty() && values.empty()) return true;
  return (!category.empty() && contains(categories, category)) ||
         contains(values, value);
}

RuleSet::RuleSet(std::vector<std::string> education_levels,
                 std::vector<ContradictionRule> rules)
    : education_levels_(std::move(education_levels)),
      rules_(std::move(rules)) {}

std::optional<std::size_t> RuleSet::level_rank(
    std::string_view category) const {
  const auto it =
      std::find(education_levels_.begin(), education_levels_.end(), category);
  if (it == education_levels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - education_levels_.begin());
}

bool RuleSet::satisfied(const ContradictionRule& rule,
                        const UserProfile& profile) const {
  switch (rule.kind) {
    case RuleKind::kAgeCareer:
      if (!rule.career.matches(profile.category("career"), profile.career)) {
        return true;
      }
      return age_within(rule, profile.age);
    case RuleKind::kAgeEducation:
      if (!rule.education.matches(profile.category("education"),
                                  profile.education)) {
        return true;
      }
      return age_within(rule, profile.age);
    case RuleKind::kCareerEducation: {
      if (!rule.career.matches(profile.category("career"), profile.career)) {
        return true;
      }
      // An education level outside the known ladder cannot be shown to
      // meet a bound, so it counts as a violation.
      const auto rank = level_rank(profile.category("education"));
      if (rule.min_education) {
        const auto need = level_rank(*rule.min_education);
        if (!rank || (need && *rank < *need)) return false;
      }
      if (rule.max_education) {
        const auto cap = level_rank(*rule.max_education);
        if (!rank || (cap && *rank > *cap)) return false;
      }
      return true;
    }
  }
  return true;
}

const ContradictionRule* RuleSet::first_violation(
    const UserProfile& profile) const {
  for (const auto& rule : rules_) {
    if (!satisfied(rule, profile)) return &rule;
  }
  return nullptr;
}

std::vector<const ContradictionRule*> RuleSet::violations(
    const UserProfile& profile) const {
  std::vector<const ContradictionRule*> out;
  for (const auto& rule : rules_) {
    if (!satisfied(rule, profile)) out.push_back(&rule);
  }
  return out;
}

RuleSet parse_rules(const json& doc, const std::string& source) {
  if (!doc.is_object()) throw ConfigError(source + ": rules must be an object");
  auto levels = string_list(doc, "education_levels", source);
  const auto it = doc.find("rules");
  if (it == doc.end() || !it->is_array()) {
    throw ConfigError(source + ": missing 'rules' array");
  }
  std::vector<ContradictionRule> rules;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& r = (*it)[i];
    const std::string where = source + " rule " + std::to_string(i + 1);
    if (!r.is_object()) throw ConfigError(where + ": must be an object");
    ContradictionRule rule;
    rule.id = r.value("id", "rule-" + std::to_string(i + 1));
    rule.kind = parse_kind(r.value("kind", ""), where);
    rule.career = parse_match(r, "career", where);
    rule.education = parse_match(r, "education", where);
    if (r.contains("min_age")) rule.min_age = r.at("min_age").get<int>();
    if (r.contains("max_age")) rule.max_age = r.at("max_age").get<int>();
    if (r.contains("min_education")) {
      rule.min_education = r.at("min_education").get<std::string>();
    }
    if (r.contains("max_education")) {
      rule.max_education = r.at("max_education").get<std::string>();
    }
    for (const auto* bound : {&rule.min_education, &rule.max_education}) {
      if (*bound && !contains(levels, **bound)) {
        throw ConfigError(where + ": education level '" + **bound +
                          "' is not in education_levels");
      }
    }
    if (rule.kind == RuleKind::kCareerEducation && !rule.min_education &&
        !rule.max_education) {
      throw ConfigError(where + ": career-education rule needs a bound");
    }
    if (rule.kind != RuleKind::kCareerEducation && !rule.min_age &&
        !rule.max_age) {
      throw ConfigError(where + ": age rule needs min_age or max_age");
    }
    rules.push_back(std::move(rule));
  }
  return RuleSet(std::move(levels), std::move(rules));
}

RuleSet load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open rules file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError(path.string(), 0, std::string("malformed JSON: ") + e.what());
  }
  try {
    return parse_rules(doc, path.string());
  } catch (const json::exception& e) {
    throw LoadError(path.string(), 0, e.what());
  }
}

}  // namespace bases
