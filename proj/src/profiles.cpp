#include "bases/profiles.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "bases/backends.hpp"
#include "bases/errors.hpp"

namespace bases {
namespace {

const AttributeCatalog& catalog_for(const CatalogSet& catalogs,
                                    std::string_view attribute) {
  const auto it = catalogs.find(attribute);
  if (it == catalogs.end()) {
    throw ConfigError("no catalog loaded for attribute '" +
                      std::string(attribute) + "'");
  }
  return it->second;
}

template <typename Profile>
auto text_field(Profile& p, std::string_view attribute) -> decltype(&p.gender) {
  if (attribute == "gender") return &p.gender;
  if (attribute == "education") return &p.education;
  if (attribute == "career") return &p.career;
  if (attribute == "personality") return &p.personality;
  if (attribute == "interest") return &p.interest;
  if (attribute == "location") return &p.location;
  if (attribute == "wealth") return &p.wealth;
  return nullptr;
}

void assign(UserProfile& p, std::string_view attribute, const CatalogPick& pick,
            std::string method) {
  if (attribute == "age") {
    p.age = std::stoi(pick.value);
  } else {
    *text_field(p, attribute) = pick.value;
  }
  p.provenance[std::string(attribute)] = {pick.category, std::move(method)};
}

bool rules_hold(const RuleSet& rules, const UserProfile& p,
                bool (ContradictionRule::*involves)() const) {
  for (const auto& rule : rules.rules()) {
    if ((rule.*involves)() && !rules.satisfied(rule, p)) return false;
  }
  return true;
}

bool age_education_rules_hold(const RuleSet& rules, const UserProfile& p) {
  for (const auto& rule : rules.rules()) {
    if (rule.kind == RuleKind::kAgeEducation && !rules.satisfied(rule, p)) {
      return false;
    }
  }
  return true;
}

// Candidate filter: would the profile with `attribute` set to `pick` pass
// the given check?
AttributeCatalog::Filter candidate_filter(
    const UserProfile& base, std::string_view attribute,
    std::function<bool(const UserProfile&)> check) {
  return [base, attribute, check = std::move(check)](const CatalogPick& pick) {
    UserProfile trial = base;
    *text_field(trial, attribute) = pick.value;
    trial.provenance[std::string(attribute)].category = pick.category;
    return check(trial);
  };
}

bool resample_career(UserProfile& p, const RuleSet& rules,
                     const AttributeCatalog& careers, Rng& rng) {
  auto pick = careers.sample_where(
      rng, candidate_filter(p, "career", [&](const UserProfile& t) {
        return rules_hold(rules, t, &ContradictionRule::involves_career);
      }));
  if (!pick) return false;
  assign(p, "career", *pick, "repaired");
  return true;
}

bool resample_education(UserProfile& p, const RuleSet& rules,
                        const AttributeCatalog& levels, Rng& rng,
                        bool respect_career) {
  auto pick = levels.sample_where(
      rng, candidate_filter(p, "education", [&](const UserProfile& t) {
        if (respect_career) {
          return rules_hold(rules, t, &ContradictionRule::involves_education);
        }
        return age_education_rules_hold(rules, t);
      }));
  if (!pick) return false;
  assign(p, "education", *pick, "repaired");
  return true;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::optional<std::string> normalize_wealth(std::string_view value) {
  const std::string lower = to_lower_ascii(value);
  auto has = [&](std::string_view needle) {
    return lower.find(needle) != std::string::npos;
  };
  if (has("low") || has("低") || has("贫")) return std::string(kWealthLevels[0]);
  if (has("high") || has("高") || has("富")) return std::string(kWealthLevels[2]);
  if (has("middle") || has("mid") || has("中")) {
    return std::string(kWealthLevels[1]);
  }
  return std::nullopt;
}

std::optional<std::string_view> canonical_key(std::string key) {
  key = to_lower_ascii(trim(key));
  static const std::pair<std::string_view, std::string_view> kAliases[] = {
      {"age", "age"},           {"年龄", "age"},
      {"gender", "gender"},     {"sex", "gender"},
      {"性别", "gender"},       {"education", "education"},
      {"教育", "education"},    {"学历", "education"},
      {"教育程度", "education"}, {"career", "career"},
      {"occupation", "career"}, {"job", "career"},
      {"职业", "career"},       {"personality", "personality"},
      {"性格", "personality"},  {"interest", "interest"},
      {"interests", "interest"}, {"兴趣", "interest"},
      {"location", "location"}, {"city", "location"},
      {"地点", "location"},     {"所在地", "location"},
      {"城市", "location"},     {"wealth", "wealth"},
      {"income", "wealth"},     {"财富", "wealth"},
      {"收入", "wealth"},       {"财富状况", "wealth"},
  };
  for (const auto& [alias, name] : kAliases) {
    if (key == alias) return name;
  }
  return std::nullopt;
}

std::string strip_markup(std::string_view s) {
  std::string out = trim(s);
  auto strip_edges = [&](std::string_view chars) {
    while (!out.empty() && chars.find(out.front()) != std::string_view::npos) {
      out.erase(out.begin());
    }
    while (!out.empty() && chars.find(out.back()) != std::string_view::npos) {
      out.pop_back();
    }
    out = trim(out);
  };
  strip_edges("-*`\"' ");
  return out;
}

}  // namespace

std::string UserProfile::get(std::string_view attribute) const {
  if (attribute == "age") return std::to_string(age);
  if (attribute == "user_id") return user_id;
  if (const auto* field = text_field(*this, attribute)) return *field;
  return {};
}

std::string UserProfile::category(std::string_view attribute) const {
  const auto it = provenance.find(std::string(attribute));
  return it == provenance.end() ? std::string() : it->second.category;
}

std::string UserProfile::attribute_key() const {
  std::string key;
  for (auto attribute : kProfileAttributes) {
    key += get(attribute);
    key += '\x1f';
  }
  return key;
}

Json to_json(const UserProfile& p) {
  Json j;
  j["user_id"] = p.user_id;
  for (auto attribute : kProfileAttributes) {
    if (attribute == "age") {
      j["age"] = p.age;
    } else {
      j[std::string(attribute)] = p.get(attribute);
    }
  }
  j["static_attrs"] = Json::array();
  for (auto a : kStaticAttributes) j["static_attrs"].push_back(a);
  j["dynamic_attrs"] = Json::array();
  for (auto a : kDynamicAttributes) j["dynamic_attrs"].push_back(a);
  j["language_setting"] = language_code(p.language);
  Json prov = Json::object();
  for (auto attribute : kProfileAttributes) {
    const auto it = p.provenance.find(std::string(attribute));
    if (it == p.provenance.end()) continue;
    prov[std::string(attribute)] = {{"category", it->second.category},
                                    {"method", it->second.method}};
  }
  j["provenance"] = std::move(prov);
  return j;
}

UserProfile profile_from_json(const Json& j) {
  UserProfile p;
  p.user_id = j.at("user_id").get<std::string>();
  p.age = j.at("age").get<int>();
  for (auto attribute : kProfileAttributes) {
    if (attribute == "age") continue;
    *text_field(p, attribute) = j.at(std::string(attribute)).get<std::string>();
  }
  p.language = parse_language(j.at("language_setting").get<std::string>());
  if (const auto it = j.find("provenance"); it != j.end()) {
    for (const auto& [attribute, origin] : it->items()) {
      p.provenance[attribute] = {origin.value("category", ""),
                                 origin.value("method", "")};
    }
  }
  return p;
}

std::vector<UserProfile> read_profiles_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open profiles file");
  std::vector<UserProfile> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(profile_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw LoadError(path.string(), line_no, e.what());
    } catch (const ConfigError& e) {
      throw LoadError(path.string(), line_no, e.what());
    }
  }
  return out;
}

UserProfile repair_contradictions(UserProfile profile, const RuleSet& rules,
                                  const CatalogSet& catalogs, Rng& rng,
                                  const SynthesisOptions& options) {
  const ContradictionRule* violated = rules.first_violation(profile);
  if (!violated) return profile;
  const auto& careers = catalog_for(catalogs, "career");
  const auto& levels = catalog_for(catalogs, "education");

  for (int pass = 0; pass < options.max_repair_iters && violated; ++pass) {
    bool progressed;
    if (violated->involves_career()) {
      // Career first; if no career fits the current education, move the
      // education and let the next pass pick a career again.
      progressed = resample_career(profile, rules, careers, rng) ||
                   resample_education(profile, rules, levels, rng, false);
    } else {
      progressed = resample_education(profile, rules, levels, rng, true) ||
                   resample_education(profile, rules, levels, rng, false);
    }
    if (!progressed) break;
    violated = rules.first_violation(profile);
  }
  if (violated) {
    throw SamplingError("profile " + profile.user_id + " (age " +
                        std::to_string(profile.age) +
                        ") still violates rule '" + violated->id + "' (" +
                        std::string(rule_kind_name(violated->kind)) +
                        ") after " + std::to_string(options.max_repair_iters) +
                        " repair passes");
  }
  return profile;
}

std::string default_user_id(std::uint64_t seed) { return "u" + hex64(seed); }

UserProfile sample_profile(const CatalogSet& catalogs, const RuleSet& rules,
                           std::uint64_t seed, Language lang,
                           const SynthesisOptions& options) {
  Rng rng(seed);
  UserProfile p;
  p.user_id = default_user_id(seed);
  p.language = lang;
  // Static attributes first, then dynamic ones.
  for (auto attribute : {"age", "gender", "personality", "education", "career",
                         "interest", "location", "wealth"}) {
    const auto& catalog = catalog_for(catalogs, attribute);
    assign(p, attribute, catalog.sample(rng),
           std::string(sampling_mode_name(catalog.mode())));
  }
  return repair_contradictions(std::move(p), rules, catalogs, rng, options);
}

ProfileBatch generate_batch(const CatalogSet& catalogs, const RuleSet& rules,
                            std::size_t n, std::uint64_t master_seed,
                            Language lang, const SynthesisOptions& options) {
  if (n == 0) throw PreconditionError("profile batch size must be >= 1");
  ProfileBatch batch;
  batch.profiles.reserve(n);
  std::unordered_set<std::string> ids;
  std::unordered_set<std::string> tuples;
  for (std::size_t i = 0; i < n; ++i) {
    UserProfile p;
    try {
      p = sample_profile(catalogs, rules, derive_seed(master_seed, i), lang,
                         options);
    } catch (const SamplingError& e) {
      throw SamplingError("profile index " + std::to_string(i) + ": " +
                          e.what());
    }
    if (!ids.insert(p.user_id).second) {
      throw SamplingError("profile index " + std::to_string(i) +
                          ": duplicate user_id " + p.user_id);
    }
    if (!tuples.insert(p.attribute_key()).second) ++batch.duplicate_tuples;
    batch.profiles.push_back(std::move(p));
  }
  return batch;
}

std::string render_profile_prompt(std::string_view context_text,
                                  Language lang) {
  std::string prompt;
  if (lang == Language::kChinese) {
    prompt =
        "请根据下面的真实用户数据，推断该数据所描述的网络搜索用户的档案。"
        "请在一个代码块（```）中输出全部八个属性，每行一个“键: 值”，"
        "键必须使用以下英文名称：age, gender, education, career, "
        "personality, interest, location, wealth。age 必须是 6 到 90 "
        "之间的整数；wealth 必须是 low income、middle income、high income "
        "之一。\n\n** 用户数据 **\n";
  } else {
    prompt =
        "Based on the real user data below, infer the profile of the web "
        "search user it describes. Output all eight attributes inside one "
        "fenced block (```), one `key: value` pair per line, using exactly "
        "these keys: age, gender, education, career, personality, interest, "
        "location, wealth. The age must be an integer between 6 and 90; the "
        "wealth must be one of low income, middle income, high income.\n\n"
        "** User data **\n";
  }
  prompt += context_text;
  prompt += lang == Language::kChinese ? "\n\n** 用户档案 **\n"
                                       : "\n\n** Profile **\n";
  return prompt;
}

ParsedProfileFields parse_profile_block(std::string_view raw) {
  std::string_view body = raw;
  if (const auto open = raw.find("```"); open != std::string_view::npos) {
    auto start = raw.find('\n', open);
    const auto close = raw.find("```", open + 3);
    if (start != std::string_view::npos &&
        (close == std::string_view::npos || start < close)) {
      ++start;
      body = raw.substr(start, close == std::string_view::npos
                                   ? std::string_view::npos
                                   : close - start);
    }
  }

  ParsedProfileFields fields;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto end = body.find('\n', pos);
    if (end == std::string_view::npos) end = body.size();
    const std::string_view line = body.substr(pos, end - pos);
    pos = end + 1;

    std::size_t sep = std::string_view::npos, sep_len = 1;
    for (std::string_view s : {":", "：", "="}) {
      const auto at = line.find(s);
      if (at != std::string_view::npos && at < sep) {
        sep = at;
        sep_len = s.size();
      }
    }
    if (sep == std::string_view::npos) continue;
    const auto key = canonical_key(strip_markup(line.substr(0, sep)));
    if (!key) continue;
    const std::string value = strip_markup(line.substr(sep + sep_len));
    ++fields.recognized;
    if (value.empty()) continue;
    if (*key == "age") {
      const auto digit = value.find_first_of("0123456789");
      if (digit == std::string::npos) continue;
      const auto stop = value.find_first_not_of("0123456789", digit);
      const std::string digits = value.substr(digit, stop - digit);
      if (digits.size() <= 3) fields.age = std::stoi(digits);
    } else if (*key == "wealth") {
      if (auto w = normalize_wealth(value)) fields.text["wealth"] = *w;
    } else {
      fields.text[std::string(*key)] = value;
    }
  }
  return fields;
}

UserProfile profile_from_context(LlmClient& llm, std::string_view context_text,
                                 Language lang, const CatalogSet& catalogs,
                                 const RuleSet& rules, std::uint64_t seed,
                                 const ContextOptions& options) {
  if (trim(context_text).empty()) {
    throw PreconditionError("profile context must not be empty");
  }
  const std::string prompt = render_profile_prompt(context_text, lang);
  std::optional<ParsedProfileFields> parsed;
  std::string last_raw;
  const int attempts = std::max(1, options.parse_retries);
  for (int attempt = 0; attempt < attempts && !parsed; ++attempt) {
    last_raw = llm_complete(llm, prompt);
    auto fields = parse_profile_block(last_raw);
    if (fields.recognized > 0) parsed = std::move(fields);
  }
  if (!parsed) {
    throw ParseError("no profile attributes found in LLM output after " +
                         std::to_string(attempts) + " attempts",
                     last_raw);
  }

  // Back-fill from a synthesized profile, then overlay what the LLM said.
  UserProfile p = sample_profile(catalogs, rules, seed, lang, options.synthesis);
  p.user_id = "ctx-" + hex64(seed);
  if (parsed->age) {
    p.age = std::clamp(*parsed->age, kMinAge, kMaxAge);
    p.provenance["age"] = {"age", "llm"};
  }
  for (const auto& [attribute, value] : parsed->text) {
    *text_field(p, attribute) = value;
    std::string category;
    if (attribute == "wealth") {
      category = value;
    } else if (auto c = catalog_for(catalogs, attribute).category_of(value)) {
      category = *c;
    }
    p.provenance[attribute] = {category, "llm"};
  }
  Rng rng(derive_seed(seed, 1));
  return repair_contradictions(std::move(p), rules, catalogs, rng,
                               options.synthesis);
}

}  // namespace bases
