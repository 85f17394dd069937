#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bases/errors.hpp"
#include "bases/profiles.hpp"

namespace bases {

using json = Json;

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// Line of the index-th entry object. Entries are the only objects that
// carry a "category" key, and an unescaped `"category"` can only occur as
// a key, so counting occurrences of it locates the entry.
std::size_t line_of_entry(std::string_view text, std::size_t index) {
  std::size_t pos = 0;
  for (std::size_t seen = 0;; ++seen) {
    pos = text.find("\"category\"", pos);
    if (pos == std::string_view::npos) return 0;
    if (seen == index) return line_of_offset(text, pos);
    ++pos;
  }
}

SamplingMode parse_mode(const std::string& name, const std::string& source) {
  if (name == "uniform") return SamplingMode::kUniform;
  if (name == "coarse_to_fine") return SamplingMode::kCoarseToFine;
  if (name == "weighted") return SamplingMode::kWeighted;
  throw LoadError(source, 0, "unknown sampling_mode '" + name + "'");
}

void check_attribute_shape(const AttributeCatalog& cat,
                           const std::string& source) {
  const auto& entries = cat.entries();
  const std::string& attr = cat.attribute();
  if (attr == "personality" && entries.size() != 5) {
    throw LoadError(source, 0,
                    "personality catalog needs exactly 5 coarse categories, "
                    "found " + std::to_string(entries.size()));
  }
  if (attr == "interest" && entries.size() != 11) {
    throw LoadError(source, 0,
                    "interest catalog needs exactly 11 coarse categories, "
                    "found " + std::to_string(entries.size()));
  }
  if (attr == "career") {
    if (!cat.has_category("student") || !cat.has_category("non-working")) {
      throw LoadError(source, 0,
                      "career catalog must include the 'student' and "
                      "'non-working' categories");
    }
    if (entries.size() < 22) {
      throw LoadError(source, 0,
                      "career catalog needs at least 20 occupational "
                      "categories besides 'student' and 'non-working'");
    }
  }
  if (attr == "wealth") {
    std::set<std::string> seen;
    for (const auto& e : entries) {
      bool known = false;
      for (auto level : kWealthLevels) known = known || e.category == level;
      if (!known) {
        throw LoadError(source, 0,
                        "wealth category '" + e.category +
                            "' is not one of low/middle/high income");
      }
      seen.insert(e.category);
    }
    if (seen.size() != kWealthLevels.size()) {
      throw LoadError(source, 0, "wealth catalog must define all three levels");
    }
  }
  if (attr == "age") {
    for (const auto& e : entries) {
      for (const auto& v : e.values) {
        std::size_t used = 0;
        int age = -1;
        try {
          age = std::stoi(v, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != v.size() || age < kMinAge || age > kMaxAge) {
          throw LoadError(source, 0,
                          "age value '" + v + "' is not an integer in [6, 90]");
        }
      }
    }
  }
}

}  // namespace

std::string_view sampling_mode_name(SamplingMode mode) {
  switch (mode) {
    case SamplingMode::kUniform:
      return "uniform";
    case SamplingMode::kCoarseToFine:
      return "coarse_to_fine";
    case SamplingMode::kWeighted:
      return "weighted";
  }
  return "uniform";
}

AttributeCatalog::AttributeCatalog(std::string attribute, SamplingMode mode,
                                   std::vector<CatalogEntry> entries)
    : attribute_(std::move(attribute)),
      mode_(mode),
      entries_(std::move(entries)) {}

CatalogPick AttributeCatalog::sample(Rng& rng) const {
  auto pick = sample_where(rng, [](const CatalogPick&) { return true; });
  if (!pick) throw SamplingError("catalog '" + attribute_ + "' is empty");
  return *pick;
}

std::optional<CatalogPick> AttributeCatalog::sample_where(
    Rng& rng, const Filter& keep) const {
  if (mode_ == SamplingMode::kUniform) {
    std::vector<CatalogPick> pool;
    for (const auto& e : entries_) {
      for (const auto& v : e.values) {
        CatalogPick p{e.category, v};
        if (keep(p)) pool.push_back(std::move(p));
      }
    }
    if (pool.empty()) return std::nullopt;
    return pool[rng.uniform_index(pool.size())];
  }

  std::vector<std::vector<const std::string*>> allowed(entries_.size());
  std::vector<double> weights(entries_.size(), 0.0);
  bool any = false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.weight <= 0.0) continue;
    for (const auto& v : e.values) {
      if (keep(CatalogPick{e.category, v})) allowed[i].push_back(&v);
    }
    if (!allowed[i].empty()) {
      weights[i] = e.weight;
      any = true;
    }
  }
  if (!any) return std::nullopt;
  const std::size_t entry = rng.weighted_index(weights);
  const auto& values = allowed[entry];
  return CatalogPick{entries_[entry].category,
                     *values[rng.uniform_index(values.size())]};
}

std::optional<std::string> AttributeCatalog::category_of(
    std::string_view value) const {
  const std::string needle = to_lower_ascii(trim(value));
  if (needle.empty()) return std::nullopt;
  for (const auto& e : entries_) {
    for (const auto& v : e.values) {
      if (to_lower_ascii(v) == needle) return e.category;
    }
  }
  for (const auto& e : entries_) {
    if (to_lower_ascii(e.category) == needle) return e.category;
  }
  return std::nullopt;
}

bool AttributeCatalog::has_category(std::string_view category) const {
  for (const auto& e : entries_) {
    if (e.category == category) return true;
  }
  return false;
}

AttributeCatalog parse_catalog(std::string_view text,
                               std::string_view expected_attribute,
                               const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(source, line_of_offset(text, e.byte ? e.byte - 1 : 0),
                    "malformed JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw LoadError(source, 1, "catalog must be an object");

  const auto attr_it = doc.find("attribute");
  if (attr_it == doc.end() || !attr_it->is_string()) {
    throw LoadError(source, 0, "missing string field 'attribute'");
  }
  const std::string attribute = attr_it->get<std::string>();
  if (!expected_attribute.empty() && attribute != expected_attribute) {
    throw LoadError(source, 0,
                    "file declares attribute '" + attribute + "', expected '" +
                        std::string(expected_attribute) + "'");
  }
  const auto mode_it = doc.find("sampling_mode");
  if (mode_it == doc.end() || !mode_it->is_string()) {
    throw LoadError(source, 0, "missing string field 'sampling_mode'");
  }
  const SamplingMode mode = parse_mode(mode_it->get<std::string>(), source);

  const auto entries_it = doc.find("entries");
  if (entries_it == doc.end() || !entries_it->is_array() ||
      entries_it->empty()) {
    throw LoadError(source, 0, "'entries' must be a non-empty array");
  }

  std::vector<CatalogEntry> entries;
  double total_weight = 0.0;
  for (std::size_t i = 0; i < entries_it->size(); ++i) {
    const json& item = (*entries_it)[i];
    const std::size_t line = line_of_entry(text, i);
    auto fail = [&](const std::string& what) {
      throw LoadError(source, line,
                      "entry " + std::to_string(i + 1) + ": " + what);
    };
    if (!item.is_object()) fail("must be an object");
    CatalogEntry entry;
    const auto cat = item.find("category");
    if (cat == item.end() || !cat->is_string() ||
        cat->get<std::string>().empty()) {
      fail("missing non-empty 'category'");
    }
    entry.category = cat->get<std::string>();
    const auto values = item.find("values");
    if (values == item.end() || !values->is_array() || values->empty()) {
      fail("'values' must be a non-empty array");
    }
    for (const auto& v : *values) {
      if (!v.is_string() || v.get<std::string>().empty()) {
        fail("fine values must be non-empty strings");
      }
      entry.values.push_back(v.get<std::string>());
    }
    if (const auto w = item.find("weight"); w != item.end()) {
      if (!w->is_number()) fail("'weight' must be a number");
      entry.weight = w->get<double>();
      if (!std::isfinite(entry.weight)) fail("weight must be finite");
      if (entry.weight < 0.0) fail("weight must not be negative");
    }
    total_weight += entry.weight;
    entries.push_back(std::move(entry));
  }
  if (total_weight <= 0.0) throw LoadError(source, 0, "all weights are zero");

  AttributeCatalog catalog(attribute, mode, std::move(entries));
  check_attribute_shape(catalog, source);
  return catalog;
}

CatalogSet load_catalogs(const std::filesystem::path& catalog_dir,
                         Language lang) {
  const auto dir = catalog_dir / std::string(language_code(lang));
  if (!std::filesystem::is_directory(dir)) {
    throw LoadError(dir.string(), 0, "catalog directory not found");
  }
  CatalogSet catalogs;
  for (auto attribute : kProfileAttributes) {
    const auto path = dir / (std::string(attribute) + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw LoadError(path.string(), 0,
                      "missing catalog for attribute '" +
                          std::string(attribute) + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    catalogs.emplace(std::string(attribute),
                     parse_catalog(buf.str(), attribute, path.string()));
  }
  return catalogs;
}

}  // namespace bases
