#include "bases/bm25.hpp"

#include <cmath>
#include <unordered_set>

namespace bases {

double bm25_idf(std::size_t n_docs, std::size_t df) {
  const double n = static_cast<double>(n_docs);
  const double d = static_cast<double>(df);
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

Bm25Index::Bm25Index(const std::vector<std::vector<std::string>>& docs,
                     Bm25Params params)
    : params_(params) {
  tf_.resize(docs.size());
  lengths_.reserve(docs.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& term : docs[i]) ++tf_[i][term];
    for (const auto& [term, count] : tf_[i]) ++df_[term];
    lengths_.push_back(docs[i].size());
    total += docs[i].size();
  }
  if (!docs.empty()) {
    avgdl_ = static_cast<double>(total) / static_cast<double>(docs.size());
  }
}

std::size_t Bm25Index::document_frequency(const std::string& term) const {
  const auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

std::vector<double> Bm25Index::score(
    std::span<const std::string> query_terms) const {
  std::vector<double> scores(size(), 0.0);
  if (avgdl_ <= 0.0) return scores;
  std::unordered_set<std::string> seen;
  for (const auto& term : query_terms) {
    if (!seen.insert(term).second) continue;
    const std::size_t df = document_frequency(term);
    if (df == 0) continue;
    const double idf = bm25_idf(size(), df);
    for (std::size_t i = 0; i < size(); ++i) {
      const auto it = tf_[i].find(term);
      if (it == tf_[i].end()) continue;
      const double tf = it->second;
      const double norm =
          1.0 - params_.b +
          params_.b * static_cast<double>(lengths_[i]) / avgdl_;
      scores[i] += idf * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
    }
  }
  return scores;
}

}  // namespace bases
