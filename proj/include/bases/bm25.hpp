#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace bases {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// ln((N - df + 0.5) / (df + 0.5) + 1); always positive.
double bm25_idf(std::size_t n_docs, std::size_t df);

// Term statistics over a fixed collection of tokenized documents.
class Bm25Index {
 public:
  explicit Bm25Index(const std::vector<std::vector<std::string>>& docs,
                     Bm25Params params = {});

  // One score per document. Repeated query terms count once.
  std::vector<double> score(std::span<const std::string> query_terms) const;

  std::size_t size() const { return lengths_.size(); }
  double average_length() const { return avgdl_; }
  std::size_t document_frequency(const std::string& term) const;

 private:
  Bm25Params params_;
  std::vector<std::unordered_map<std::string, int>> tf_;
  std::vector<std::size_t> lengths_;
  std::unordered_map<std::string, std::size_t> df_;
  double avgdl_ = 0.0;
};

}  // namespace bases
