#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace toxic {

// Sparse row vector with strictly increasing indices.
struct SparseVector {
  std::vector<std::pair<std::int32_t, double>> entries;
  std::size_t dim = 0;

  bool empty() const { return entries.empty(); }
  double norm() const;
};

struct NgramRange {
  std::size_t lo = 1;
  std::size_t hi = 2;
};

// Word n-gram TF-IDF with smoothed idf, ln((1 + N) / (1 + df)) + 1, and L2
// document normalization.
class TfIdfVectorizer {
 public:
  TfIdfVectorizer() = default;
  TfIdfVectorizer(NgramRange range, std::vector<std::string> features, Eigen::VectorXd idf);

  const std::vector<std::string>& features() const { return features_; }
  const Eigen::VectorXd& idf() const { return idf_; }
  Eigen::VectorXd& idf() { return idf_; }
  NgramRange ngram_range() const { return range_; }
  std::size_t dim() const { return features_.size(); }

  // -1 when unknown.
  std::int32_t index_of(std::string_view ngram) const;

  SparseVector transform(std::string_view normalized_doc) const;

 private:
  NgramRange range_;
  std::vector<std::string> features_;
  Eigen::VectorXd idf_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// Contiguous word n-grams of tokenize(doc) for every n in the range, in
// position order (all n for position 0 first).
std::vector<std::string> extract_ngrams(std::string_view normalized_doc, NgramRange range);

TfIdfVectorizer fit_tfidf(const std::vector<std::string>& docs, NgramRange range = {},
                          std::size_t max_features = 50000);

inline SparseVector tfidf_transform(const TfIdfVectorizer& v, std::string_view doc) {
  return v.transform(doc);
}

}  // namespace toxic
