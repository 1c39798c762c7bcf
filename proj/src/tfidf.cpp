#include "toxic/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "toxic/error.hpp"
#include "toxic/text.hpp"

namespace toxic {

double SparseVector::norm() const {
  double sum = 0.0;
  for (const auto& [i, v] : entries) sum += v * v;
  return std::sqrt(sum);
}

TfIdfVectorizer::TfIdfVectorizer(NgramRange range, std::vector<std::string> features, Eigen::VectorXd idf)
    : range_(range), features_(std::move(features)), idf_(std::move(idf)) {
  if (range_.lo < 1 || range_.hi < range_.lo) throw ParamError("invalid n-gram range");
  if (static_cast<std::size_t>(idf_.size()) != features_.size()) {
    throw FormatError("idf length does not match feature count");
  }
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (!index_.emplace(features_[j], static_cast<std::int32_t>(j)).second) {
      throw FormatError("duplicate feature '" + features_[j] + "'");
    }
  }
}

std::int32_t TfIdfVectorizer::index_of(std::string_view ngram) const {
  auto it = index_.find(std::string(ngram));
  return it == index_.end() ? -1 : it->second;
}

std::vector<std::string> extract_ngrams(std::string_view normalized_doc, NgramRange range) {
  const auto tokens = tokenize(normalized_doc);
  std::vector<std::string> grams;
  for (std::size_t start = 0; start < tokens.size(); ++start) {
    std::string gram;
    for (std::size_t n = 1; n <= range.hi && start + n <= tokens.size(); ++n) {
      if (n > 1) gram.push_back(' ');
      gram += tokens[start + n - 1];
      if (n >= range.lo) grams.push_back(gram);
    }
  }
  return grams;
}

TfIdfVectorizer fit_tfidf(const std::vector<std::string>& docs, NgramRange range, std::size_t max_features) {
  if (docs.empty()) throw FitError("cannot fit TF-IDF on an empty document list");
  if (range.lo < 1 || range.hi < range.lo) throw ParamError("invalid n-gram range");

  std::unordered_map<std::string, std::uint64_t> df;
  for (const auto& doc : docs) {
    auto grams = extract_ngrams(doc, range);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[std::move(g)];
  }

  std::vector<std::pair<std::string, std::uint64_t>> ranked(df.begin(), df.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_features) ranked.resize(max_features);

  const double n = static_cast<double>(docs.size());
  std::vector<std::string> features;
  Eigen::VectorXd idf(static_cast<Eigen::Index>(ranked.size()));
  for (std::size_t j = 0; j < ranked.size(); ++j) {
    idf[static_cast<Eigen::Index>(j)] = std::log((1.0 + n) / (1.0 + static_cast<double>(ranked[j].second))) + 1.0;
    features.push_back(std::move(ranked[j].first));
  }
  return TfIdfVectorizer(range, std::move(features), std::move(idf));
}

SparseVector TfIdfVectorizer::transform(std::string_view normalized_doc) const {
  std::map<std::int32_t, double> counts;
  for (const auto& g : extract_ngrams(normalized_doc, range_)) {
    const auto j = index_of(g);
    if (j >= 0) counts[j] += 1.0;
  }
  SparseVector out;
  out.dim = dim();
  out.entries.reserve(counts.size());
  for (const auto& [j, c] : counts) out.entries.emplace_back(j, c * idf_[j]);
  const double norm = out.norm();
  if (norm > 0.0) {
    for (auto& e : out.entries) e.second /= norm;
  }
  return out;
}

}  // namespace toxic
