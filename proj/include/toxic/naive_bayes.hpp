#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "toxic/error.hpp"
#include "toxic/labels.hpp"
#include "toxic/tfidf.hpp"

namespace toxic {

// Six independent two-class multinomial Naive Bayes models, one per label,
// over (possibly fractional) feature weights.
//
// log_prior(l, c) = log P(label l == c), c in {0, 1}.
// feature_log_prob(2 * l + c, j) = log P(feature j | label l == c).
template <typename Scalar>
struct NaiveBayesModel {
  using Table = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Table log_prior;         // kNumLabels x 2
  Table feature_log_prob;  // (2 * kNumLabels) x F
  double alpha = 1.0;

  Eigen::Index dim() const { return feature_log_prob.cols(); }

  // Joint log score log P(c) + sum_j x_j log P(j | c) for label l.
  double joint_log_score(std::size_t label, int cls, const SparseVector& x) const {
    const auto row = static_cast<Eigen::Index>(2 * label + cls);
    double score = static_cast<double>(log_prior(static_cast<Eigen::Index>(label), cls));
    if (score == -std::numeric_limits<double>::infinity()) return score;
    for (const auto& [j, v] : x.entries) score += v * static_cast<double>(feature_log_prob(row, j));
    return score;
  }

  Probabilities predict(const SparseVector& x) const {
    if (static_cast<Eigen::Index>(x.dim) != dim()) {
      throw ShapeError("feature vector dimension " + std::to_string(x.dim) + " does not match model dimension " +
                       std::to_string(dim()));
    }
    Probabilities out{};
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      const double neg = joint_log_score(l, 0, x);
      const double pos = joint_log_score(l, 1, x);
      const double hi = std::max(neg, pos);
      const double lse = hi + std::log(std::exp(neg - hi) + std::exp(pos - hi));
      out[l] = std::exp(pos - lse);
    }
    return out;
  }

  template <typename To>
  NaiveBayesModel<To> cast() const {
    return {log_prior.template cast<To>(), feature_log_prob.template cast<To>(), alpha};
  }
};

inline NaiveBayesModel<double> nb_fit(const std::vector<SparseVector>& X, const std::vector<LabelVector>& Y,
                                      double alpha = 1.0) {
  if (!(alpha > 0.0)) throw ParamError("smoothing alpha must be positive");
  if (X.empty() || X.size() != Y.size()) throw ParamError("nb_fit needs equally many (> 0) examples and labels");
  const Eigen::Index F = static_cast<Eigen::Index>(X.front().dim);
  for (const auto& x : X) {
    if (static_cast<Eigen::Index>(x.dim) != F) throw ShapeError("feature vectors differ in dimension");
  }

  // Feature mass per (label, class), then smoothed and log-normalized per row.
  NaiveBayesModel<double>::Table mass = NaiveBayesModel<double>::Table::Zero(2 * kNumLabels, F);
  Eigen::Matrix<double, kNumLabels, 2> members = Eigen::Matrix<double, kNumLabels, 2>::Zero();
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      const int c = Y[i][l] ? 1 : 0;
      members(static_cast<Eigen::Index>(l), c) += 1.0;
      const auto row = static_cast<Eigen::Index>(2 * l + c);
      for (const auto& [j, v] : X[i].entries) mass(row, j) += v;
    }
  }

  NaiveBayesModel<double> m;
  m.alpha = alpha;
  m.log_prior.resize(kNumLabels, 2);
  m.feature_log_prob.resize(2 * kNumLabels, F);
  const double n = static_cast<double>(X.size());
  for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(kNumLabels); ++l) {
    for (int c = 0; c < 2; ++c) {
      m.log_prior(l, c) = std::log(members(l, c) / n);
      const Eigen::Index row = 2 * l + c;
      const double total = mass.row(row).sum() + alpha * static_cast<double>(F);
      m.feature_log_prob.row(row) = ((mass.row(row).array() + alpha) / total).log().matrix();
    }
  }
  return m;
}

template <typename Scalar>
Probabilities nb_predict(const NaiveBayesModel<Scalar>& m, const SparseVector& x) {
  return m.predict(x);
}

}  // namespace toxic
