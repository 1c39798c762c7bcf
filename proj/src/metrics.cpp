#include "toxic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>

#include "toxic/error.hpp"

namespace toxic {

ProbMatrix to_matrix(const std::vector<Probabilities>& probs) {
  ProbMatrix m(static_cast<Eigen::Index>(probs.size()), static_cast<Eigen::Index>(kNumLabels));
  for (std::size_t i = 0; i < probs.size(); ++i) {
    for (std::size_t l = 0; l < kNumLabels; ++l) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = probs[i][l];
  }
  return m;
}

LabelMatrix to_matrix(const std::vector<LabelVector>& labels) {
  LabelMatrix m(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(kNumLabels));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t l = 0; l < kNumLabels; ++l) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = labels[i][l];
  }
  return m;
}

AccuracyReport accuracy(const ProbMatrix& probs, const LabelMatrix& labels, double threshold) {
  if (probs.rows() == 0) throw MetricError("accuracy of an empty set is undefined");
  if (labels.rows() != probs.rows()) throw MetricError("probability and label counts differ");
  AccuracyReport r;
  const auto n = static_cast<double>(probs.rows());
  for (Eigen::Index l = 0; l < probs.cols(); ++l) {
    const auto predicted = (probs.col(l).array() >= threshold).cast<int>();
    const auto correct = (predicted == labels.col(l).array()).count();
    r.per_label[static_cast<std::size_t>(l)] = static_cast<double>(correct) / n;
  }
  r.mean = std::accumulate(r.per_label.begin(), r.per_label.end(), 0.0) / static_cast<double>(kNumLabels);
  return r;
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty()) throw MetricError("AUC of an empty set is undefined");
  if (scores.size() != labels.size()) throw MetricError("score and label counts differ");
  const std::size_t n = scores.size();
  for (double s : scores) {
    if (!std::isfinite(s)) throw MetricError("non-finite score");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are kept doubled so tied (average) ranks stay integral.
  std::uint64_t rank_sum_x2 = 0;
  std::uint64_t n_pos = 0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
    const std::uint64_t avg_rank_x2 = lo + 1 + hi;  // (lo+1) + hi, 1-based ranks lo+1..hi
    for (std::size_t k = lo; k < hi; ++k) {
      if (labels[order[k]] != 0) {
        rank_sum_x2 += avg_rank_x2;
        ++n_pos;
      }
    }
    lo = hi;
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const std::uint64_t u_x2 = rank_sum_x2 - n_pos * (n_pos + 1);
  return static_cast<double>(u_x2) / static_cast<double>(2 * n_pos * n_neg);
}

AucReport columnwise_auc(const ProbMatrix& probs, const LabelMatrix& labels) {
  if (labels.rows() != probs.rows()) throw MetricError("probability and label counts differ");
  AucReport r;
  double sum = 0.0;
  std::size_t defined = 0;
  for (Eigen::Index l = 0; l < probs.cols(); ++l) {
    const auto k = static_cast<std::size_t>(l);
    r.per_label[k] = roc_auc(std::span<const double>(probs.col(l).data(), static_cast<std::size_t>(probs.rows())),
                             std::span<const int>(labels.col(l).data(), static_cast<std::size_t>(labels.rows())));
    if (r.per_label[k]) {
      sum += *r.per_label[k];
      ++defined;
    } else {
      r.skipped.push_back(k);
    }
  }
  if (defined > 0) r.mean = sum / static_cast<double>(defined);
  return r;
}

double mean_columnwise_auc(const ProbMatrix& probs, const LabelMatrix& labels, std::vector<std::size_t>* skipped) {
  const auto r = columnwise_auc(probs, labels);
  if (skipped != nullptr) *skipped = r.skipped;
  if (!r.mean) throw MetricError("every label column has a single class; mean AUC is undefined");
  return *r.mean;
}

MetricReport evaluate(const ProbMatrix& probs, const LabelMatrix& labels) {
  MetricReport r;
  r.count = static_cast<std::size_t>(probs.rows());
  r.accuracy = accuracy(probs, labels);
  r.auc = columnwise_auc(probs, labels);
  return r;
}

std::string format_report(const MetricReport& report) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-16s %9s %9s\n", "label", "accuracy", "auc");
  out += line;
  auto auc_text = [](const std::optional<double>& v) {
    char buf[32];
    if (!v) return std::string("n/a");
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    std::snprintf(line, sizeof line, "%-16s %8.1f%% %9s\n", std::string(kLabelNames[l]).c_str(),
                  100.0 * report.accuracy.per_label[l], auc_text(report.auc.per_label[l]).c_str());
    out += line;
  }
  std::snprintf(line, sizeof line, "%-16s %8.1f%% %9s\n", "mean", 100.0 * report.accuracy.mean,
                auc_text(report.auc.mean).c_str());
  out += line;
  out += "examples: " + std::to_string(report.count) + "\n";
  if (!report.auc.skipped.empty()) {
    out += "auc skipped (single class):";
    for (auto l : report.auc.skipped) out += " " + std::string(kLabelNames[l]);
    out += "\n";
  }
  return out;
}

}  // namespace toxic
