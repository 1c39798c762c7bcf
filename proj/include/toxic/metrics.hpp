#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "toxic/labels.hpp"

namespace toxic {

// N x 6, column-major so every label column is contiguous.
using ProbMatrix = Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kNumLabels)>;
using LabelMatrix = Eigen::Matrix<int, Eigen::Dynamic, static_cast<int>(kNumLabels)>;

ProbMatrix to_matrix(const std::vector<Probabilities>& probs);
LabelMatrix to_matrix(const std::vector<LabelVector>& labels);

struct AccuracyReport {
  std::array<double, kNumLabels> per_label{};
  double mean = 0.0;
};

// A prediction is positive iff p >= threshold.
AccuracyReport accuracy(const ProbMatrix& probs, const LabelMatrix& labels, double threshold = 0.5);

// Mann-Whitney AUC with average ranks for ties. Empty when only one class is
// present.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels);

struct AucReport {
  std::array<std::optional<double>, kNumLabels> per_label{};
  std::optional<double> mean;          // over defined columns
  std::vector<std::size_t> skipped;    // label indices with undefined AUC
};

AucReport columnwise_auc(const ProbMatrix& probs, const LabelMatrix& labels);

// Mean over defined columns; throws MetricError when none is defined.
double mean_columnwise_auc(const ProbMatrix& probs, const LabelMatrix& labels, std::vector<std::size_t>* skipped = nullptr);

struct MetricReport {
  std::size_t count = 0;
  AccuracyReport accuracy;
  AucReport auc;
};

MetricReport evaluate(const ProbMatrix& probs, const LabelMatrix& labels);

// Fixed-layout text table: one line per label, then the means.
std::string format_report(const MetricReport& report);

}  // namespace toxic
