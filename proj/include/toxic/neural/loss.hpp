#pragma once

#include <algorithm>
#include <cmath>

#include "toxic/labels.hpp"
#include "toxic/neural/tensor.hpp"

namespace toxic::nn {

inline constexpr double kProbClip = 1e-7;

// Mean binary cross-entropy over the six labels, probabilities clipped to
// [1e-7, 1 - 1e-7].
template <typename Scalar>
Scalar bce_loss(const Row<Scalar>& p, const LabelVector& y) {
  require_shape(p, 1, static_cast<Eigen::Index>(kNumLabels), "bce probabilities");
  double total = 0.0;
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const double q = std::clamp(static_cast<double>(p[static_cast<Eigen::Index>(l)]), kProbClip, 1.0 - kProbClip);
    total -= y[l] ? std::log(q) : std::log(1.0 - q);
  }
  return static_cast<Scalar>(total / static_cast<double>(kNumLabels));
}

// d loss / d p of the clipped loss; zero where the clip is active.
template <typename Scalar>
Row<Scalar> bce_grad(const Row<Scalar>& p, const LabelVector& y) {
  require_shape(p, 1, static_cast<Eigen::Index>(kNumLabels), "bce probabilities");
  Row<Scalar> dp(static_cast<Eigen::Index>(kNumLabels));
  const double n = static_cast<double>(kNumLabels);
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const auto k = static_cast<Eigen::Index>(l);
    const double q = static_cast<double>(p[k]);
    if (q < kProbClip || q > 1.0 - kProbClip) {
      dp[k] = 0;
    } else {
      dp[k] = static_cast<Scalar>((y[l] ? -1.0 / q : 1.0 / (1.0 - q)) / n);
    }
  }
  return dp;
}

// Gradient of the mean BCE w.r.t. the logits when p = sigmoid(logits):
// (p - y) / 6. This is the unclipped derivative; it stays informative when
// the sigmoid saturates.
template <typename Scalar>
Row<Scalar> bce_logit_grad(const Row<Scalar>& p, const LabelVector& y) {
  Row<Scalar> dz(static_cast<Eigen::Index>(kNumLabels));
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const auto k = static_cast<Eigen::Index>(l);
    dz[k] = (p[k] - static_cast<Scalar>(y[l])) / static_cast<Scalar>(kNumLabels);
  }
  return dz;
}

}  // namespace toxic::nn
